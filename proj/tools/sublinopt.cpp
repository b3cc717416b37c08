// Command-line front end: instance generation, the sublinear solvers, exact
// re-verification of solver reports, and access-count benchmarking.
//
// Conventions shared by every subcommand:
//   * machine-readable JSON goes to stdout, human diagnostics to stderr
//     (--json silences the latter);
//   * --seed falls back to the SUBLINOPT_SEED environment variable, the flag
//     winning when both are present, and a fixed seed pins every output byte
//     except wall_time;
//   * exit codes: 0 success / verified, 1 verification refuted or internal
//     failure, 2 usage errors or unreadable input, 3 amplification gave up.
#include <algorithm>
#include <atomic>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sublinopt/generate.hpp"
#include "sublinopt/kernels.hpp"
#include "sublinopt/matrix.hpp"
#include "sublinopt/rng.hpp"
#include "sublinopt/solvers.hpp"
#include "sublinopt/verify.hpp"

using namespace sublinopt;

namespace {

constexpr int kSchemaVersion = 1;

// --- deterministic JSON emission --------------------------------------------
// nlohmann::json is used for *parsing* (verify) only; output is built by hand
// so field order and float formatting are pinned and repeated runs are
// byte-identical.

std::string jnum(double v) {
    if (!std::isfinite(v)) return "null";
    char b[40];
    std::snprintf(b, sizeof(b), "%.17g", v);
    return b;
}

std::string jesc(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char b[8];
                    std::snprintf(b, sizeof(b), "\\u%04x", c);
                    out += b;
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

// Ordered object writer; values are pre-rendered JSON fragments.
class Obj {
  public:
    Obj& raw(const std::string& key, const std::string& fragment) {
        body_ += (body_.empty() ? "" : ",");
        body_ += jesc(key) + ":" + fragment;
        return *this;
    }
    Obj& num(const std::string& key, double v) { return raw(key, jnum(v)); }
    Obj& integer(const std::string& key, std::uint64_t v) {
        return raw(key, std::to_string(v));
    }
    Obj& str(const std::string& key, const std::string& v) {
        return raw(key, jesc(v));
    }
    Obj& boolean(const std::string& key, bool v) {
        return raw(key, v ? "true" : "false");
    }
    std::string done() const { return "{" + body_ + "}"; }

  private:
    std::string body_;
};

std::string jarray(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += jnum(v[i]);
    }
    return out + "]";
}

std::string jarray_u32(const std::vector<std::uint32_t>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

// --- shared option plumbing --------------------------------------------------

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("SUBLINOPT_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw CLI::ValidationError(
                "SUBLINOPT_SEED", "must be an unsigned integer, got '" +
                                      std::string(env) + "'");
        return static_cast<std::uint64_t>(v);
    }
    return 0;
}

SolverConfig::Profile parse_profile(const std::string& name) {
    if (name == "paper") return SolverConfig::Profile::paper;
    if (name == "tuned") return SolverConfig::Profile::tuned;
    if (name == "bench") return SolverConfig::Profile::bench;
    throw CLI::ValidationError("--profile", "unknown profile '" + name + "'");
}

// "poly:q=2" | "gauss:kappa=1.5[,averaging=4]"
KernelSpec parse_kernel(const std::string& text) {
    KernelSpec spec;
    const auto colon = text.find(':');
    const std::string family = text.substr(0, colon);
    if (family == "poly" || family == "polynomial") {
        spec.family = KernelSpec::Family::polynomial;
    } else if (family == "gauss" || family == "gaussian") {
        spec.family = KernelSpec::Family::gaussian;
    } else {
        throw CLI::ValidationError("--kernel",
                                   "unknown kernel family '" + family + "'");
    }
    if (colon == std::string::npos) return spec;
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--kernel",
                                       "expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        try {
            if (key == "q")
                spec.q = std::stoi(val);
            else if (key == "kappa")
                spec.kappa = std::stod(val);
            else if (key == "averaging")
                spec.averaging = std::stoi(val);
            else
                throw CLI::ValidationError(
                    "--kernel", "unknown kernel parameter '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw CLI::ValidationError("--kernel",
                                       "bad value for '" + key + "'");
        }
    }
    return spec;
}

std::string kernel_json(const KernelSpec& spec) {
    Obj o;
    if (spec.family == KernelSpec::Family::polynomial) {
        o.str("family", "polynomial").integer("q", spec.q);
    } else {
        o.str("family", "gaussian")
            .num("kappa", spec.kappa)
            .integer("averaging", spec.averaging);
    }
    return o.done();
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
    KernelSpec spec;
    const std::string family = j.at("family").get<std::string>();
    if (family == "polynomial") {
        spec.family = KernelSpec::Family::polynomial;
        spec.q = j.at("q").get<int>();
    } else if (family == "gaussian") {
        spec.family = KernelSpec::Family::gaussian;
        spec.kappa = j.at("kappa").get<double>();
        spec.averaging = j.value("averaging", 4);
    } else {
        throw std::runtime_error("unknown kernel family in report: " + family);
    }
    return spec;
}

std::vector<double> load_b_file(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open b-file " + path);
    std::vector<double> b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        try {
            std::size_t used = 0;
            b.push_back(std::stod(line, &used));
            while (used < line.size() && std::isspace(static_cast<unsigned char>(line[used]))) ++used;
            if (used != line.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected one number per line");
        }
    }
    if (b.size() != n)
        throw std::runtime_error(path + ": got " + std::to_string(b.size()) +
                                 " values for " + std::to_string(n) + " rows");
    return b;
}

// --- exact recomputation helpers (shared by solve diagnostics and verify) ----

double scan_min_margin(const DataMatrix& m, const std::vector<double>& x) {
    double worst = 1e300;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        worst = std::min(worst, m.dot_row_uncounted(i, x.data()));
    return worst;
}

double scan_max_sq_dist(const DataMatrix& m, const std::vector<double>& x) {
    double xx = 0.0;
    for (double v : x) xx += v * v;
    double worst = -1e300;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        worst = std::max(worst, xx - 2.0 * m.dot_row_uncounted(i, x.data()) +
                                    m.row_sq_norm(i));
    return worst;
}

double scan_qp_dual(const DataMatrix& m, const std::vector<double>& b,
                    const std::vector<double>& x) {
    double xx = 0.0;
    for (double v : x) xx += v * v;
    double worst = 1e300;
    for (std::size_t i = 0; i < m.n_rows(); ++i)
        worst = std::min(worst,
                         b[i] + 2.0 * m.dot_row_uncounted(i, x.data()) - xx);
    return worst;
}

std::vector<double> dense_row(const DataMatrix& m, std::size_t i) {
    std::vector<double> v(m.n_cols(), 0.0);
    m.for_each_in_row(i, [&](std::size_t j, double val) { v[j] = val; });
    return v;
}

double scan_kernel_margin(const DataMatrix& m, const KernelSpec& spec,
                          const std::vector<std::uint32_t>& support,
                          const std::vector<double>& coeffs) {
    double worst = 1e300;
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        const std::vector<double> row = dense_row(m, i);
        double cross = 0.0;
        for (std::size_t k = 0; k < support.size(); ++k)
            cross += coeffs[k] * kernel_exact(spec, dense_row(m, support[k]), row);
        worst = std::min(worst, cross);
    }
    return worst;
}

double scan_kernel_meb(const DataMatrix& m, const KernelSpec& spec,
                       const std::vector<std::uint32_t>& support,
                       const std::vector<double>& coeffs) {
    double self = 0.0;
    for (std::size_t a = 0; a < support.size(); ++a)
        for (std::size_t b = 0; b < support.size(); ++b)
            self += coeffs[a] * coeffs[b] *
                    kernel_exact(spec, dense_row(m, support[a]),
                                 dense_row(m, support[b]));
    double worst = -1e300;
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        const std::vector<double> row = dense_row(m, i);
        double cross = 0.0;
        for (std::size_t k = 0; k < support.size(); ++k)
            cross += coeffs[k] * kernel_exact(spec, dense_row(m, support[k]), row);
        worst = std::max(worst, kernel_exact(spec, row, row) - 2.0 * cross + self);
    }
    return worst;
}

// --- gen ----------------------------------------------------------------------

struct GenArgs {
    GenSpec spec;
    std::string out_dir;
};

int run_gen(const GenArgs& args, bool quiet) {
    const GenSpec& g = args.spec;
    DataMatrix m;
    Obj optimum;
    std::string witness;  // optional pre-rendered fragment
    Obj params;

    if (g.family == "separable") {
        SeparableInstance inst = gen_separable(g.n, g.d, g.sigma, g.seed);
        m = std::move(inst.m);
        params.num("sigma", g.sigma);
        optimum.num("margin", inst.sigma_exact);
        witness = Obj().raw("x_star", jarray(inst.x_star)).done();
    } else if (g.family == "planted") {
        m = gen_planted_classification(g.n, g.d, g.tau, g.eps, g.yes_branch,
                                       g.seed);
        params.num("tau", g.tau).num("perturbation", g.eps);
        params.str("branch", g.yes_branch ? "yes" : "no");
        optimum.num("margin", g.yes_branch ? g.tau * std::sqrt(1.0 + g.eps)
                                           : g.tau);
    } else if (g.family == "meb-hypercube") {
        m = gen_meb_hypercube(g.n, g.d, g.special_vertex, g.seed);
        params.boolean("special_vertex", g.special_vertex);
    } else if (g.family == "meb-known") {
        MebKnownInstance inst = gen_meb_known(g.n, g.d, g.radius, g.seed);
        m = std::move(inst.m);
        params.num("radius", g.radius);
        optimum.num("sq_radius", inst.radius * inst.radius);
        witness = Obj().raw("center", jarray(inst.center)).done();
    } else {
        throw CLI::ValidationError("--family",
                                   "unknown family '" + g.family + "'");
    }

    namespace fs = std::filesystem;
    fs::create_directories(args.out_dir);
    const std::string inst_path =
        (fs::path(args.out_dir) / "instance.txt").string();
    const std::string meta_path =
        (fs::path(args.out_dir) / "instance.meta.json").string();
    save_instance(m, inst_path);

    Obj meta;
    meta.integer("schema_version", kSchemaVersion)
        .str("family", g.family)
        .integer("n", m.n_rows())
        .integer("d", m.n_cols())
        .integer("nnz", m.nnz())
        .integer("seed", g.seed)
        .raw("params", params.done())
        .raw("optimum", optimum.done());
    if (!witness.empty()) meta.raw("witness", witness);
    std::ofstream out(meta_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + meta_path);
    out << meta.done() << "\n";
    out.close();

    if (!quiet)
        std::fprintf(stderr, "wrote %s and %s (%zu x %zu, %zu nonzeros)\n",
                     inst_path.c_str(), meta_path.c_str(), m.n_rows(),
                     m.n_cols(), m.nnz());
    return 0;
}

// --- solve --------------------------------------------------------------------

struct SolveArgs {
    std::string problem = "perceptron";
    std::string instance;
    std::string b_file;
    std::string kernel_text = "poly:q=2";
    SolverConfig cfg;
    bool las_vegas = false;
    bool json_only = false;
};

int run_solve(const SolveArgs& args) {
    const bool is_game = args.problem == "game";
    const bool is_kernel = args.problem == "kernel-perceptron" ||
                           args.problem == "kernel-meb";
    if (args.las_vegas && args.problem != "perceptron" &&
        args.problem != "meb")
        throw CLI::ValidationError(
            "--las-vegas", "only perceptron and meb have exact certificates");
    DataMatrix m = load_instance(args.instance, /*enforce_norms=*/!is_game);

    SolutionReport report;
    std::optional<Certificate> cert;
    KernelSpec kspec;

    if (args.problem == "perceptron") {
        if (args.las_vegas) {
            AmplifiedResult res = las_vegas_classifier(m, args.cfg);
            report = std::move(res.report);
            cert = res.certificate;
        } else {
            report = sublinear_perceptron(m, args.cfg);
        }
    } else if (args.problem == "meb") {
        if (args.las_vegas) {
            AmplifiedResult res = las_vegas_meb(m, args.cfg);
            report = std::move(res.report);
            cert = res.certificate;
        } else {
            report = sublinear_meb(m, args.cfg);
        }
    } else if (args.problem == "qp") {
        QPInstance qp;
        qp.A = &m;
        qp.b = args.b_file.empty()
                   ? std::vector<double>(m.n_rows(), 0.0)
                   : load_b_file(args.b_file, m.n_rows());
        report = sublinear_qp_simplex(qp, args.cfg);
    } else if (args.problem == "margin") {
        report = margin_estimate(m, args.cfg);
    } else if (is_game) {
        report = zero_sum_game(m, args.cfg);
    } else if (is_kernel) {
        kspec = parse_kernel(args.kernel_text);
        report = args.problem == "kernel-perceptron"
                     ? sublinear_kernel_perceptron(m, kspec, args.cfg)
                     : kernelized_meb(m, kspec, args.cfg);
    } else {
        throw CLI::ValidationError("--problem",
                                   "unknown problem '" + args.problem + "'");
    }

    const char* profile_name =
        args.cfg.profile == SolverConfig::Profile::paper
            ? "paper"
            : (args.cfg.profile == SolverConfig::Profile::tuned ? "tuned"
                                                                : "bench");

    Obj out;
    out.integer("schema_version", kSchemaVersion)
        .str("problem", args.problem)
        .str("instance", args.instance)
        .integer("n", m.n_rows())
        .integer("d", m.n_cols())
        .integer("nnz", m.nnz())
        .str("profile", profile_name)
        .num("eps", args.cfg.eps)
        .num("delta", args.cfg.delta)
        .integer("seed", args.cfg.seed)
        .integer("iterations", report.iterations)
        .integer("entries_read", report.entries_read)
        .num("achieved_value", report.achieved_value)
        .num("dual_bound", report.dual_bound);
    if (args.problem == "margin")
        out.boolean("inconclusive", report.inconclusive);
    if (is_kernel) {
        out.raw("kernel", kernel_json(kspec))
            .raw("support", jarray_u32(report.support))
            .raw("coeffs", jarray(report.coeffs));
    } else {
        out.raw("x_bar", jarray(report.x_bar));
    }
    if (is_game) out.raw("p_bar", jarray(report.p_bar(m.n_rows())));
    if (cert) {
        Obj c;
        c.boolean("accepted", cert->accepted)
            .num("claimed", cert->claimed)
            .num("verified_bound", cert->verified_bound)
            .str("method", cert->method)
            .num("confidence", cert->confidence)
            .integer("attempts", cert->attempts);
        out.raw("certificate", c.done());
    }
    out.num("wall_time", report.wall_time);
    std::printf("%s\n", out.done().c_str());

    if (!args.json_only) {
        std::fprintf(stderr,
                     "%s: value %.6g (dual %.6g), %" PRIu64
                     " iterations, %" PRIu64 " entries read\n",
                     args.problem.c_str(), report.achieved_value,
                     report.dual_bound, report.iterations,
                     report.entries_read);
        if (cert)
            std::fprintf(stderr, "certificate: %s after %" PRIu64 " attempts\n",
                         cert->accepted ? "accepted" : "rejected",
                         cert->attempts);
    }
    return 0;
}

// --- verify -------------------------------------------------------------------

struct VerifyArgs {
    std::string instance;
    std::string report_path;
    std::string b_file;
    bool json_only = false;
};

// Exact re-check of a solve report: recompute the reported objective from the
// reported solution by full scans, compare against the stored value, and --
// when the instance is small enough for the exact oracles -- confirm the
// claims are consistent with the true optimum.
int run_verify(const VerifyArgs& args) {
    nlohmann::json j;
    {
        std::ifstream in(args.report_path);
        if (!in) throw std::runtime_error("cannot open " + args.report_path);
        in >> j;
    }
    const std::string problem = j.at("problem").get<std::string>();
    const double achieved = j.at("achieved_value").get<double>();
    const double eps = j.at("eps").get<double>();
    const bool is_game = problem == "game";
    DataMatrix m = load_instance(args.instance, !is_game);

    double recomputed = 0.0;
    std::vector<std::string> failures;
    const double tol = 1e-7 * std::max(1.0, std::abs(achieved)) + 1e-9;

    if (problem == "perceptron" || problem == "margin" || is_game) {
        const auto x = j.at("x_bar").get<std::vector<double>>();
        if (problem == "margin" && j.value("inconclusive", false)) {
            // no claim to refute; report and succeed
            recomputed = achieved;
        } else if (problem == "margin") {
            double xx = 0.0;
            for (double v : x) xx += v * v;
            recomputed = 1e300;
            for (std::size_t i = 0; i < m.n_rows(); ++i)
                recomputed = std::min(
                    recomputed, 2.0 * m.dot_row_uncounted(i, x.data()) - xx);
        } else {
            recomputed = scan_min_margin(m, x);
        }
        if (std::abs(recomputed - achieved) > tol)
            failures.push_back("achieved_value does not match the exact scan");
        if (!is_game && problem != "margin" &&
            m.n_rows() * m.n_cols() <= 10000000ull) {
            const double sigma = exact_margin(m);
            if (achieved > sigma + 1e-5)
                failures.push_back("claimed margin exceeds the true optimum");
        }
    } else if (problem == "meb") {
        const auto x = j.at("x_bar").get<std::vector<double>>();
        recomputed = scan_max_sq_dist(m, x);
        if (std::abs(recomputed - achieved) > tol)
            failures.push_back("achieved_value does not match the exact scan");
        if (m.n_rows() * m.n_cols() <= 10000000ull) {
            const double opt = exact_meb(m).sq_radius;
            if (achieved < opt - 1e-5)
                failures.push_back("claimed radius is below the true optimum");
            if (j.contains("certificate") &&
                j["certificate"].value("accepted", false) &&
                achieved > opt + eps + 1e-6)
                failures.push_back(
                    "certificate accepted but the ball is not eps-optimal");
        }
    } else if (problem == "qp") {
        const auto x = j.at("x_bar").get<std::vector<double>>();
        const std::vector<double> b =
            args.b_file.empty() ? std::vector<double>(m.n_rows(), 0.0)
                                : load_b_file(args.b_file, m.n_rows());
        recomputed = scan_qp_dual(m, b, x);
        if (std::abs(recomputed - achieved) > tol)
            failures.push_back("achieved_value does not match the exact scan");
    } else if (problem == "kernel-perceptron" || problem == "kernel-meb") {
        const KernelSpec spec = kernel_from_json(j.at("kernel"));
        const auto support = j.at("support").get<std::vector<std::uint32_t>>();
        const auto coeffs = j.at("coeffs").get<std::vector<double>>();
        recomputed = problem == "kernel-perceptron"
                         ? scan_kernel_margin(m, spec, support, coeffs)
                         : scan_kernel_meb(m, spec, support, coeffs);
        if (std::abs(recomputed - achieved) > tol)
            failures.push_back("achieved_value does not match the exact scan");
    } else {
        throw std::runtime_error("report has unknown problem '" + problem + "'");
    }

    if (problem == "perceptron" && j.contains("certificate")) {
        const auto& c = j["certificate"];
        if (c.value("accepted", false) &&
            m.n_rows() * m.n_cols() <= 10000000ull) {
            const double sigma = exact_margin(m);
            if (recomputed < sigma - eps - 1e-6)
                failures.push_back(
                    "certificate accepted but the margin is not eps-optimal");
        }
    }

    Obj out;
    out.integer("schema_version", kSchemaVersion)
        .str("problem", problem)
        .str("verdict", failures.empty() ? "verified" : "refuted")
        .num("claimed", achieved)
        .num("recomputed", recomputed);
    if (!failures.empty()) {
        std::string arr = "[";
        for (std::size_t k = 0; k < failures.size(); ++k) {
            if (k) arr += ",";
            arr += jesc(failures[k]);
        }
        out.raw("reasons", arr + "]");
    }
    std::printf("%s\n", out.done().c_str());
    if (!args.json_only)
        for (const std::string& f : failures)
            std::fprintf(stderr, "refuted: %s\n", f.c_str());
    return failures.empty() ? 0 : 1;
}

// --- bench --------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::size_t> n_list{2000};
    std::vector<std::size_t> d_list{2000};
    std::vector<double> eps_list{0.2};
    int repeats = 3;
    int threads = 0;
    std::uint64_t seed = 0;
    SolverConfig::Profile profile = SolverConfig::Profile::bench;
    bool json_only = false;
};

struct BenchRun {
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t entries_read = 0;
    double wall = 0.0;
    double achieved = 0.0;
};

int run_bench(const BenchArgs& args) {
    if (args.repeats < 1)
        throw CLI::ValidationError("--repeats", "must be >= 1");
    const unsigned hw = std::thread::hardware_concurrency();
    const int threads =
        args.threads > 0 ? args.threads
                         : static_cast<int>(std::min<unsigned>(hw ? hw : 1, 8));

    std::string cells_json;
    std::uint64_t run_index = 0;  // global: run r uses seed + r
    if (!args.json_only)
        std::fprintf(stderr, "%6s %6s %6s %12s %14s %10s %8s\n", "n", "d",
                     "eps", "nnz", "entries_read", "ratio", "wall_s");

    for (std::size_t n : args.n_list) {
        for (std::size_t d : args.d_list) {
            const SeparableInstance inst = gen_separable(n, d, 0.3, args.seed);
            for (double eps : args.eps_list) {
                std::vector<BenchRun> runs(args.repeats);
                for (int r = 0; r < args.repeats; ++r) {
                    runs[r].eps = eps;
                    runs[r].seed = args.seed + run_index++;
                }
                std::atomic<int> next{0};
                auto worker = [&]() {
                    for (;;) {
                        const int r = next.fetch_add(1);
                        if (r >= args.repeats) return;
                        SolverConfig cfg;
                        cfg.eps = eps;
                        cfg.seed = runs[r].seed;
                        cfg.profile = args.profile;
                        SolutionReport rep = sublinear_perceptron(inst.m, cfg);
                        runs[r].entries_read = rep.entries_read;
                        runs[r].wall = rep.wall_time;
                        runs[r].achieved = rep.achieved_value;
                    }
                };
                std::vector<std::thread> pool;
                const int k = std::min<int>(threads, args.repeats);
                pool.reserve(k);
                for (int t = 0; t < k; ++t) pool.emplace_back(worker);
                for (auto& t : pool) t.join();

                auto med = [&](auto get) {
                    std::vector<double> v(runs.size());
                    for (std::size_t i = 0; i < runs.size(); ++i)
                        v[i] = get(runs[i]);
                    std::sort(v.begin(), v.end());
                    return v[v.size() / 2];
                };
                const double med_reads =
                    med([](const BenchRun& r) { return double(r.entries_read); });
                const double med_wall =
                    med([](const BenchRun& r) { return r.wall; });
                const double med_ach =
                    med([](const BenchRun& r) { return r.achieved; });
                const double lnn =
                    std::max(std::log(double(n)), std::log(2.0));
                const double ratio =
                    med_reads / ((double(n) + double(d)) * lnn / (eps * eps));
                const bool exceeds = med_reads >= double(inst.m.nnz());

                Obj cell;
                cell.integer("n", n)
                    .integer("d", d)
                    .num("eps", eps)
                    .integer("nnz", inst.m.nnz())
                    .integer("repeats", args.repeats)
                    .num("median_entries_read", med_reads)
                    .num("read_ratio", ratio)
                    .boolean("exceeds_nnz", exceeds)
                    .num("median_achieved", med_ach)
                    .num("median_wall_time", med_wall);
                if (!cells_json.empty()) cells_json += ",";
                cells_json += cell.done();

                if (!args.json_only)
                    std::fprintf(stderr,
                                 "%6zu %6zu %6.3f %12zu %14.0f %10.4f %8.3f%s\n",
                                 n, d, eps, inst.m.nnz(), med_reads, ratio,
                                 med_wall, exceeds ? "  [>= nnz!]" : "");
            }
        }
    }

    Obj out;
    const char* profile_name =
        args.profile == SolverConfig::Profile::paper
            ? "paper"
            : (args.profile == SolverConfig::Profile::tuned ? "tuned" : "bench");
    out.integer("schema_version", kSchemaVersion)
        .str("problem", "perceptron")
        .str("profile", profile_name)
        .integer("seed", args.seed)
        .raw("cells", "[" + cells_json + "]");
    std::printf("%s\n", out.done().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sublinear primal-dual optimization toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sublinopt 0.1.0");

    // gen ---------------------------------------------------------------
    GenArgs gen;
    std::uint64_t gen_seed = 0;
    bool quiet = false;
    CLI::App* cgen = app.add_subcommand("gen", "generate a test instance");
    cgen->add_option("--family", gen.spec.family,
                     "separable | planted | meb-hypercube | meb-known")
        ->required();
    cgen->add_option("-n,--n", gen.spec.n, "number of rows/points")->required();
    cgen->add_option("-d,--d", gen.spec.d, "dimension")->required();
    cgen->add_option("--sigma", gen.spec.sigma, "separable margin (default 0.3)");
    cgen->add_option("--tau", gen.spec.tau, "planted base margin (default 0.2)");
    cgen->add_option("--eps", gen.spec.eps,
                     "planted perturbation (default 0.1)");
    cgen->add_option("--radius", gen.spec.radius,
                     "meb-known radius (default 0.4)");
    cgen->add_flag("--yes", gen.spec.yes_branch, "planted YES branch");
    cgen->add_flag("--special", gen.spec.special_vertex,
                   "meb-hypercube special vertex");
    CLI::Option* gen_seed_opt =
        cgen->add_option("--seed", gen_seed, "rng seed (env SUBLINOPT_SEED)");
    cgen->add_option("-o,--out", gen.out_dir, "output directory")->required();
    cgen->add_flag("--json,--quiet", quiet, "suppress stderr diagnostics");

    // solve -------------------------------------------------------------
    SolveArgs solve;
    std::uint64_t solve_seed = 0;
    std::string solve_profile = "tuned";
    std::uint64_t T_override = 0;
    double eta_override = 0.0, alpha_override = 0.0;
    CLI::App* csolve = app.add_subcommand("solve", "run a sublinear solver");
    csolve
        ->add_option("--problem", solve.problem,
                     "perceptron | meb | qp | margin | game | "
                     "kernel-perceptron | kernel-meb")
        ->required();
    csolve->add_option("-i,--instance", solve.instance, "instance file")
        ->required();
    csolve->add_option("--eps", solve.cfg.eps, "target accuracy (default 0.1)");
    csolve->add_option("--delta", solve.cfg.delta,
                       "failure budget for estimators (default 0.05)");
    csolve->add_option("--profile", solve_profile,
                       "paper | tuned | bench (default tuned)");
    CLI::Option* solve_seed_opt = csolve->add_option(
        "--seed", solve_seed, "rng seed (env SUBLINOPT_SEED)");
    csolve->add_option("--T", T_override, "override the iteration count");
    csolve->add_option("--eta", eta_override, "override the learning rate");
    csolve->add_option("--alpha", alpha_override,
                       "override the primal update probability");
    csolve->add_flag("--skip", solve.cfg.skip_optimization,
                     "probabilistic primal skip (perceptron)");
    csolve->add_flag("--batch-mw", solve.cfg.batch_mw,
                     "epoch-batched weight updates (meb/qp)");
    csolve->add_flag("--las-vegas", solve.las_vegas,
                     "repeat until an exact certificate passes");
    csolve->add_option("--kernel", solve.kernel_text,
                       "poly:q=2 | gauss:kappa=1.5 (kernel problems)");
    csolve->add_option("--b-file", solve.b_file,
                       "per-row offsets for qp (one number per line)");
    csolve->add_flag("--json", solve.json_only, "suppress stderr diagnostics");

    // verify ------------------------------------------------------------
    VerifyArgs verify;
    CLI::App* cverify =
        app.add_subcommand("verify", "exactly re-check a solve report");
    cverify->add_option("-i,--instance", verify.instance, "instance file")
        ->required();
    cverify->add_option("-r,--report", verify.report_path, "solve JSON output")
        ->required();
    cverify->add_option("--b-file", verify.b_file, "qp offsets, if any");
    cverify->add_flag("--json", verify.json_only,
                      "suppress stderr diagnostics");

    // bench -------------------------------------------------------------
    BenchArgs bench;
    std::uint64_t bench_seed = 0;
    std::string bench_profile = "bench";
    CLI::App* cbench =
        app.add_subcommand("bench", "access-count scaling sweeps");
    cbench->add_option("--n-list", bench.n_list, "row counts")->delimiter(',');
    cbench->add_option("--d-list", bench.d_list, "dimensions")->delimiter(',');
    cbench->add_option("--eps-list", bench.eps_list, "accuracies")
        ->delimiter(',');
    cbench->add_option("--repeats", bench.repeats,
                       "runs per cell (default 3); run r uses seed + r");
    cbench->add_option("--threads", bench.threads,
                       "worker threads (default: min(cores, 8))");
    cbench->add_option("--profile", bench_profile,
                       "paper | tuned | bench (default bench)");
    CLI::Option* bench_seed_opt = cbench->add_option(
        "--seed", bench_seed, "base seed (env SUBLINOPT_SEED)");
    cbench->add_flag("--json", bench.json_only, "suppress the stderr table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        if (app.got_subcommand(cgen)) {
            gen.spec.seed = resolve_seed(gen_seed_opt->count() > 0, gen_seed);
            return run_gen(gen, quiet);
        }
        if (app.got_subcommand(csolve)) {
            solve.cfg.seed =
                resolve_seed(solve_seed_opt->count() > 0, solve_seed);
            solve.cfg.profile = parse_profile(solve_profile);
            if (T_override > 0) solve.cfg.T_override = T_override;
            if (eta_override > 0.0) solve.cfg.eta_override = eta_override;
            if (alpha_override > 0.0) solve.cfg.alpha_override = alpha_override;
            return run_solve(solve);
        }
        if (app.got_subcommand(cverify)) return run_verify(verify);
        if (app.got_subcommand(cbench)) {
            bench.seed = resolve_seed(bench_seed_opt->count() > 0, bench_seed);
            bench.profile = parse_profile(bench_profile);
            return run_bench(bench);
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const AmplificationError& e) {
        std::fprintf(stderr, "amplification failed: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
