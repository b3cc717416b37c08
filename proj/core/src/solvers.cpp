#include "sublinopt/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sublinopt/learners.hpp"
#include "sublinopt/sampling.hpp"

namespace sublinopt {

namespace {

// log n shows up in every schedule; floored at log 2 so n = 1 instances keep
// T >= 1 and eta > 0.
double ln_floor(std::size_t n) {
    return std::max(std::log(static_cast<double>(n)), std::log(2.0));
}

std::uint64_t ceil_u64(double v) {
    return static_cast<std::uint64_t>(std::ceil(std::max(v, 1.0)));
}

void validate_config(const SolverConfig& cfg, const char* who) {
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0))
        throw std::invalid_argument(std::string(who) + ": eps must be in (0,1)");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument(std::string(who) + ": delta must be in (0,1)");
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

// Column-major mirror for the per-iteration gather of A_(.)(j_t).  Row storage
// answers one (i, j) probe in O(1), but the hot loops read a whole column per
// iteration; for long runs we transpose once up front.  Building it touches
// every stored entry, which the caller accounts as loading overhead.  Dense
// instances get flat arrays (the gather then vectorizes), sparse ones get
// (row, value) lists.
struct ColMirror {
    bool built = false;
    bool dense = false;
    std::vector<std::vector<double>> dcols;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> scols;

    void build(const DataMatrix& m) {
        const std::size_t n = m.n_rows(), d = m.n_cols();
        dense = m.nnz() * 2 >= n * d && n * d <= std::size_t(5e7);
        if (dense) {
            dcols.assign(d, std::vector<double>(n, 0.0));
            for (std::size_t i = 0; i < n; ++i)
                m.for_each_in_row(i, [&](std::size_t j, double v) { dcols[j][i] = v; });
        } else {
            scols.assign(d, {});
            for (std::size_t i = 0; i < n; ++i)
                m.for_each_in_row(i, [&](std::size_t j, double v) {
                    scols[j].emplace_back(static_cast<std::uint32_t>(i), v);
                });
        }
        built = true;
    }
};

void finish_report(SolutionReport& r, const std::vector<std::uint64_t>& counts,
                   const AccessCounter& counter, std::uint64_t T,
                   const Timer& timer) {
    for (std::uint32_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0) r.p_bar_counts.emplace_back(i, counts[i]);
    r.iterations = T;
    r.entries_read = counter.entries_read;
    r.wall_time = timer.seconds();
}

// p_bar^T A accumulated over the support rows; exact and uncounted.
std::vector<double> dual_point(const DataMatrix& m, const SolutionReport& r) {
    std::vector<double> z(m.n_cols(), 0.0);
    double total = 0.0;
    for (const auto& [i, c] : r.p_bar_counts) total += static_cast<double>(c);
    for (const auto& [i, c] : r.p_bar_counts) {
        double pi = static_cast<double>(c) / total;
        m.for_each_in_row(i, [&](std::size_t j, double v) { z[j] += pi * v; });
    }
    return z;
}

}  // namespace

Schedule SolverConfig::perceptron_schedule(std::size_t n) const {
    validate_config(*this, "perceptron_schedule");
    const double lnn = ln_floor(n);
    Schedule s;
    double c_T = 0.0;
    switch (profile) {
        case Profile::paper: c_T = 200.0 * 200.0; break;
        case Profile::tuned: c_T = 10.0; break;
        case Profile::bench: c_T = 0.5; break;
    }
    s.T = T_override ? *T_override : ceil_u64(c_T * lnn / (eps * eps));
    double ratio = std::sqrt(lnn / static_cast<double>(s.T));
    s.eta = profile == Profile::paper ? ratio / 100.0 : ratio / 4.0;
    if (eta_override) s.eta = *eta_override;
    s.alpha = 1.0;
    return s;
}

Schedule SolverConfig::meb_schedule(std::size_t n) const {
    validate_config(*this, "meb_schedule");
    const double lnn = ln_floor(n);
    Schedule s;
    s.T = T_override ? *T_override : ceil_u64(40.0 * lnn / (eps * eps));
    s.eta = eta_override ? *eta_override
                         : std::sqrt(lnn / static_cast<double>(s.T));
    double a = std::log(static_cast<double>(s.T)) /
               std::sqrt(static_cast<double>(s.T) * lnn);
    s.alpha = alpha_override ? *alpha_override : std::min(1.0, a);
    if (!(s.alpha > 0.0)) s.alpha = 1.0;  // degenerate T = 1, 2 overrides
    return s;
}

SolverConfig::GameSchedule SolverConfig::game_schedule(std::size_t n,
                                                       std::size_t d) const {
    validate_config(*this, "game_schedule");
    const double lnn = ln_floor(n), lnd = ln_floor(d);
    GameSchedule g;
    g.T = T_override
              ? *T_override
              : ceil_u64(std::max(4.0 * lnd, 10.0 * lnn) / (eps * eps));
    g.eta_rows = std::sqrt(lnn / static_cast<double>(g.T));
    g.eta_cols = std::sqrt(lnd / static_cast<double>(g.T));
    if (eta_override) g.eta_rows = g.eta_cols = *eta_override;
    return g;
}

std::vector<double> SolutionReport::p_bar(std::size_t n) const {
    std::vector<double> p(n, 0.0);
    double total = 0.0;
    for (const auto& [i, c] : p_bar_counts) total += static_cast<double>(c);
    if (total == 0.0) return p;
    for (const auto& [i, c] : p_bar_counts)
        p[i] = static_cast<double>(c) / total;
    return p;
}

SolutionReport sublinear_perceptron(const DataMatrix& m, const SolverConfig& cfg) {
    validate_config(cfg, "sublinear_perceptron");
    if (m.n_rows() == 0)
        throw std::invalid_argument("sublinear_perceptron: empty instance");
    if (!m.finalized())
        throw std::invalid_argument("sublinear_perceptron: matrix not finalized");
    const std::size_t n = m.n_rows(), d = m.n_cols();
    const Schedule sched = cfg.perceptron_schedule(n);
    const std::uint64_t T = sched.T;
    const double eta = sched.eta, V = 1.0 / eta;

    Timer timer;
    AccessCounter counter;
    Rng rng(cfg.seed);

    ColMirror mirror;
    if (cfg.profile != SolverConfig::Profile::bench &&
        static_cast<double>(T) * static_cast<double>(n) >=
            20.0 * static_cast<double>(m.nnz())) {
        mirror.build(m);
        counter.add(m.nnz());
    }

    MWState mw = mw_init(n, eta);
    std::vector<double>& w = mw.w;
    std::vector<double> y(d, 0.0), xbar(d, 0.0);
    std::vector<std::uint64_t> counts(n, 0);
    // ||y||^2 is maintained incrementally across the rank-one row updates
    // (and refreshed periodically to cancel rounding drift) instead of
    // rebuilding a sampler prefix every iteration -- at full-constant
    // schedules T is in the tens of millions and the O(d) rebuild dominates.
    double ynorm2 = 0.0;

    // Primal step sizes: Alg.-1 line y += A_{i_t}/sqrt(2T); the skip variant
    // fires with probability 1/log T and steps by 1/(2 sqrt T).
    const double step_always = 1.0 / std::sqrt(2.0 * static_cast<double>(T));
    const double step_skip = 1.0 / (2.0 * std::sqrt(static_cast<double>(T)));
    const double fire_prob =
        1.0 / std::max(std::log(static_cast<double>(T)), 1.0);

    SolutionReport report;
    if (cfg.retain_trace) report.trace.reserve(std::min<std::uint64_t>(T, 1u << 20));

    std::uint64_t since_sum_refresh = 0, since_norm_refresh = 0;
    for (std::uint64_t t = 1; t <= T; ++t) {
        if (++since_norm_refresh >= 8192) {
            since_norm_refresh = 0;
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += y[j] * y[j];
            ynorm2 = acc;
        }
        if (ynorm2 < 0.0) ynorm2 = 0.0;
        const double s = std::max(1.0, std::sqrt(ynorm2));

        // x_t = y_t / s accumulates into x_bar before any update this round.
        const double inv_s = 1.0 / s;
        {
            const double* __restrict yc = y.data();
            double* __restrict xb = xbar.data();
            for (std::size_t j = 0; j < d; ++j) xb[j] += yc[j] * inv_s;
        }

        // Draw order is fixed for reproducibility: i_t, then j_t from the
        // pre-update primal, then the primal coin.
        const std::size_t i_t = mw_sample(mw, rng);
        ++counts[i_t];

        // j_t ~ y(j)^2 / ||y||^2 by direct inverse-CDF scan; coordinates
        // small enough to overflow ||x||^2/x(j) are skipped, matching
        // L2Sampler.  One uniform draw, no per-iteration prefix rebuild.
        // cum only advances on admissible coordinates, so the first crossing
        // is itself admissible and the scan needs no extra bookkeeping.
        std::optional<L2SampleIndex> jdraw;
        if (ynorm2 > 0.0) {
            const double target = rng.uniform01() * ynorm2;
            const double* __restrict yp = y.data();
            double cum = 0.0;
            std::size_t pick = d;
            for (std::size_t jj = 0; jj < d; ++jj) {
                const double yj = yp[jj];
                const double c2 = std::fabs(yj) < 1e-300 ? 0.0 : yj * yj;
                cum += c2;
                if (cum > target) {
                    pick = jj;
                    break;
                }
            }
            if (pick == d) {
                // drift can push the target past the scanned mass; the last
                // admissible coordinate is then the correct inverse-CDF answer
                for (std::size_t jj = d; jj-- > 0;)
                    if (std::fabs(yp[jj]) >= 1e-300) {
                        pick = jj;
                        break;
                    }
            }
            if (pick != d) jdraw = L2SampleIndex{pick, ynorm2 / y[pick]};
        }

        if (cfg.retain_trace)
            report.trace.push_back({static_cast<std::uint32_t>(i_t),
                                    jdraw ? static_cast<std::int64_t>(jdraw->j)
                                          : std::int64_t(-1)});

        bool fire = true;
        if (cfg.skip_optimization) fire = rng.uniform01() < fire_prob;
        if (fire) {
            const double step = cfg.skip_optimization ? step_skip : step_always;
            // ||y + s A_i||^2 = ||y||^2 + 2 s <A_i, y> + s^2 ||A_i||^2 keeps
            // the norm bookkeeping out of the update loop, whose serial
            // accumulation would otherwise bound the iteration rate.
            const double dot = m.dot_row_uncounted(i_t, y.data());
            if (const double* rv = m.dense_row_values(i_t)) {
                // step * 0 adds nothing, so streaming the flat row beats
                // the per-entry zero test on densified rows
                double* __restrict yp = y.data();
                for (std::size_t jj = 0; jj < d; ++jj) yp[jj] += step * rv[jj];
            } else {
                m.for_each_in_row(
                    i_t, [&](std::size_t j, double v) { y[j] += step * v; });
            }
            ynorm2 += step * (2.0 * dot + step * m.row_sq_norm(i_t));
            counter.add(m.row_nnz(i_t));
        }

        if (!jdraw) continue;  // x_t = 0: every estimate is exactly 0

        // vtil(i) = A_i(j) ||x||^2 / x(j); with x = y/s that is A_i(j) *
        // (ynorm2 / y(j)) / s, and the sampler precomputed the middle factor.
        const double scale = jdraw->inv_coord / s;
        const std::size_t j = jdraw->j;
        counter.add(n);

        auto apply = [&](std::size_t i, double a) {
            double v = clip(a * scale, V);
            double z = eta * v;
            double w_old = w[i];
            double w_new = w_old * (1.0 - z + z * z);
            w[i] = w_new;
            return w_new - w_old;
        };

        if (mirror.built && mirror.dense) {
            const double* __restrict col = mirror.dcols[j].data();
            double* __restrict wp = w.data();
            // Elementwise multiplier pass first (lanes are independent and
            // min/max is the branch-free clip, so this vectorizes), then a
            // fixed-association unrolled sum: a strict serial total would
            // pay one FP-add latency per weight and dominates the whole
            // solve at full-constant schedules.
            for (std::size_t i = 0; i < n; ++i) {
                const double z =
                    eta * std::min(V, std::max(-V, col[i] * scale));
                wp[i] *= 1.0 - z + z * z;
            }
            double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
            std::size_t i = 0;
            for (; i + 4 <= n; i += 4) {
                t0 += wp[i];
                t1 += wp[i + 1];
                t2 += wp[i + 2];
                t3 += wp[i + 3];
            }
            double rest = 0.0;
            for (; i < n; ++i) rest += wp[i];
            mw.sum_w = ((t0 + t1) + (t2 + t3)) + rest;
        } else if (mirror.built) {
            double delta_sum = 0.0;
            for (const auto& [i, a] : mirror.scols[j]) delta_sum += apply(i, a);
            mw.sum_w += delta_sum;
            if (++since_sum_refresh >= 4096) {
                since_sum_refresh = 0;
                double total = 0.0;
                for (double v : w) total += v;
                mw.sum_w = total;
            }
        } else {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double a = m.get_entry_uncounted(i, j);
                if (a != 0.0) apply(i, a);
                total += w[i];
            }
            mw.sum_w = total;
        }
        ++mw.updates;

        if (mw.sum_w < 1e-150 || mw.sum_w > 1e150) {
            double inv = 1.0 / mw.sum_w;
            for (double& v : w) v *= inv;
            mw.sum_w = 1.0;
        }
    }

    const double invT = 1.0 / static_cast<double>(T);
    report.x_bar.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) report.x_bar[j] = xbar[j] * invT;

    finish_report(report, counts, counter, T, timer);

    // Exact reporting scans (uncounted): the achieved margin and the dual
    // upper bound ||p_bar^T A|| that sandwiches sigma.
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        achieved = std::min(achieved, m.dot_row_uncounted(i, report.x_bar.data()));
    report.achieved_value = achieved;
    std::vector<double> z = dual_point(m, report);
    double z2 = 0.0;
    for (double v : z) z2 += v * v;
    report.dual_bound = std::sqrt(z2);
    report.wall_time = timer.seconds();
    return report;
}

SolutionReport sublinear_qp_simplex(const QPInstance& inst, const SolverConfig& cfg) {
    validate_config(cfg, "sublinear_qp_simplex");
    if (inst.A == nullptr)
        throw std::invalid_argument("sublinear_qp_simplex: null matrix");
    const DataMatrix& m = *inst.A;
    if (m.n_rows() == 0)
        throw std::invalid_argument("sublinear_qp_simplex: empty instance");
    if (!m.finalized())
        throw std::invalid_argument("sublinear_qp_simplex: matrix not finalized");
    const std::size_t n = m.n_rows(), d = m.n_cols();
    if (inst.b.size() != n)
        throw std::invalid_argument("sublinear_qp_simplex: b size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(inst.b[i]) > 1.0 + 1e-12)
            throw std::invalid_argument(
                "sublinear_qp_simplex: |b(" + std::to_string(i) + ")| > 1");
    const std::vector<double>& b = inst.b;

    const Schedule sched = cfg.meb_schedule(n);
    const std::uint64_t T = sched.T;
    const double eta = sched.eta, V = 1.0 / eta, alpha = sched.alpha;

    Timer timer;
    AccessCounter counter;
    Rng rng(cfg.seed);

    ColMirror mirror;
    if (cfg.profile != SolverConfig::Profile::bench &&
        static_cast<double>(T) * static_cast<double>(n) >=
            20.0 * static_cast<double>(m.nnz())) {
        mirror.build(m);
        counter.add(m.nnz());
    }

    MWState mw = mw_init(n, eta);
    std::vector<double>& w = mw.w;
    std::vector<double> y(d, 0.0), x(d, 0.0), xbar(d, 0.0), colbuf(n, 0.0);
    std::vector<std::uint64_t> counts(n, 0);
    std::uint64_t k = 0;  // alpha-coin successes so far; x = y / k
    L2Sampler sampler;
    bool x_dirty = true;

    SolutionReport report;
    if (cfg.retain_trace) report.trace.reserve(std::min<std::uint64_t>(T, 1u << 20));

    // One MW round with costs q(i) = b_i + coef*A_i(j) + base (QP-dual
    // orientation, multiplier 1 - eta q + eta^2 q^2), exponentiated by the
    // epoch length in batched mode.  j < 0 means the x = 0 round where the
    // estimate collapses to b_i exactly.
    auto mw_round = [&](std::int64_t j, double coef, double base,
                        std::uint64_t epoch_len) {
        const bool dense_col = mirror.built && mirror.dense && j >= 0;
        const double* col = dense_col ? mirror.dcols[j].data() : nullptr;
        if (!dense_col && j >= 0) {
            if (mirror.built) {
                for (const auto& [i, a] : mirror.scols[j]) colbuf[i] = a;
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    colbuf[i] = m.get_entry_uncounted(i, j);
            }
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double a = j < 0 ? 0.0 : (dense_col ? col[i] : colbuf[i]);
            double q = clip(b[i] + coef * a + base, V);
            double z = eta * q;
            double mult = 1.0 - z + z * z;
            w[i] *= epoch_len == 1
                        ? mult
                        : std::pow(mult, static_cast<double>(epoch_len));
            total += w[i];
        }
        mw.sum_w = total;
        ++mw.updates;
        if (!dense_col && j >= 0 && mirror.built)
            for (const auto& [i, a] : mirror.scols[j]) colbuf[i] = 0.0;
        if (mw.sum_w < 1e-150 || mw.sum_w > 1e150) {
            double inv = 1.0 / mw.sum_w;
            for (double& v : w) v *= inv;
            mw.sum_w = 1.0;
        }
    };

    std::uint64_t epoch_len = 0;  // batched mode: rounds since last MW update
    for (std::uint64_t t = 1; t <= T; ++t) {
        if (x_dirty) {
            if (k > 0) {
                double inv_k = 1.0 / static_cast<double>(k);
                for (std::size_t j = 0; j < d; ++j) x[j] = y[j] * inv_k;
            }
            sampler.assign(x);
            x_dirty = false;
        }
        const double xnorm2 = sampler.sq_norm();
        for (std::size_t j = 0; j < d; ++j) xbar[j] += x[j];

        const std::size_t i_t = mw_sample(mw, rng);
        ++counts[i_t];

        if (!cfg.batch_mw) {
            // q~(i) = b_i + 2 A_i(j) ||x||^2 / x(j) - ||x||^2, one l2-draw
            // shared by every row; the alpha coin fires the lazy primal.
            const auto jdraw = sampler.sample(rng);
            bool fire = rng.uniform01() < alpha;
            if (cfg.retain_trace)
                report.trace.push_back({static_cast<std::uint32_t>(i_t),
                                        jdraw ? static_cast<std::int64_t>(jdraw->j)
                                              : std::int64_t(-1)});
            if (fire) {
                m.for_each_in_row(i_t, [&](std::size_t j, double v) { y[j] += v; });
                counter.add(m.row_nnz(i_t));
                ++k;
                x_dirty = true;
            }
            if (jdraw) {
                counter.add(n);
                mw_round(static_cast<std::int64_t>(jdraw->j),
                         2.0 * jdraw->inv_coord, -xnorm2, 1);
            } else {
                mw_round(-1, 0.0, 0.0, 1);
            }
        } else {
            // Batched MW: weights freeze while x does, and the epoch's update
            // is applied once with the multiplier exponentiated by its length.
            ++epoch_len;
            bool fire = rng.uniform01() < alpha;
            bool flush = fire || t == T;
            std::int64_t traced_j = -1;
            if (flush) {
                const auto jdraw = sampler.sample(rng);
                if (jdraw) {
                    counter.add(n);
                    mw_round(static_cast<std::int64_t>(jdraw->j),
                             2.0 * jdraw->inv_coord, -xnorm2, epoch_len);
                    traced_j = static_cast<std::int64_t>(jdraw->j);
                } else {
                    mw_round(-1, 0.0, 0.0, epoch_len);
                }
                epoch_len = 0;
            }
            if (cfg.retain_trace)
                report.trace.push_back({static_cast<std::uint32_t>(i_t), traced_j});
            if (fire) {
                m.for_each_in_row(i_t, [&](std::size_t j, double v) { y[j] += v; });
                counter.add(m.row_nnz(i_t));
                ++k;
                x_dirty = true;
            }
        }
    }

    const double invT = 1.0 / static_cast<double>(T);
    report.x_bar.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) report.x_bar[j] = xbar[j] * invT;

    finish_report(report, counts, counter, T, timer);

    // Exact scans: achieved dual value min_i b_i + 2 A_i xbar - ||xbar||^2 and
    // the primal value at p_bar, which upper-bounds the optimum.
    double xbar2 = 0.0;
    for (double v : report.x_bar) xbar2 += v * v;
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double dot = m.dot_row_uncounted(i, report.x_bar.data());
        achieved = std::min(achieved, b[i] + 2.0 * dot - xbar2);
    }
    report.achieved_value = achieved;
    std::vector<double> z = dual_point(m, report);
    double z2 = 0.0;
    for (double v : z) z2 += v * v;
    double pb = 0.0;
    std::vector<double> pbar = report.p_bar(n);
    for (std::size_t i = 0; i < n; ++i) pb += pbar[i] * b[i];
    report.dual_bound = pb + z2;
    report.wall_time = timer.seconds();
    return report;
}

SolutionReport sublinear_meb(const DataMatrix& m, const SolverConfig& cfg) {
    if (m.n_rows() == 0)
        throw std::invalid_argument("sublinear_meb: empty instance");
    QPInstance inst;
    inst.A = &m;
    inst.b.resize(m.n_rows());
    for (std::size_t i = 0; i < m.n_rows(); ++i) inst.b[i] = -m.row_sq_norm(i);
    SolutionReport report = sublinear_qp_simplex(inst, cfg);
    // max_i ||xbar - A_i||^2 = -min_i (b_i + 2 A_i xbar - ||xbar||^2) with
    // b_i = -||A_i||^2; same for the dual lower bound g(p_bar).  Exact
    // negations of the engine's exact scans.
    report.achieved_value = -report.achieved_value;
    report.dual_bound = -report.dual_bound;
    return report;
}

SolutionReport margin_estimate(const DataMatrix& m, const SolverConfig& cfg) {
    QPInstance inst;
    inst.A = &m;
    inst.b.assign(m.n_rows(), 0.0);
    SolutionReport report = sublinear_qp_simplex(inst, cfg);
    if (report.achieved_value <= cfg.eps) {
        // nu <= eps: sigma^2 could be below eps and the rescaling certificate
        // says nothing useful.
        report.inconclusive = true;
        return report;
    }
    // Rescale xbar to x_hat = (min_i A_i xbar / ||xbar||^2) xbar and report
    // sigma_hat^2 = min_i 2 A_i x_hat - ||x_hat||^2 >= sigma^2 - eps.
    const std::size_t n = m.n_rows();
    double xbar2 = 0.0;
    for (double v : report.x_bar) xbar2 += v * v;
    double mu = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        mu = std::min(mu, m.dot_row_uncounted(i, report.x_bar.data()));
    const double beta = mu / xbar2;
    for (double& v : report.x_bar) v *= beta;

    double xhat2 = 0.0;
    for (double v : report.x_bar) xhat2 += v * v;
    double sigma_hat_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double dot = m.dot_row_uncounted(i, report.x_bar.data());
        sigma_hat_sq = std::min(sigma_hat_sq, 2.0 * dot - xhat2);
    }
    report.achieved_value = sigma_hat_sq;
    return report;
}

SolutionReport generic_primal_dual(const GenericProblem& prob, const SolverConfig& cfg) {
    validate_config(cfg, "generic_primal_dual");
    if (prob.n_costs == 0 || prob.dim == 0)
        throw std::invalid_argument("generic_primal_dual: empty problem");
    if (!prob.make_lra || !prob.sample_costs || !prob.cost_exact)
        throw std::invalid_argument("generic_primal_dual: missing handles");
    const std::size_t n = prob.n_costs, d = prob.dim;

    Schedule sched = cfg.perceptron_schedule(n);
    std::uint64_t T = std::max<std::uint64_t>(sched.T, prob.lra_T_eps);
    if (!cfg.eta_override) {
        double ratio = std::sqrt(ln_floor(n) / static_cast<double>(T));
        sched.eta = cfg.profile == SolverConfig::Profile::paper ? ratio / 100.0
                                                                : ratio / 4.0;
    }
    const double eta = sched.eta, V = 1.0 / eta;

    Timer timer;
    Rng rng(cfg.seed);

    // Smoke audit of the cost sampler at a fixed interior probe point: the
    // contract promises unbiased estimates with variance <= 1, and a grossly
    // misconfigured sampler (wrong normalization, wrong sign) is cheap to
    // catch before burning a full run.  Thresholds are deliberately loose so
    // a correct heavy-tailed sampler never trips them.
    {
        std::vector<double> probe(d, 0.0);
        if (prob.domain == GenericProblem::Domain::ball) {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                probe[j] = rng.normal();
                norm2 += probe[j] * probe[j];
            }
            double inv = 0.7 / std::max(std::sqrt(norm2), 1e-300);
            for (double& v : probe) v *= inv;
        } else {
            probe.assign(d, 1.0 / static_cast<double>(d));
        }
        const int R = 512;
        std::vector<double> vbuf(n), mean(n, 0.0), m2(n, 0.0);
        for (int r = 0; r < R; ++r) {
            prob.sample_costs(probe, rng, vbuf);
            if (vbuf.size() != n)
                throw std::invalid_argument(
                    "generic_primal_dual: sampler output size mismatch");
            for (std::size_t i = 0; i < n; ++i) {
                mean[i] += vbuf[i] / R;
                m2[i] += vbuf[i] * vbuf[i] / R;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double exact = prob.cost_exact(i, probe);
            double se = std::sqrt(std::max(m2[i] - mean[i] * mean[i], 0.0) / R);
            if (m2[i] > 4.0 || std::abs(mean[i] - exact) > std::max(0.25, 6.0 * se))
                throw std::invalid_argument(
                    "generic_primal_dual: cost sampler failed the "
                    "unbiasedness/variance audit at row " + std::to_string(i));
        }
    }

    auto lra = prob.make_lra(T, rng);
    MWState mw = mw_init(n, eta);
    std::vector<double>& w = mw.w;
    std::vector<double> xbar(d, 0.0), v(n);
    std::vector<std::uint64_t> counts(n, 0);

    SolutionReport report;
    if (cfg.retain_trace) report.trace.reserve(std::min<std::uint64_t>(T, 1u << 20));

    for (std::uint64_t t = 1; t <= T; ++t) {
        const std::vector<double>& x_t = lra.x();
        for (std::size_t j = 0; j < d; ++j) xbar[j] += x_t[j];

        const std::size_t i_t = mw_sample(mw, rng);
        ++counts[i_t];
        if (cfg.retain_trace)
            report.trace.push_back({static_cast<std::uint32_t>(i_t), -1});

        prob.sample_costs(x_t, rng, v);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double q = clip(v[i], V);
            double z = eta * q;
            w[i] *= 1.0 - z + z * z;
            total += w[i];
        }
        mw.sum_w = total;
        ++mw.updates;
        if (mw.sum_w < 1e-150 || mw.sum_w > 1e150) {
            double inv = 1.0 / mw.sum_w;
            for (double& u : w) u *= inv;
            mw.sum_w = 1.0;
        }

        lra.step(i_t);
    }

    const double invT = 1.0 / static_cast<double>(T);
    report.x_bar.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) report.x_bar[j] = xbar[j] * invT;

    AccessCounter none;  // cost closures own their reads; nothing counted here
    finish_report(report, counts, none, T, timer);
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        achieved = std::min(achieved, prob.cost_exact(i, report.x_bar));
    report.achieved_value = achieved;
    report.wall_time = timer.seconds();
    return report;
}

SolutionReport zero_sum_game(const DataMatrix& payoff, const SolverConfig& cfg) {
    validate_config(cfg, "zero_sum_game");
    if (payoff.n_rows() == 0 || payoff.n_cols() == 0)
        throw std::invalid_argument("zero_sum_game: empty payoff matrix");
    const std::size_t n = payoff.n_rows(), d = payoff.n_cols();
    for (std::size_t i = 0; i < n; ++i)
        payoff.for_each_in_row(i, [&](std::size_t j, double v) {
            if (std::abs(v) > 1.0 + 1e-12)
                throw std::invalid_argument(
                    "zero_sum_game: entry (" + std::to_string(i) + "," +
                    std::to_string(j) + ") outside [-1,1]");
        });

    // Internally targets eps/2 so the 2-eps' duality-gap guarantee lands the
    // reported bracket within eps of the value.
    SolverConfig half = cfg;
    half.eps = cfg.eps / 2.0;
    const SolverConfig::GameSchedule gs = half.game_schedule(n, d);
    const std::uint64_t T = gs.T;

    Timer timer;
    AccessCounter counter;
    Rng rng(cfg.seed);

    MWState rows = mw_init(n, gs.eta_rows);  // minimizer: 1 - eta v + (eta v)^2
    MWState cols = mw_init(d, gs.eta_cols);  // maximizer: 1 + eta r + (eta r)^2
    std::vector<double> xbar(d, 0.0), rbuf(d), vbuf(n);
    std::vector<std::uint64_t> counts(n, 0);

    SolutionReport report;
    if (cfg.retain_trace) report.trace.reserve(std::min<std::uint64_t>(T, 1u << 20));

    for (std::uint64_t t = 1; t <= T; ++t) {
        // x_t (the column distribution) joins the average before any update.
        const double inv_colsum = 1.0 / cols.sum_w;
        for (std::size_t j = 0; j < d; ++j) xbar[j] += cols.w[j] * inv_colsum;

        const std::size_t i_t = mw_sample(rows, rng);
        const std::size_t j_t = mw_sample(cols, rng);
        ++counts[i_t];
        if (cfg.retain_trace)
            report.trace.push_back({static_cast<std::uint32_t>(i_t),
                                    static_cast<std::int64_t>(j_t)});

        // Row player: v(i) = A(i, j_t), one column of reads; clipped at 1,
        // which is vacuous for entries in [-1,1] but kept for uniformity.
        counter.add(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double v = clip(payoff.get_entry_uncounted(i, j_t), 1.0);
            double z = rows.eta * v;
            rows.w[i] *= 1.0 - z + z * z;
            total += rows.w[i];
        }
        rows.sum_w = total;
        ++rows.updates;
        if (rows.sum_w < 1e-150 || rows.sum_w > 1e150) {
            double inv = 1.0 / rows.sum_w;
            for (double& v : rows.w) v *= inv;
            rows.sum_w = 1.0;
        }

        // Column player reads its sampled row exactly.
        counter.add(d);
        std::fill(rbuf.begin(), rbuf.end(), 0.0);
        payoff.for_each_in_row(i_t, [&](std::size_t j, double v) { rbuf[j] = v; });
        total = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double r = clip(rbuf[j], 1.0);
            double z = cols.eta * r;
            cols.w[j] *= 1.0 + z + z * z;
            total += cols.w[j];
        }
        cols.sum_w = total;
        ++cols.updates;
        if (cols.sum_w < 1e-150 || cols.sum_w > 1e150) {
            double inv = 1.0 / cols.sum_w;
            for (double& v : cols.w) v *= inv;
            cols.sum_w = 1.0;
        }
    }

    const double invT = 1.0 / static_cast<double>(T);
    report.x_bar.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) report.x_bar[j] = xbar[j] * invT;

    finish_report(report, counts, counter, T, timer);

    // Exact value bracket: min_i (A xbar)_i <= v* <= max_j (pbar^T A)_j.
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        achieved = std::min(achieved, payoff.dot_row_uncounted(i, report.x_bar.data()));
    report.achieved_value = achieved;
    std::vector<double> z = dual_point(payoff, report);
    double best = -std::numeric_limits<double>::infinity();
    for (double v : z) best = std::max(best, v);
    report.dual_bound = best;
    report.wall_time = timer.seconds();
    return report;
}

}  // namespace sublinopt
