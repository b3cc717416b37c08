#include "sublinopt/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sublinopt/sampling.hpp"

namespace sublinopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- away-step Frank-Wolfe over the simplex ------------------------------
//
// Minimizes f(p) = p^T b + Q(p) where Q(p) = ||p^T A||^2 (matrix mode) or
// p^T K p (Gram mode).  Exact quadratic line search, away steps for linear
// convergence on these objectives, and a periodic from-scratch refresh of the
// cached quantities so certification never rides on drifted state.
//
// The stop callback sees the exact objective, the Frank-Wolfe duality gap
// (f(p) - min_p f <= gap), and min_i grad_i at the current iterate; it fires
// before the step, so the returned state is the one the callback accepted.

struct FwInfo {
    double f = 0.0;
    double gap = kInf;
    double min_grad = 0.0;
    std::uint64_t iter = 0;
};

struct FwOutcome {
    std::vector<double> p;
    std::vector<double> z;   // matrix mode: A^T p
    std::vector<double> Kp;  // Gram mode: K p
    double f = 0.0;
    std::uint64_t iterations = 0;
};

FwOutcome away_step_fw(const DataMatrix* A,
                       const std::vector<std::vector<double>>* K,
                       std::vector<double> b,
                       const std::function<bool(const FwInfo&)>& stop,
                       std::uint64_t max_iters = 200000) {
    const std::size_t n = A ? A->n_rows() : K->size();
    if (n == 0) throw std::invalid_argument("away_step_fw: empty instance");
    const std::size_t d = A ? A->n_cols() : 0;
    if (b.empty()) b.assign(n, 0.0);
    if (b.size() != n) throw std::invalid_argument("away_step_fw: b size mismatch");

    auto sq_norm_i = [&](std::size_t i) {
        return A ? A->row_sq_norm(i) : (*K)[i][i];
    };

    // Start at the best single vertex; keeps the active set small.
    std::size_t i0 = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (b[i] + sq_norm_i(i) < b[i0] + sq_norm_i(i0)) i0 = i;

    std::vector<double> p(n, 0.0), z, Kp, grad(n, 0.0);
    p[i0] = 1.0;
    if (A) {
        z.assign(d, 0.0);
        A->for_each_in_row(i0, [&](std::size_t j, double v) { z[j] = v; });
    } else {
        Kp = (*K)[i0];
    }
    double pb = b[i0];            // p . b
    double z2 = sq_norm_i(i0);    // quadratic part Q(p)
    double f = pb + z2;

    auto refresh = [&]() {
        double sum = 0.0;
        for (double v : p) sum += v;
        for (double& v : p) v /= sum;
        pb = 0.0;
        for (std::size_t i = 0; i < n; ++i) pb += p[i] * b[i];
        if (A) {
            std::fill(z.begin(), z.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (p[i] == 0.0) continue;
                A->for_each_in_row(i, [&](std::size_t j, double v) { z[j] += p[i] * v; });
            }
            z2 = 0.0;
            for (double v : z) z2 += v * v;
        } else {
            std::fill(Kp.begin(), Kp.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (p[i] == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) Kp[j] += p[i] * (*K)[i][j];
            }
            z2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) z2 += p[i] * Kp[i];
        }
        f = pb + z2;
    };

    for (std::uint64_t it = 0; it < max_iters; ++it) {
        if (it > 0 && it % 256 == 0) refresh();

        // grad_i = b_i + 2 A_i . z  (Gram: b_i + 2 (Kp)_i)
        std::size_t s = 0, a = 0;
        bool have_a = false;
        double gp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double Ai_z = A ? A->dot_row_uncounted(i, z.data()) : Kp[i];
            grad[i] = b[i] + 2.0 * Ai_z;
            if (grad[i] < grad[s]) s = i;
            if (p[i] > 0.0 && (!have_a || grad[i] > grad[a])) {
                a = i;
                have_a = true;
            }
            gp += p[i] * grad[i];
        }
        double gap_fw = gp - grad[s];

        FwInfo info{f, gap_fw, grad[s], it};
        if (stop(info)) {
            FwOutcome out;
            out.p = std::move(p);
            out.z = std::move(z);
            out.Kp = std::move(Kp);
            out.f = f;
            out.iterations = it;
            return out;
        }

        double gap_away = grad[a] - gp;
        bool away = gap_away > gap_fw;
        std::size_t v = away ? a : s;
        double gap_dir = away ? gap_away : gap_fw;
        double gmax = away ? std::min(p[a] / std::max(1.0 - p[a], 1e-300), 1e12) : 1.0;

        // f(p + gamma d) = f - gamma gap_dir + gamma^2 ||A_v - z||^2
        double Av_z = (grad[v] - b[v]) / 2.0;
        double q = sq_norm_i(v) - 2.0 * Av_z + z2;
        double gamma = (q > 0.0) ? std::min(gap_dir / (2.0 * q), gmax) : gmax;
        if (gamma <= 0.0) gamma = gmax;  // numerically stalled line search

        if (!away) {
            double keep = 1.0 - gamma;
            for (double& w : p) w *= keep;
            p[v] += gamma;
            if (A) {
                for (double& w : z) w *= keep;
                A->for_each_in_row(v, [&](std::size_t j, double val) { z[j] += gamma * val; });
            } else {
                for (std::size_t j = 0; j < n; ++j) Kp[j] = keep * Kp[j] + gamma * (*K)[v][j];
            }
            z2 = keep * keep * z2 + 2.0 * gamma * keep * Av_z + gamma * gamma * sq_norm_i(v);
            pb = keep * pb + gamma * b[v];
        } else {
            bool drop = gamma >= gmax * (1.0 - 1e-12);
            double grow = 1.0 + gamma;
            for (double& w : p) w *= grow;
            p[v] -= gamma;
            if (drop) p[v] = 0.0;
            if (A) {
                for (double& w : z) w *= grow;
                A->for_each_in_row(v, [&](std::size_t j, double val) { z[j] -= gamma * val; });
            } else {
                for (std::size_t j = 0; j < n; ++j) Kp[j] = grow * Kp[j] - gamma * (*K)[v][j];
            }
            z2 = grow * grow * z2 - 2.0 * gamma * grow * Av_z + gamma * gamma * sq_norm_i(v);
            pb = grow * pb - gamma * b[v];
        }
        f = pb + z2;
    }
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "away_step_fw: no convergence after %llu iterations",
                  static_cast<unsigned long long>(max_iters));
    throw std::runtime_error(msg);
}

// Margin bracket shared by the matrix and Gram margin oracles.  With b = 0
// the gradient is 2 A_i . z, so min_grad/2 / ||z|| is the exact margin of the
// feasible point z/||z|| -- a true lower bound -- while ||z|| upper-bounds
// sigma = min_p ||p^T A|| for every p.
struct MarginBracket {
    double lb = 0.0, ub = kInf;
    double tol;
    explicit MarginBracket(double t) : tol(t) {}
    bool operator()(const FwInfo& info) {
        double f = std::max(info.f, 0.0);
        double norm = std::sqrt(f);
        ub = std::min(ub, norm);
        lb = std::max(lb, std::sqrt(std::max(info.f - info.gap, 0.0)));
        if (norm > 0.0) lb = std::max(lb, info.min_grad / (2.0 * norm));
        lb = std::min(lb, ub);  // fp guard; both sides are certified
        return ub - lb <= tol;
    }
    double value() const { return (ub + lb) / 2.0; }
};

// Coordinate grid descent on max_i ||A_i - c||^2 for d <= 3: an independent
// cross-check that owes nothing to the Frank-Wolfe engine.
double grid_meb_sq_radius(const DataMatrix& m) {
    const std::size_t n = m.n_rows(), d = m.n_cols();
    std::vector<std::array<double, 3>> pts(n, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        m.for_each_in_row(i, [&](std::size_t j, double v) { pts[i][j] = v; });

    std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0}, c{0, 0, 0};
    for (std::size_t j = 0; j < d; ++j) {
        lo[j] = hi[j] = pts[0][j];
        for (std::size_t i = 1; i < n; ++i) {
            lo[j] = std::min(lo[j], pts[i][j]);
            hi[j] = std::max(hi[j], pts[i][j]);
        }
        c[j] = (lo[j] + hi[j]) / 2.0;
    }
    double hw = 0.0;
    for (std::size_t j = 0; j < d; ++j) hw = std::max(hw, (hi[j] - lo[j]) / 2.0);
    hw = std::max(hw, 1e-6);

    auto max_sq_dist = [&](const std::array<double, 3>& cc) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double t = pts[i][j] - cc[j];
                s += t * t;
            }
            worst = std::max(worst, s);
        }
        return worst;
    };

    double best = max_sq_dist(c);
    int span = 5;  // 11 grid values per axis
    for (int round = 0; round < 9; ++round) {
        double step = hw / span;
        std::array<double, 3> best_c = c;
        int kz = d > 2 ? span : 0, ky = d > 1 ? span : 0;
        for (int ix = -span; ix <= span; ++ix)
            for (int iy = -ky; iy <= ky; ++iy)
                for (int iz = -kz; iz <= kz; ++iz) {
                    std::array<double, 3> cc{c[0] + ix * step, c[1] + iy * step,
                                             c[2] + iz * step};
                    double v = max_sq_dist(cc);
                    if (v < best) {
                        best = v;
                        best_c = cc;
                    }
                }
        c = best_c;
        hw = step * 1.5;  // window still covers the continuum optimum
    }
    return best;
}

}  // namespace

Certificate verify_classifier(const DataMatrix& m, const std::vector<double>& x,
                              double sigma_claim, double eps, double delta,
                              Rng& rng) {
    if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("verify_classifier: need 0 < eps and 0 < delta < 1");
    AccessCounter counter;
    const std::size_t n = m.n_rows();
    double min_est = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        double est = estimate_dot_row(m, i, x, eps / 2.0,
                                      delta / static_cast<double>(n), rng, counter);
        min_est = std::min(min_est, est);
    }
    Certificate cert;
    cert.kind = Certificate::Kind::margin_verified;
    cert.claimed = sigma_claim;
    cert.verified_bound = min_est;
    cert.accepted = min_est >= sigma_claim - eps;
    cert.method = "sampled";
    cert.confidence = 1.0 - delta;
    cert.attempts = 1;
    return cert;
}

AmplifiedResult amplify(
    const std::function<SolutionReport(std::uint64_t run_seed)>& run,
    const std::function<Certificate(const SolutionReport&)>& verifier,
    double delta, std::uint64_t base_seed) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("amplify: delta must be in (0,1)");
    const std::uint64_t cap = static_cast<std::uint64_t>(
        std::ceil(20.0 * std::log2(1.0 / delta)));
    for (std::uint64_t k = 0; k < std::max<std::uint64_t>(cap, 1); ++k) {
        SolutionReport report = run(base_seed + k);
        Certificate cert = verifier(report);
        if (cert.accepted) {
            cert.attempts = k + 1;
            return {std::move(report), std::move(cert)};
        }
    }
    throw AmplificationError(
        "amplify: no candidate verified within the attempt budget");
}

AmplifiedResult las_vegas_classifier(const DataMatrix& m, const SolverConfig& cfg) {
    SolverConfig half = cfg;
    half.eps = cfg.eps / 2.0;
    const std::size_t n = m.n_rows(), d = m.n_cols();
    for (std::uint64_t k = 0; k < 300; ++k) {
        half.seed = cfg.seed + k;
        SolutionReport report = sublinear_perceptron(m, half);

        // Both sides of the acceptance test are exact scans, independent of
        // the solver's own bookkeeping.
        double min_margin = kInf;
        for (std::size_t i = 0; i < n; ++i)
            min_margin = std::min(min_margin, m.dot_row_uncounted(i, report.x_bar.data()));
        std::vector<double> pbar = report.p_bar(n);
        std::vector<double> z(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (pbar[i] == 0.0) continue;
            m.for_each_in_row(i, [&](std::size_t j, double v) { z[j] += pbar[i] * v; });
        }
        double dual = 0.0;
        for (double v : z) dual += v * v;
        dual = std::sqrt(dual);

        if (min_margin >= dual - cfg.eps) {
            Certificate cert;
            cert.kind = Certificate::Kind::las_vegas_exact;
            cert.accepted = true;
            cert.claimed = min_margin;
            cert.verified_bound = dual;
            cert.method = "exact-scan";
            cert.confidence = 1.0;
            cert.attempts = k + 1;
            return {std::move(report), std::move(cert)};
        }
    }
    throw AmplificationError(
        "las_vegas_classifier: exact test kept failing; this indicates a bug, "
        "not bad luck");
}

AmplifiedResult las_vegas_meb(const DataMatrix& m, const SolverConfig& cfg) {
    SolverConfig half = cfg;
    half.eps = cfg.eps / 2.0;
    const std::size_t n = m.n_rows(), d = m.n_cols();
    for (std::uint64_t k = 0; k < 300; ++k) {
        half.seed = cfg.seed + k;
        SolutionReport report = sublinear_meb(m, half);

        double x2 = 0.0;
        for (double v : report.x_bar) x2 += v * v;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dot = m.dot_row_uncounted(i, report.x_bar.data());
            worst = std::max(worst, x2 - 2.0 * dot + m.row_sq_norm(i));
        }
        // g(p) = sum_i p_i ||A_i||^2 - ||p^T A||^2 <= r*^2 for every p.
        std::vector<double> pbar = report.p_bar(n);
        std::vector<double> z(d, 0.0);
        double diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pbar[i] == 0.0) continue;
            diag += pbar[i] * m.row_sq_norm(i);
            m.for_each_in_row(i, [&](std::size_t j, double v) { z[j] += pbar[i] * v; });
        }
        double z2 = 0.0;
        for (double v : z) z2 += v * v;
        double dual_lb = diag - z2;

        if (worst <= dual_lb + cfg.eps) {
            Certificate cert;
            cert.kind = Certificate::Kind::las_vegas_exact;
            cert.accepted = true;
            cert.claimed = worst;
            cert.verified_bound = dual_lb;
            cert.method = "exact-scan";
            cert.confidence = 1.0;
            cert.attempts = k + 1;
            return {std::move(report), std::move(cert)};
        }
    }
    throw AmplificationError(
        "las_vegas_meb: exact test kept failing; this indicates a bug, not bad "
        "luck");
}

double exact_margin(const DataMatrix& m, double tol) {
    MarginBracket bracket(tol);
    away_step_fw(&m, nullptr, {}, std::ref(bracket));
    return bracket.value();
}

double exact_margin_gram(const std::vector<std::vector<double>>& K, double tol) {
    MarginBracket bracket(tol);
    away_step_fw(nullptr, &K, {}, std::ref(bracket));
    return bracket.value();
}

MebResult exact_meb(const DataMatrix& m, double tol) {
    const std::size_t n = m.n_rows();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = -m.row_sq_norm(i);

    // Stop on the current FW gap: the scan radius at the very same iterate
    // then satisfies r_hat^2 <= r*^2 + gap.
    FwOutcome out = away_step_fw(
        &m, nullptr, std::move(b),
        [tol](const FwInfo& info) { return info.gap <= tol; });

    MebResult res;
    res.center = std::move(out.z);
    double c2 = 0.0;
    for (double v : res.center) c2 += v * v;
    for (std::size_t i = 0; i < n; ++i) {
        double dot = m.dot_row_uncounted(i, res.center.data());
        res.sq_radius = std::max(res.sq_radius, c2 - 2.0 * dot + m.row_sq_norm(i));
    }

    if (m.n_cols() <= 3 && n <= 2000) {
        double grid = grid_meb_sq_radius(m);
        if (std::abs(grid - res.sq_radius) > 5e-3)
            throw std::logic_error("exact_meb: grid cross-check disagrees");
    }
    return res;
}

double exact_meb_sq_radius_gram(const std::vector<std::vector<double>>& K,
                                double tol) {
    const std::size_t n = K.size();
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = -K[i][i];
    FwOutcome out = away_step_fw(
        nullptr, &K, std::move(b),
        [tol](const FwInfo& info) { return info.gap <= tol; });

    double pKp = 0.0;
    for (std::size_t i = 0; i < n; ++i) pKp += out.p[i] * out.Kp[i];
    double worst = -kInf;
    for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, K[i][i] - 2.0 * out.Kp[i] + pKp);
    return worst;
}

double exact_qp_value(const DataMatrix& m, const std::vector<double>& b,
                      double tol) {
    double lb = -kInf;
    FwOutcome out = away_step_fw(&m, nullptr, b, [&lb, tol](const FwInfo& info) {
        lb = std::max(lb, info.f - info.gap);
        return info.f - lb <= tol;
    });
    return (out.f + lb) / 2.0;
}

double exact_game_value(const DataMatrix& payoff, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("exact_game_value: tol <= 0");
    const std::size_t n = payoff.n_rows(), d = payoff.n_cols();

    std::vector<std::vector<double>> M(n, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        payoff.for_each_in_row(i, [&](std::size_t j, double v) { M[i][j] = v; });

    // Optimistic exponential-weights self-play; the average strategies close
    // the exact duality gap at roughly O(1/t), and the returned bracket is
    // certified by full min/max scans regardless of the rate.
    const double eta = 0.125;
    std::vector<double> Lrow(n, 0.0), last_l(n, 0.0);  // row cumulative losses
    std::vector<double> Rcol(d, 0.0), last_r(d, 0.0);  // col cumulative rewards
    std::vector<double> p(n), x(d), p_avg(n, 0.0), x_avg(d, 0.0);
    std::vector<double> lcur(n), rcur(d);

    const std::uint64_t max_iters = 3000000;
    std::uint64_t next_check = 32;
    for (std::uint64_t t = 1; t <= max_iters; ++t) {
        double best = kInf;
        for (std::size_t i = 0; i < n; ++i) best = std::min(best, Lrow[i] + last_l[i]);
        double zp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = std::exp(-eta * (Lrow[i] + last_l[i] - best));
            zp += p[i];
        }
        for (std::size_t i = 0; i < n; ++i) p[i] /= zp;

        best = -kInf;
        for (std::size_t j = 0; j < d; ++j) best = std::max(best, Rcol[j] + last_r[j]);
        double zx = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = std::exp(eta * (Rcol[j] + last_r[j] - best));
            zx += x[j];
        }
        for (std::size_t j = 0; j < d; ++j) x[j] /= zx;

        std::fill(lcur.begin(), lcur.end(), 0.0);
        std::fill(rcur.begin(), rcur.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& row = M[i];
            double li = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                li += row[j] * x[j];
                rcur[j] += p[i] * row[j];
            }
            lcur[i] = li;
        }
        for (std::size_t i = 0; i < n; ++i) {
            Lrow[i] += lcur[i];
            last_l[i] = lcur[i];
            p_avg[i] += p[i];
        }
        for (std::size_t j = 0; j < d; ++j) {
            Rcol[j] += rcur[j];
            last_r[j] = rcur[j];
            x_avg[j] += x[j];
        }

        if (t == next_check) {
            next_check = t + std::max<std::uint64_t>(32, t / 8);
            double v_lb = kInf, v_ub = -kInf;
            for (std::size_t i = 0; i < n; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += M[i][j] * x_avg[j];
                v_lb = std::min(v_lb, dot / static_cast<double>(t));
            }
            for (std::size_t j = 0; j < d; ++j) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += p_avg[i] * M[i][j];
                v_ub = std::max(v_ub, dot / static_cast<double>(t));
            }
            if (v_ub - v_lb <= tol) return (v_ub + v_lb) / 2.0;
        }
    }
    throw std::runtime_error("exact_game_value: self-play did not converge");
}

}  // namespace sublinopt
