#include "sublinopt/learners.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sublinopt {

namespace {

// Compensated accumulator; the audits sum ~T*n rounding-prone terms and the
// pass/fail margin can be thin on adversarial streams.
struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void project_to_ball(std::vector<double>& x) {
    double nrm = norm2(x);
    if (nrm > 1.0) {
        double inv = 1.0 / nrm;
        for (double& v : x) v *= inv;
    }
}

}  // namespace

MWState mw_init(std::size_t n, double eta, bool keep_history) {
    if (n == 0) throw std::invalid_argument("mw_init: n == 0");
    if (!(eta > 0.0)) throw std::invalid_argument("mw_init: eta must be positive");
    MWState s;
    s.w.assign(n, 1.0 / static_cast<double>(n));
    s.eta = eta;
    s.sum_w = 1.0;
    s.keep_history = keep_history;
    return s;
}

void mw_update(MWState& s, const std::vector<double>& q) {
    if (q.size() != s.w.size())
        throw std::invalid_argument("mw_update: cost vector size mismatch");
    const double eta = s.eta;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (std::abs(q[i]) * eta > 1.0 + 1e-12)
            throw std::invalid_argument(
                "mw_update: |q(" + std::to_string(i) + ")| = " + std::to_string(std::abs(q[i])) +
                " exceeds 1/eta; clip costs before updating");
    }

    if (s.keep_history) {
        s.hist_p.push_back(mw_probs(s));
        s.hist_q.push_back(q);
    }

    // Every multiplier is >= 3/4, so no single update can zero a weight; but
    // a long one-sided stream drives *relative* weights below what doubles
    // can hold (3^-t after t extreme rounds).  Saturate at the smallest
    // normal instead of underflowing to zero: a 1e-308 relative weight is
    // never sampled anyway, and downstream code may rely on positivity.
    constexpr double kFloor = 2.2250738585072014e-308;
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double z = eta * q[i];
        double mult = 1.0 - z + z * z;  // >= 3/4 whenever |z| <= 1
        s.w[i] = std::max(s.w[i] * mult, kFloor);
        total += s.w[i];
    }
    s.sum_w = total;
    ++s.updates;

    // Weights only ever shrink toward zero (multiplier <= 3 but typically < 1
    // on the played rows); rescale long before anything denormalizes.
    if (s.sum_w < 1e-150 || s.sum_w > 1e150) {
        double inv = 1.0 / s.sum_w;
        for (double& w : s.w) w = std::max(w * inv, kFloor);
        s.sum_w = 1.0;
    }
}

std::vector<double> mw_probs(const MWState& s) {
    std::vector<double> p(s.w.size());
    double total = 0.0;
    for (double w : s.w) total += w;
    double inv = 1.0 / total;
    for (std::size_t i = 0; i < s.w.size(); ++i) p[i] = s.w[i] * inv;
    return p;
}

std::size_t mw_sample(const MWState& s, Rng& rng) {
    const double* __restrict w = s.w.data();
    const std::size_t n = s.w.size();
    const double target = rng.uniform01() * s.sum_w;
    double cum = 0.0;
    // Inverse CDF in blocks of 16: whole blocks are summed with independent
    // partials (one compare per block, no serial add chain) and only the
    // block that crosses the target is walked element by element.  The
    // solvers draw once per iteration, so this scan is hot.
    std::size_t b = 0;
    for (; b + 16 <= n; b += 16) {
        double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
        for (std::size_t k = b; k < b + 16; k += 4) {
            t0 += w[k];
            t1 += w[k + 1];
            t2 += w[k + 2];
            t3 += w[k + 3];
        }
        const double bsum = ((t0 + t1) + (t2 + t3));
        if (target < cum + bsum) {
            for (std::size_t i = b; i < b + 16; ++i) {
                cum += w[i];
                if (target < cum) return i;
            }
            return b + 15;  // rounding slack inside the block
        }
        cum += bsum;
    }
    for (std::size_t i = b; i < n; ++i) {
        cum += w[i];
        if (target < cum) return i;
    }
    // sum_w drift can push target past the actual total; all weights are
    // positive, so the last index is a valid draw.
    return n - 1;
}

MWAudit mw_regret_audit(const std::vector<std::vector<double>>& hist_p,
                        const std::vector<std::vector<double>>& hist_q,
                        double eta) {
    if (hist_p.size() != hist_q.size())
        throw std::invalid_argument("mw_regret_audit: history length mismatch");
    MWAudit a;
    if (hist_p.empty()) {
        a.ok = true;
        return a;
    }
    const std::size_t n = hist_p.front().size();

    Kahan lhs, penalty;
    std::vector<Kahan> per_row(n);
    const double clip_floor = -1.0 / eta;
    for (std::size_t t = 0; t < hist_q.size(); ++t) {
        const auto& p = hist_p[t];
        const auto& q = hist_q[t];
        Kahan pq, pq2;
        for (std::size_t i = 0; i < n; ++i) {
            pq.add(p[i] * q[i]);
            pq2.add(p[i] * q[i] * q[i]);
            per_row[i].add(std::max(q[i], clip_floor));
        }
        lhs.add(pq.sum);
        penalty.add(pq2.sum);
    }
    double best = per_row[0].sum;
    for (std::size_t i = 1; i < n; ++i) best = std::min(best, per_row[i].sum);

    a.lhs = lhs.sum;
    a.rhs = best + std::log(static_cast<double>(n)) / eta + eta * penalty.sum;
    a.ok = a.lhs <= a.rhs + 1e-9 + 1e-12 * std::abs(a.rhs);
    return a;
}

MWAudit mw_regret_audit(const MWState& s) {
    if (!s.keep_history)
        throw std::logic_error("mw_regret_audit: state was built without history");
    return mw_regret_audit(s.hist_p, s.hist_q, s.eta);
}

OGDState ogd_init(std::size_t d, OgdVariant v, std::uint64_t horizon,
                  bool keep_history) {
    if (d == 0) throw std::invalid_argument("ogd_init: d == 0");
    if (horizon == 0) throw std::invalid_argument("ogd_init: horizon == 0");
    OGDState s;
    s.variant = v;
    s.horizon = horizon;
    s.y.assign(d, 0.0);
    s.x.assign(d, 0.0);
    s.keep_history = keep_history;
    return s;
}

void ogd_step(OGDState& s, const std::vector<double>& g) {
    if (g.size() != s.x.size())
        throw std::invalid_argument("ogd_step: gradient size mismatch");
    if (s.keep_history) {
        s.hist_g.push_back(g);
        s.hist_x.push_back(s.x);
    }
    const std::uint64_t t = s.t + 1;  // index of the loss being consumed
    switch (s.variant) {
        case OgdVariant::eager: {
            double step = 1.0 / std::sqrt(static_cast<double>(s.horizon));
            for (std::size_t j = 0; j < s.x.size(); ++j) s.y[j] = s.x[j] + step * g[j];
            s.x = s.y;
            project_to_ball(s.x);
            break;
        }
        case OgdVariant::lazy: {
            double step = 1.0 / std::sqrt(2.0 * static_cast<double>(s.horizon));
            for (std::size_t j = 0; j < s.x.size(); ++j) s.y[j] += step * g[j];
            s.x = s.y;
            project_to_ball(s.x);
            break;
        }
        case OgdVariant::strongly_convex: {
            // Follow-the-leader on sum_tau ||x - a_tau||^2: the leader is the
            // running mean of the points (g carries a_t, not a gradient).
            for (std::size_t j = 0; j < s.x.size(); ++j) s.y[j] += g[j];
            double inv = 1.0 / static_cast<double>(t);
            for (std::size_t j = 0; j < s.x.size(); ++j) s.x[j] = s.y[j] * inv;
            project_to_ball(s.x);
            break;
        }
        case OgdVariant::strongly_convex_eager: {
            double step = 1.0 / (s.H * static_cast<double>(t));
            for (std::size_t j = 0; j < s.x.size(); ++j) s.y[j] = s.x[j] - step * g[j];
            s.x = s.y;
            project_to_ball(s.x);
            break;
        }
    }
    s.t = t;
}

OGDAudit ogd_regret_audit(const OGDState& s, const LossSpec& spec) {
    if (!s.keep_history)
        throw std::logic_error("ogd_regret_audit: state was built without history");
    OGDAudit a;
    const std::size_t T = s.hist_g.size();
    if (T == 0) {
        a.ok = true;
        return a;
    }
    const std::size_t d = s.x.size();
    const double Tf = static_cast<double>(T);

    if (spec.form == LossSpec::Form::linear) {
        // Reward stream: realized = sum_t g_t . x_t, best fixed point earns
        // ||sum_t g_t|| over the unit ball.
        Kahan realized;
        std::vector<double> gsum(d, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            Kahan dot;
            for (std::size_t j = 0; j < d; ++j) {
                dot.add(s.hist_g[t][j] * s.hist_x[t][j]);
                gsum[j] += s.hist_g[t][j];
            }
            realized.add(dot.sum);
        }
        a.regret = norm2(gsum) - realized.sum;
        a.bound = (s.variant == OgdVariant::lazy) ? 2.0 * std::sqrt(2.0 * Tf)
                                                  : 2.0 * spec.G * std::sqrt(Tf);
    } else {
        // Point losses f_t(x) = ||x - a_t||^2.  The eager strongly-convex
        // variant logs gradients 2(x_t - a_t); recover the points first.
        std::vector<std::vector<double>> pts(T, std::vector<double>(d));
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t j = 0; j < d; ++j) {
                pts[t][j] = (s.variant == OgdVariant::strongly_convex_eager)
                                ? s.hist_x[t][j] - 0.5 * s.hist_g[t][j]
                                : s.hist_g[t][j];
            }
        }
        std::vector<double> mean(d, 0.0);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t j = 0; j < d; ++j) mean[j] += pts[t][j] / Tf;
        project_to_ball(mean);

        Kahan realized, best;
        for (std::size_t t = 0; t < T; ++t) {
            double fr = 0.0, fb = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double dr = s.hist_x[t][j] - pts[t][j];
                double db = mean[j] - pts[t][j];
                fr += dr * dr;
                fb += db * db;
            }
            realized.add(fr);
            best.add(fb);
        }
        a.regret = realized.sum - best.sum;
        double g2h = spec.G * spec.G / spec.H;
        a.bound = (s.variant == OgdVariant::strongly_convex_eager)
                      ? g2h * (1.0 + std::log(Tf))
                      : 2.0 * g2h * std::log(Tf);
    }
    a.ok = a.regret <= a.bound + 1e-9 + 1e-12 * std::abs(a.bound);
    return a;
}

bool SkipWrapper::step(const std::vector<double>& g, Rng& rng) {
    if (rng.uniform01() >= alpha_) return false;
    ogd_step(inner_, g);
    return true;
}

}  // namespace sublinopt
