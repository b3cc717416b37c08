#pragma once

#include <cstdint>
#include <vector>

#include "sublinopt/rng.hpp"

namespace sublinopt {

// Loss-class parameters for the regret audits.  For the MEB point losses
// f_t(x) = ||x - a_t||^2 over the unit ball: G <= 2 and H = 2.
struct LossSpec {
    enum class Form { linear, shifted_quadratic };
    double G = 1.0;
    double H = 0.0;
    Form form = Form::linear;
};

// Variance-tolerant multiplicative weights: w_{t+1}(i) = w_t(i) * (1 - eta
// q(i) + eta^2 q(i)^2).  The quadratic multiplier stays >= 3/4 for |eta q| <=
// 1, which is why the clipped high-variance estimates are admissible.
struct MWState {
    std::vector<double> w;
    double eta = 0.0;
    double sum_w = 0.0;
    std::uint64_t updates = 0;

    // Optional audit log (p_t before the update, q_t).  Off in the solver hot
    // loops -- a paper-constant perceptron run would log ~10^7 x n doubles.
    bool keep_history = false;
    std::vector<std::vector<double>> hist_p, hist_q;
};

MWState mw_init(std::size_t n, double eta, bool keep_history = false);

// Applies the multiplier; validates |q(i)| <= 1/eta (throws on violation:
// the multiplier could go nonpositive), asserts weight positivity, and
// renormalizes sum_w back to 1 whenever it leaves [1e-150, 1e150] (p is
// scale invariant, so trajectories are unaffected).
void mw_update(MWState& s, const std::vector<double>& q);

// p = w / ||w||_1 materialized (tests and small callers).
std::vector<double> mw_probs(const MWState& s);

// Draw i ~ p without materializing p: one uniform, prefix scan over w.
std::size_t mw_sample(const MWState& s, Rng& rng);

// lhs = sum_t p_t . q_t
// rhs = min_i sum_t max{q_t(i), -1/eta} + log(n)/eta + eta sum_t p_t . q_t^2
// The inequality lhs <= rhs holds deterministically for every admissible loss
// sequence; both sides are evaluated with compensated summation so T ~ 1e5
// histories do not produce spurious failures.
struct MWAudit {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};
MWAudit mw_regret_audit(const std::vector<std::vector<double>>& hist_p,
                        const std::vector<std::vector<double>>& hist_q,
                        double eta);
MWAudit mw_regret_audit(const MWState& s);

// Online gradient descent over the unit ball, reward-maximization
// orientation (the algorithms feed rows as gradients and chase the margin).
//
//   eager:            y = x_t + g/sqrt(T),    x_{t+1} = y/max{1,||y||}
//   lazy:             y += g/sqrt(2T),        x_{t+1} = y/max{1,||y||}
//   strongly_convex:  follow-the-leader on ||x - a||^2: x = mean of points
//                     seen so far (g carries the point a_t)
//   strongly_convex_eager: x_{t+1} = proj(x_t - grad/(H t)); stated in the
//                     analysis but unused by any solver, kept as an audit
//                     target only
enum class OgdVariant { eager, lazy, strongly_convex, strongly_convex_eager };

struct OGDState {
    OgdVariant variant = OgdVariant::lazy;
    std::uint64_t horizon = 1;  // T in the step-size schedules
    double H = 2.0;             // strong-convexity modulus (eager sc variant)
    std::vector<double> y;      // accumulator
    std::vector<double> x;      // projected iterate, ||x|| <= 1
    std::uint64_t t = 0;        // applied updates

    bool keep_history = false;
    std::vector<std::vector<double>> hist_g;  // gradient/point stream
    std::vector<std::vector<double>> hist_x;  // iterate used at each step
};

OGDState ogd_init(std::size_t d, OgdVariant v, std::uint64_t horizon,
                  bool keep_history = false);
void ogd_step(OGDState& s, const std::vector<double>& g);

// Realized regret against the exact best fixed comparator:
//   linear losses: x* = sum(g) / max{1, ||sum(g)||}
//   MEB losses:    x* = mean of the points
// checked against the variant's bound: eager 2 c sqrt(T), lazy 2 sqrt(2T),
// strongly convex (2 G^2/H) log T, eager strongly convex (G^2/H)(1 + log T).
struct OGDAudit {
    double regret = 0.0;
    double bound = 0.0;
    bool ok = false;
};
OGDAudit ogd_regret_audit(const OGDState& s, const LossSpec& spec);

// Probabilistic-skip wrapper around a strongly-convex learner: each step the
// update is applied with probability alpha, otherwise the state is untouched.
// Expected regret inflates by 1/alpha.
class SkipWrapper {
  public:
    SkipWrapper(OGDState inner, double alpha) : inner_(std::move(inner)), alpha_(alpha) {}

    // Returns true when the coin fired and the inner learner advanced.
    bool step(const std::vector<double>& g, Rng& rng);

    const OGDState& inner() const { return inner_; }
    std::uint64_t applied() const { return inner_.t; }

  private:
    OGDState inner_;
    double alpha_;
};

}  // namespace sublinopt
