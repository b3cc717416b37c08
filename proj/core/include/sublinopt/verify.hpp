#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sublinopt/matrix.hpp"
#include "sublinopt/rng.hpp"
#include "sublinopt/solvers.hpp"

namespace sublinopt {

struct Certificate {
    enum class Kind { margin_verified, meb_verified, las_vegas_exact };

    Kind kind = Kind::margin_verified;
    bool accepted = false;
    double claimed = 0.0;
    double verified_bound = 0.0;   // min estimate / exact scan value
    std::string method;            // "sampled" or "exact-scan"
    double confidence = 1.0;       // 1 - delta; exactly 1 for exact scans
    std::uint64_t attempts = 1;    // amplification / Las Vegas repetitions
};

// Sampled margin verification: estimate_dot per row at failure budget
// delta/n (union bound); accepts iff every estimate clears sigma_claim - eps.
// Wrong answers (either direction, when the truth is eps-separated from the
// claim) happen with probability <= delta.  O(d + n eps^-2 log(n/delta)).
Certificate verify_classifier(const DataMatrix& m, const std::vector<double>& x,
                              double sigma_claim, double eps, double delta,
                              Rng& rng);

// Generate-and-verify amplification: run the 1/2-success solver, verify the
// candidate, repeat until a candidate verifies.  Overall failure <= delta;
// expected attempts O(1).  Throws AmplificationError past the attempt cap
// ceil(20 log2(1/delta)).
struct AmplificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AmplifiedResult {
    SolutionReport report;
    Certificate certificate;
};

AmplifiedResult amplify(
    const std::function<SolutionReport(std::uint64_t run_seed)>& run,
    const std::function<Certificate(const SolutionReport&)>& verifier,
    double delta, std::uint64_t base_seed);

// Las Vegas classification: repeat eps/2 perceptron runs until the exact test
// min_i A_i x_bar >= ||p_bar^T A|| - eps passes (both sides full exact scans,
// O(M) per check).  The returned certificate can never be wrong; the loop is
// unbounded by contract, only the attempt count is random.
AmplifiedResult las_vegas_classifier(const DataMatrix& m, const SolverConfig& cfg);

// Las Vegas MEB: exact distance scan against the candidate center plus the
// dual lower bound g(p_bar) = sum p ||A_i||^2 - ||p_bar^T A||^2 <= r*^2;
// certified when max_i ||x_bar - A_i||^2 <= g(p_bar) + eps.
AmplifiedResult las_vegas_meb(const DataMatrix& m, const SolverConfig& cfg);

// Independent exact oracles (desk scale, n*d <= 1e7).  One deterministic
// away-step Frank-Wolfe engine minimizing p^T b + ||p^T A||^2 over the
// simplex powers all of them: exact quadratic line search, duality-gap
// stopping, and no code shared with the sampling paths.
//
// exact_margin: sigma = max_{||x||<=1} min_i A_i x, certified within tol by
// the bracket min_i A_i (z/||z||) <= sigma <= ||z|| around z = p^T A.
double exact_margin(const DataMatrix& m, double tol = 1e-6);

struct MebResult {
    std::vector<double> center;
    double sq_radius = 0.0;
};
// exact_meb: center and squared radius within additive tol, cross-checked by
// dense grid refinement for d <= 3.
MebResult exact_meb(const DataMatrix& m, double tol = 1e-6);

// Gram-mode variants for the kernel solvers' acceptance checks: the same
// engine run on f(p) = p^T b + p^T K p for a precomputed Gram matrix K.
double exact_margin_gram(const std::vector<std::vector<double>>& K,
                         double tol = 1e-6);
double exact_meb_sq_radius_gram(const std::vector<std::vector<double>>& K,
                                double tol = 1e-6);

// Exact simplex-QP value min_p p^T b + ||p^T A||^2 (the primal the sublinear
// QP solver approximates in Wolfe-dual form).
double exact_qp_value(const DataMatrix& m, const std::vector<double>& b,
                      double tol = 1e-6);

// Deterministic zero-sum oracle: exponential-weights self-play with exact
// payoff gradients on both sides, stopped when the exact duality gap of the
// average strategies is <= tol.  Returns the certified game value bracket
// midpoint.
double exact_game_value(const DataMatrix& payoff, double tol);

}  // namespace sublinopt
