#pragma once

#include <cstdint>
#include <vector>

#include "sublinopt/matrix.hpp"
#include "sublinopt/rng.hpp"
#include "sublinopt/sampling.hpp"
#include "sublinopt/solvers.hpp"

namespace sublinopt {

// Kernel family and estimator parameters.
//
// polynomial: k(u,v) = (u . v)^q, estimated by the product of q independent
// l2-sample estimates (unbiased; variance <= (||u|| ||v||)^q <= 1).
//
// gaussian: k(u,v) = exp(-||u-v||^2 / 2 kappa^2)
//                  = exp(-(||u||^2+||v||^2)/2 kappa^2) * exp(u.v / kappa^2),
// estimated by drawing i ~ Poisson(gamma) with gamma = 1/kappa^2 and
// returning prefactor * e^gamma * prod of i independent X's, where each X
// averages c = ceil(1/kappa^2) l2-samples of u.v.  That single estimator has
// second moment <= prefactor^2 e^{gamma(1 + E[X^2])}; averaging `averaging`
// of them (default 4, calibrated for kappa >= 1) brings the variance under 1.
// Requires ||u||, ||v|| <= kappa/2.
struct KernelSpec {
    enum class Family { polynomial, gaussian };

    Family family = Family::polynomial;
    int q = 2;            // polynomial degree, >= 1
    double kappa = 1.0;   // gaussian bandwidth, > 0
    int averaging = 4;    // gaussian variance-reduction count

    double gamma() const { return 1.0 / (kappa * kappa); }
    int samples_per_factor() const;  // c = ceil(1/kappa^2)
};

// Poisson index truncation: beyond i = 200 the tail mass is < 1e-80 for
// gamma <= 4; the tail is folded into i = 0 to bound worst-case work.
inline constexpr int kPoissonTruncation = 200;

double kernel_exact(const KernelSpec& spec, const std::vector<double>& u,
                    const std::vector<double>& v);
double kernel_estimate(const KernelSpec& spec, const std::vector<double>& u,
                       const std::vector<double>& v, Rng& rng);

// Implicit Hilbert-space iterate y_t = sum_tau Psi(A_{i_tau}) / sqrt(2T):
// only the support indices are kept, Psi is never expanded.
struct KernelPrimalState {
    std::vector<std::uint32_t> support;
    double scale = 1.0;  // max{1, ||y_t|| estimate} in force this iteration
};

// Stepwise estimator of Y_t = 2T ||y_t||^2 / t^2 (the mean of the t^2
// pairwise kernel values over the support):
//
//   N_Y = ceil((8/3) log(1/delta) T^2 / eps^2), n_t = ceil(N_Y / t^2)
//   on support growth to size t, draw n_t clipped (at T/eps) estimates of the
//   new diagonal pair and of each cross pair (t,tau), (tau,t); earlier
//   epochs' sums are reused untouched, and Y~_t = sum_{tau<=t} Yhat_tau/t^2.
//
// |Y~_t - Y_t| <= eps/T with probability 1-delta, giving ||y_t|| within eps.
class NormEstimator {
  public:
    NormEstimator(const KernelSpec& spec, std::uint64_t T, double eps,
                  double delta);

    // Account the new support point (the support vector must already include
    // it); draws the (t,t), (t,tau), (tau,t) estimates.
    void extend(const DataMatrix& m, const std::vector<std::uint32_t>& support,
                Rng& rng);

    // sqrt(max(0, Y~_t) t^2 / 2T) for the current support size t; 0 for an
    // empty support.
    double y_norm_estimate() const;

    std::uint64_t estimate_calls() const { return calls_; }
    std::uint64_t budget_N_Y() const { return N_Y_; }

  private:
    const KernelSpec spec_;
    std::uint64_t T_;
    double clip_level_;
    std::uint64_t N_Y_;
    std::vector<double> y_hat_;  // Yhat_tau, tau = 1..t
    std::uint64_t calls_ = 0;
    // Dense copies + prebuilt l2-samplers of the support rows, so the n_t
    // repeated estimates per pair cost O(log d) each, not O(d).
    std::vector<std::vector<double>> rows_;
    std::vector<L2Sampler> samplers_;
    std::vector<double> sq_norms_;
};

// Estimate of <x_t, Psi(A_i)> = (1 / (max{1,||y_t||} sqrt(2T))) sum_tau
// k(A_{i_tau}, A_i), with per-row running sums of kernel estimates updated by
// one k~ call per row per support extension (O(n) space).  Expectation is
// within additive O(eps) of the truth (bias only from the norm estimate) and
// the variance is at most one.
class KernelEllTwo {
  public:
    KernelEllTwo(const KernelSpec& spec, const DataMatrix& m, std::uint64_t T,
                 double eps, double delta);

    // Append row i_t to the support: updates every row's running sum (n
    // estimator calls) and the norm estimator's new pair shell.
    void extend_support(std::uint32_t i_t, Rng& rng);

    // kernel_ell2 for row i at the current support: row_sums_[i] divided by
    // scale() * sqrt(2T).  Deterministic given the state -- the randomness
    // was spent when the support grew.
    double estimate(std::size_t i) const;

    double scale() const;  // max{1, ||y_t|| estimate}
    const std::vector<std::uint32_t>& support() const { return support_; }
    const NormEstimator& norm_estimator() const { return norm_est_; }

  private:
    const KernelSpec spec_;
    const DataMatrix& m_;
    std::uint64_t T_;
    std::vector<std::uint32_t> support_;
    std::vector<double> row_sums_;  // sum_tau k~(A_{i_tau}, A_i) per row
    std::vector<std::vector<double>> row_cache_;  // dense row copies
    std::vector<L2Sampler> samplers_;
    std::vector<double> sq_norms_;
    NormEstimator norm_est_;
};

// Kernelized perceptron: Alg.-1 structure with kernel_ell2 in place of the
// l2-sample estimate.  The report is in kernel form (support + coefficients);
// achieved_value is the exact kernel margin min_i sum_tau c_tau k(A_tau, A_i)
// recomputed with exact kernel evaluations.
SolutionReport sublinear_kernel_perceptron(const DataMatrix& m,
                                           const KernelSpec& spec,
                                           const SolverConfig& cfg);

// Kernelized MEB: Alg.-2 structure where the cost ||Psi(A_i) - x_t||^2 =
// k(A_i,A_i) - 2 <x_t, Psi(A_i)> + ||x_t||^2 is estimated from per-row
// running kernel sums over the fired support; ||x_t||^2 is tracked via the
// same running pairwise sums.  ||y_t|| is never needed (no ball projection),
// so there is no norm estimator.  achieved_value is the exact feature-space
// max squared distance of x_bar over all rows.
SolutionReport kernelized_meb(const DataMatrix& m, const KernelSpec& spec,
                              const SolverConfig& cfg);

// Exact Gram matrix (n x n) of the instance rows under the kernel; the
// desk-scale oracle input.
std::vector<std::vector<double>> gram_matrix(const KernelSpec& spec,
                                             const DataMatrix& m);

}  // namespace sublinopt
