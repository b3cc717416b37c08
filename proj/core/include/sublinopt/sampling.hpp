#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sublinopt/matrix.hpp"
#include "sublinopt/rng.hpp"

namespace sublinopt {

inline double clip(double z, double V) {
    return z > V ? V : (z < -V ? -V : z);
}

// Result of one l2-sample from a vector x: coordinate j drawn with
// probability x(j)^2/||x||^2 plus the precomputed scale ||x||^2/x(j), so that
// A_i(j) * inv_coord is an unbiased estimate of A_i . x.
struct L2SampleIndex {
    std::size_t j = 0;
    double inv_coord = 0.0;
};

// Prefix sums of squared coordinates with binary-search draws.  Rebuilt in
// O(d) whenever x changes; a draw costs O(log d).  Coordinates below 1e-300
// in magnitude are treated as zero so inv_coord cannot overflow.
class L2Sampler {
  public:
    void assign(const double* x, std::size_t d);
    void assign(const std::vector<double>& x) { assign(x.data(), x.size()); }

    bool zero() const { return total_ <= 0.0; }
    double sq_norm() const { return total_; }

    // nullopt is the zero-vector signal: x = 0 means <x, A_i> = 0 exactly,
    // and callers substitute estimate 0 (exact, zero variance).
    std::optional<L2SampleIndex> sample(Rng& rng) const;

  private:
    std::vector<double> prefix_;  // prefix_[j] = sum_{k<=j} x(k)^2
    std::vector<double> coords_;  // thresholded copy of x
    double total_ = 0.0;
};

// One-shot convenience wrapper over L2Sampler.
std::optional<L2SampleIndex> l2_sample(const std::vector<double>& x, Rng& rng);

// A_i(j) * ||x||^2 / x(j): the Alg-style unbiased row estimate, counted.
double l2_estimate_row(const DataMatrix& m, std::size_t i,
                       const L2SampleIndex& s, AccessCounter& c);

// Draw from explicit simplex weights.  Validates p >= 0 and sum(p) = 1 within
// 1e-9 (contract violation otherwise); O(n) per draw.
std::size_t l1_sample(const std::vector<double>& p, Rng& rng);

// Median of ceil(8 ln(1/delta)) means, each over ceil(1/eps^2) l2-sample
// estimates of u . v; satisfies Pr[|X - u.v| > eps] <= delta for unit-ball
// u, v.  u = 0 returns 0 exactly.
double estimate_dot(const std::vector<double>& u, const std::vector<double>& v,
                    double eps, double delta, Rng& rng);

// Same estimator with v = A_i, reading entries through the counter.
double estimate_dot_row(const DataMatrix& m, std::size_t i,
                        const std::vector<double>& u, double eps, double delta,
                        Rng& rng, AccessCounter& c);

}  // namespace sublinopt
