#include "sublinopt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sublinopt {

void L2Sampler::assign(const double* x, std::size_t d) {
    prefix_.resize(d);
    coords_.resize(d);
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        // Coordinates this small would make ||x||^2/x(j) overflow; their
        // squares underflow to ~0 anyway, so drop them outright.
        const double c = std::fabs(x[j]) < 1e-300 ? 0.0 : x[j];
        coords_[j] = c;
        acc += c * c;
        prefix_[j] = acc;
    }
    total_ = acc;
}

std::optional<L2SampleIndex> L2Sampler::sample(Rng& rng) const {
    if (total_ <= 0.0) return std::nullopt;
    const double target = rng.uniform01() * total_;
    // First index with prefix > target; strict inequality skips zero-mass
    // coordinates (their prefix equals the previous one).
    auto it = std::upper_bound(prefix_.begin(), prefix_.end(), target);
    std::size_t j = static_cast<std::size_t>(it - prefix_.begin());
    if (j >= coords_.size()) j = coords_.size() - 1;  // target == total_ guard
    while (coords_[j] == 0.0 && j + 1 < coords_.size()) ++j;
    return L2SampleIndex{j, total_ / coords_[j]};
}

std::optional<L2SampleIndex> l2_sample(const std::vector<double>& x, Rng& rng) {
    L2Sampler s;
    s.assign(x);
    return s.sample(rng);
}

double l2_estimate_row(const DataMatrix& m, std::size_t i,
                       const L2SampleIndex& s, AccessCounter& c) {
    return m.get_entry(i, s.j, c) * s.inv_coord;
}

std::size_t l1_sample(const std::vector<double>& p, Rng& rng) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0)
            throw std::invalid_argument("l1_sample: negative weight");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("l1_sample: weights sum to " +
                                    std::to_string(sum) + ", not 1");
    const double target = rng.uniform01() * sum;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (target < acc) return i;
    }
    // Round-off tail: return the last positive-mass index.
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] > 0.0) return i;
    throw std::invalid_argument("l1_sample: all-zero weights");
}

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        double lo = *std::max_element(v.begin(), v.begin() + mid);
        return 0.5 * (lo + hi);
    }
    return hi;
}

}  // namespace

double estimate_dot(const std::vector<double>& u, const std::vector<double>& v,
                    double eps, double delta, Rng& rng) {
    if (eps <= 0.0 || eps >= 1.0 || delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("estimate_dot: eps, delta must be in (0,1)");
    L2Sampler sampler;
    sampler.assign(u);
    if (sampler.zero()) return 0.0;

    const std::size_t R =
        static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
    const std::size_t per_mean =
        static_cast<std::size_t>(std::ceil(1.0 / (eps * eps)));
    std::vector<double> means;
    means.reserve(R);
    for (std::size_t r = 0; r < R; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < per_mean; ++k) {
            const auto s = *sampler.sample(rng);
            acc += v[s.j] * s.inv_coord;
        }
        means.push_back(acc / static_cast<double>(per_mean));
    }
    return median_inplace(means);
}

double estimate_dot_row(const DataMatrix& m, std::size_t i,
                        const std::vector<double>& u, double eps, double delta,
                        Rng& rng, AccessCounter& c) {
    if (eps <= 0.0 || eps >= 1.0 || delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("estimate_dot: eps, delta must be in (0,1)");
    L2Sampler sampler;
    sampler.assign(u);
    if (sampler.zero()) return 0.0;

    const std::size_t R =
        static_cast<std::size_t>(std::ceil(8.0 * std::log(1.0 / delta)));
    const std::size_t per_mean =
        static_cast<std::size_t>(std::ceil(1.0 / (eps * eps)));
    std::vector<double> means;
    means.reserve(R);
    for (std::size_t r = 0; r < R; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < per_mean; ++k) {
            const auto s = *sampler.sample(rng);
            acc += m.get_entry(i, s.j, c) * s.inv_coord;
        }
        means.push_back(acc / static_cast<double>(per_mean));
    }
    return median_inplace(means);
}

}  // namespace sublinopt
