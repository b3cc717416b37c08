#include "sublinopt/generate.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sublinopt/rng.hpp"

namespace sublinopt {

namespace {

std::vector<double> random_unit(std::size_t d, Rng& rng) {
    std::vector<double> v(d);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            v[j] = rng.normal();
            norm2 += v[j] * v[j];
        }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

// Unit vector orthogonal to the unit vector x (Gram-Schmidt on a fresh
// Gaussian; rejection on near-parallel draws).
std::vector<double> random_unit_orthogonal(const std::vector<double>& x, Rng& rng) {
    const std::size_t d = x.size();
    for (;;) {
        std::vector<double> u = random_unit(d, rng);
        double proj = 0.0;
        for (std::size_t j = 0; j < d; ++j) proj += u[j] * x[j];
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            u[j] -= proj * x[j];
            norm2 += u[j] * u[j];
        }
        if (norm2 < 1e-12) continue;
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : u) v *= inv;
        return u;
    }
}

// In-place Fisher-Yates; std::shuffle's draw pattern is implementation
// defined, this one is pinned by the Rng contract.
template <typename T>
void shuffle_rows(std::vector<T>& rows, Rng& rng) {
    for (std::size_t i = rows.size(); i > 1; --i)
        std::swap(rows[i - 1], rows[rng.uniform_below(i)]);
}

DataMatrix from_dense_rows(const std::vector<std::vector<double>>& rows,
                           std::size_t d) {
    DataMatrix m(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (rows[i][j] != 0.0) m.set_entry(i, j, rows[i][j]);
    m.finalize();
    return m;
}

}  // namespace

SeparableInstance gen_separable(std::size_t n, std::size_t d, double sigma,
                                std::uint64_t seed) {
    if (n < 2 || d < 2)
        throw std::invalid_argument("gen_separable: need n >= 2 and d >= 2");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("gen_separable: sigma must be in (0,1)");
    Rng rng(seed);
    std::vector<double> xs = random_unit(d, rng);
    const double rest = std::sqrt(1.0 - sigma * sigma);

    std::vector<std::vector<double>> rows(n, std::vector<double>(d, 0.0));
    auto fill_row = [&](std::size_t i, const std::vector<double>& u, double su) {
        for (std::size_t j = 0; j < d; ++j)
            rows[i][j] = sigma * xs[j] + su * rest * u[j];
    };
    // Rows 0 and 1 share u with opposite signs, which caps the margin at
    // sigma for every direction; the remaining rows draw fresh u's.
    std::vector<double> u0 = random_unit_orthogonal(xs, rng);
    fill_row(0, u0, +1.0);
    fill_row(1, u0, -1.0);
    for (std::size_t i = 2; i < n; ++i)
        fill_row(i, random_unit_orthogonal(xs, rng), +1.0);

    SeparableInstance inst;
    inst.m = from_dense_rows(rows, d);
    inst.x_star = std::move(xs);
    inst.sigma_exact = sigma;
    return inst;
}

DataMatrix gen_planted_classification(std::size_t n, std::size_t d, double tau,
                                      double eps, bool yes_branch,
                                      std::uint64_t seed) {
    if (n < 2 || d < 3)
        throw std::invalid_argument(
            "gen_planted_classification: need n >= 2 and d >= 3");
    if (!(tau > 0.0) || !(eps > 0.0))
        throw std::invalid_argument(
            "gen_planted_classification: need tau > 0 and eps > 0");
    const double zeta = 1.0 / (static_cast<double>(d) * d * d);
    const double b_sq = 1.0 - tau * tau - eps * tau * tau -
                        static_cast<double>(d - 3) * zeta * zeta;
    const double bulk = 1.0 - (1.0 + eps) * (1.0 + eps) * tau * tau;
    if (b_sq <= 0.0 || bulk < 0.0)
        throw std::invalid_argument(
            "gen_planted_classification: tau/eps leave no norm budget");
    const double B = std::sqrt(b_sq);

    Rng rng(seed);
    const std::size_t j_star = 2 + rng.uniform_below(d - 2);

    std::vector<std::vector<double>> rows(n, std::vector<double>(d, 0.0));
    // The planted pair: identical first coordinate, everything else negated,
    // except that the hidden column agrees on the YES branch.
    rows[0][0] = tau;
    rows[0][1] = B;
    for (std::size_t j = 2; j < d; ++j) rows[0][j] = zeta;
    rows[0][j_star] = std::sqrt(eps) * tau;
    rows[1][0] = tau;
    rows[1][1] = -B;
    for (std::size_t j = 2; j < d; ++j) rows[1][j] = -zeta;
    rows[1][j_star] = (yes_branch ? 1.0 : -1.0) * std::sqrt(eps) * tau;
    for (std::size_t i = 2; i < n; ++i) {
        rows[i][0] = (1.0 + eps) * tau;
        rows[i][1] = std::sqrt(bulk);
    }
    shuffle_rows(rows, rng);
    return from_dense_rows(rows, d);
}

DataMatrix gen_meb_hypercube(std::size_t n, std::size_t d, bool special,
                             std::uint64_t seed) {
    if (n < 1 || d < 4 || d % 4 != 0)
        throw std::invalid_argument(
            "gen_meb_hypercube: need n >= 1 and d divisible by 4");
    const double coord = 1.0 / std::sqrt(static_cast<double>(d));
    const std::size_t regular = 3 * d / 4;
    const double reduced = static_cast<double>(regular) -
                           12.0 * std::sqrt(static_cast<double>(d)) *
                               std::log(std::max<double>(static_cast<double>(n), 2.0));
    const std::size_t special_count =
        reduced > 0.0 ? static_cast<std::size_t>(reduced) : 0;

    Rng rng(seed);
    const std::size_t special_at = special ? rng.uniform_below(n) : n;

    std::vector<std::size_t> perm(d);
    DataMatrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t positives = i == special_at ? special_count : regular;
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = 0; k < positives; ++k)
            std::swap(perm[k], perm[k + rng.uniform_below(d - k)]);
        std::vector<bool> pos(d, false);
        for (std::size_t k = 0; k < positives; ++k) pos[perm[k]] = true;
        for (std::size_t j = 0; j < d; ++j)
            m.set_entry(i, j, pos[j] ? coord : -coord);
    }
    m.finalize();
    return m;
}

MebKnownInstance gen_meb_known(std::size_t n, std::size_t d, double radius,
                               std::uint64_t seed) {
    if (n < 2 || d < 2)
        throw std::invalid_argument("gen_meb_known: need n >= 2 and d >= 2");
    if (!(radius > 0.0 && radius < 1.0))
        throw std::invalid_argument("gen_meb_known: radius must be in (0,1)");
    Rng rng(seed);
    std::vector<double> center = random_unit(d, rng);
    const double center_norm = 0.5 * (1.0 - radius);
    for (double& v : center) v *= center_norm;

    std::vector<std::vector<double>> rows(n, std::vector<double>(d, 0.0));
    auto on_sphere = [&](std::size_t i, const std::vector<double>& u, double su) {
        for (std::size_t j = 0; j < d; ++j)
            rows[i][j] = center[j] + su * radius * u[j];
    };
    // The antipodal pair pins the ball: any enclosing ball has radius at
    // least ||A_0 - A_1||/2 = radius, and (center, radius) encloses all.
    std::vector<double> axis = random_unit(d, rng);
    on_sphere(0, axis, +1.0);
    on_sphere(1, axis, -1.0);
    for (std::size_t i = 2; i < n; ++i) on_sphere(i, random_unit(d, rng), +1.0);
    shuffle_rows(rows, rng);

    MebKnownInstance inst;
    inst.m = from_dense_rows(rows, d);
    inst.center = std::move(center);
    inst.radius = radius;
    return inst;
}

MebKnownInstance gen_meb_known(std::size_t n, std::size_t d, std::uint64_t seed) {
    return gen_meb_known(n, d, 0.4, seed);
}

}  // namespace sublinopt
