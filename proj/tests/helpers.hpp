#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "sublinopt/matrix.hpp"
#include "sublinopt/rng.hpp"

namespace test_helpers {

inline sublinopt::DataMatrix make_matrix(
    const std::vector<std::vector<double>>& rows, bool enforce_norms = true) {
    std::size_t d = 0;
    for (const auto& r : rows) d = std::max(d, r.size());
    sublinopt::DataMatrix m(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m.set_entry(i, j, rows[i][j]);
    m.finalize(enforce_norms);
    return m;
}

inline std::vector<double> random_unit(sublinopt::Rng& rng, std::size_t d,
                                       double scale = 1.0) {
    std::vector<double> v(d);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (auto& x : v) {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 < 1e-12);
    const double s = scale / std::sqrt(norm2);
    for (auto& x : v) x *= s;
    return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

inline double sq_norm(const std::vector<double>& a) { return dot(a, a); }

}  // namespace test_helpers
