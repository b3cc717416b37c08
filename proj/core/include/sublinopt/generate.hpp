#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sublinopt/matrix.hpp"

namespace sublinopt {

// CLI-facing description of a generated family; the library entry points
// below are the typed equivalents.
struct GenSpec {
    std::string family;  // separable | planted | meb-hypercube | meb-known
    std::size_t n = 0, d = 0;
    double sigma = 0.3;   // separable target margin
    double radius = 0.4;  // meb-known radius
    double tau = 0.2;     // planted base margin
    double eps = 0.1;     // planted perturbation
    bool yes_branch = false;
    bool special_vertex = false;
    std::uint64_t seed = 0;
};

struct SeparableInstance {
    DataMatrix m;
    std::vector<double> x_star;
    double sigma_exact = 0.0;
};

// Unit-norm rows A_i = sigma x* + sqrt(1-sigma^2) u_i with u_i unit and
// orthogonal to x*.  Rows 0 and 1 use +-u for the same u, which pins the
// margin: min(A_0 x, A_1 x) <= sigma <x*, x> <= sigma for every unit x, with
// equality at x*.  So sigma_exact = sigma by construction.
SeparableInstance gen_separable(std::size_t n, std::size_t d, double sigma,
                                std::uint64_t seed);

// Hard classification family: rows 1 and 2 agree on coordinate 0 (value tau)
// and are opposite elsewhere except at a hidden column j*, where the YES
// branch plants agreement (+sqrt(eps) tau in both rows) and the NO branch
// plants disagreement.  Remaining rows are ((1+eps) tau, sqrt(1-(1+eps)^2
// tau^2), 0, ...).  Filler coordinates are zeta = 1/d^3.  YES margin is
// tau sqrt(1+eps); NO margin is ~tau -- distinguishable only when eps is
// resolved.  Rows are shuffled by the seed.
DataMatrix gen_planted_classification(std::size_t n, std::size_t d, double tau,
                                      double eps, bool yes_branch,
                                      std::uint64_t seed);

// Hypercube MEB stress family, d divisible by 4: vertices of {+-1/sqrt(d)}^d
// with exactly 3d/4 positive coordinates ("regular").  With the special flag
// one vertex carries fewer positives -- 3d/4 - 12 d D with D = ln(n)/sqrt(d),
// clamped at 0 for desk-scale d -- which strictly inflates the enclosing
// ball.  All vertices have unit norm.
DataMatrix gen_meb_hypercube(std::size_t n, std::size_t d, bool special,
                             std::uint64_t seed);

struct MebKnownInstance {
    DataMatrix m;
    std::vector<double> center;
    double radius = 0.0;
};

// n points on the sphere of the chosen radius around a random center, always
// including an antipodal pair through the center, which forces the MEB to be
// exactly (center, radius).  Requires radius + ||center|| <= 1.
MebKnownInstance gen_meb_known(std::size_t n, std::size_t d, double radius,
                               std::uint64_t seed);
MebKnownInstance gen_meb_known(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace sublinopt
