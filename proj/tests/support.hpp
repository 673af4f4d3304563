#pragma once

#include "mutomo/density.hpp"
#include "mutomo/linalg.hpp"
#include "mutomo/sphere.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testing {

using namespace mutomo;

inline ComplexMatrix random_complex(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
    ComplexMatrix a = random_complex(n, n, rng);
    return 0.5 * (a + a.adjoint());
}

// Ginibre construction; rank defaults to full
inline DensityMatrix random_density(int n, std::mt19937_64& rng, int rank = 0) {
    ComplexMatrix g = random_complex(n, rank > 0 ? rank : n, rng);
    ComplexMatrix r = g * g.adjoint();
    return DensityMatrix(r / r.trace().real());
}

inline ComplexMatrix random_unitary(int n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(n, n, rng));
    return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

inline Direction random_direction(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Direction::from_angles(std::acos(2 * u(rng) - 1), 2 * std::numbers::pi * u(rng));
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
