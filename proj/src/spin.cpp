#include "mutomo/spin.hpp"

#include "mutomo/error.hpp"

#include <cmath>

namespace mutomo {

HalfInt::HalfInt(double v) {
    double t = 2.0 * v;
    double r = std::round(t);
    if (!std::isfinite(v) || std::abs(t - r) > 1e-9) throw ValidationError("not a half-integer: " + std::to_string(v));
    twice_ = static_cast<int>(r);
}

std::string HalfInt::str() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
}

int projection_index(Spin j, HalfInt m) {
    if (m.twice() > j.twice() || m.twice() < -j.twice() || (j.twice() - m.twice()) % 2 != 0)
        throw ValidationError("projection " + m.str() + " invalid for j=" + j.str());
    return (j.twice() - m.twice()) / 2;
}

void require_spin(Spin j, Spin max_j, const char* what) {
    if (j.twice() < 1 || j > max_j)
        throw ValidationError(std::string(what) + ": unsupported spin j=" + j.str());
}

SpinMatrices spin_matrices(Spin j) {
    if (j.twice() < 0) throw ValidationError("spin_matrices: negative spin");
    const int n = spin_dim(j);
    const double jj = j.value();
    SpinMatrices s;
    s.z = ComplexMatrix::Zero(n, n);
    s.plus = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double m = jj - i;
        s.z(i, i) = m;
        if (i > 0) s.plus(i - 1, i) = std::sqrt(jj * (jj + 1) - m * (m + 1));
    }
    s.minus = s.plus.adjoint();
    s.x = 0.5 * (s.plus + s.minus);
    s.y = (s.plus - s.minus) / cplx(0.0, 2.0);
    return s;
}

ComplexMatrix spin_along(const SpinMatrices& s, const Eigen::Vector3d& v) {
    return v(0) * s.x + v(1) * s.y + v(2) * s.z;
}

}  // namespace mutomo
