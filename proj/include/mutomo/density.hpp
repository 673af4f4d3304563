#pragma once

#include "mutomo/linalg.hpp"

namespace mutomo {

// Hermitian, unit-trace matrix. Positivity is checked on request only, since
// linear inversions may legitimately leave the cone.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(const ComplexMatrix& m, double tol = 1e-10);

    const ComplexMatrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double min_eigenvalue() const;
    bool is_psd(double tol = 1e-12) const { return min_eigenvalue() >= -tol; }
    double purity() const;

    static DensityMatrix maximally_mixed(int dim);
    static DensityMatrix pure(const ComplexVector& psi);

private:
    ComplexMatrix m_;
};

}  // namespace mutomo
