#include "mutomo/density.hpp"

#include "mutomo/error.hpp"

#include <cmath>
#include <string>

namespace mutomo {

DensityMatrix::DensityMatrix(const ComplexMatrix& m, double tol) {
    if (m.rows() < 1 || m.rows() != m.cols()) throw ValidationError("DensityMatrix: matrix must be square");
    if (!m.allFinite()) throw ValidationError("DensityMatrix: non-finite entries");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) throw ValidationError("DensityMatrix: not Hermitian");
    cplx tr = m.trace();
    if (std::abs(tr - 1.0) > tol)
        throw ValidationError("DensityMatrix: trace " + std::to_string(tr.real()) + " differs from 1");
    m_ = 0.5 * (m + m.adjoint());
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    if (dim < 1) throw ValidationError("maximally_mixed: dim must be positive");
    return DensityMatrix(ComplexMatrix::Identity(dim, dim) / double(dim));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
    double n = psi.norm();
    if (!(n > 0)) throw ValidationError("DensityMatrix::pure: zero vector");
    ComplexVector v = psi / n;
    return DensityMatrix(v * v.adjoint());
}

}  // namespace mutomo
