#include "mutomo/linalg.hpp"

#include "mutomo/error.hpp"

#include <cmath>
#include <string>

namespace mutomo {

namespace {

void require_finite(const ComplexMatrix& m, const char* what) {
    if (m.rows() < 1 || m.cols() < 1) throw ValidationError(std::string(what) + ": empty matrix");
    if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entries");
}

void require_bipartite(const ComplexMatrix& m, SubsystemDims dims, const char* what) {
    require_finite(m, what);
    if (dims.dimA < 1 || dims.dimB < 1 || m.rows() != m.cols() || m.rows() != dims.total())
        throw ValidationError(std::string(what) + ": dimension mismatch (" + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + " vs " + std::to_string(dims.dimA) + "*" +
                              std::to_string(dims.dimB) + ")");
}

}  // namespace

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_finite(a, "kron");
    require_finite(b, "kron");
    ComplexMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, SubsystemDims dims, Subsystem keep) {
    require_bipartite(m, dims, "partial_trace");
    const int na = dims.dimA, nb = dims.dimB;
    if (keep == Subsystem::A) {
        ComplexMatrix r = ComplexMatrix::Zero(na, na);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j)
                for (int k = 0; k < nb; ++k) r(i, j) += m(i * nb + k, j * nb + k);
        return r;
    }
    ComplexMatrix r = ComplexMatrix::Zero(nb, nb);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j)
            for (int k = 0; k < na; ++k) r(i, j) += m(k * nb + i, k * nb + j);
    return r;
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, SubsystemDims dims, Subsystem which) {
    require_bipartite(m, dims, "partial_transpose");
    const int na = dims.dimA, nb = dims.dimB;
    ComplexMatrix r(m.rows(), m.cols());
    for (int a1 = 0; a1 < na; ++a1)
        for (int b1 = 0; b1 < nb; ++b1)
            for (int a2 = 0; a2 < na; ++a2)
                for (int b2 = 0; b2 < nb; ++b2) {
                    cplx v = m(a1 * nb + b1, a2 * nb + b2);
                    if (which == Subsystem::A)
                        r(a2 * nb + b1, a1 * nb + b2) = v;
                    else
                        r(a1 * nb + b2, a2 * nb + b1) = v;
                }
    return r;
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(m.norm(), 1.0);
    return (m - m.adjoint()).norm() <= rel_tol * scale;
}

bool is_unitary(const ComplexMatrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

HermitianEigen eig_hermitian(const ComplexMatrix& m) {
    require_finite(m, "eig_hermitian");
    if (!is_hermitian(m)) throw ValidationError("eig_hermitian: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
    if (es.info() != Eigen::Success) throw NumericError("eig_hermitian: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

EigenPropagator::EigenPropagator(const ComplexMatrix& h) : eig_(eig_hermitian(h)) {}

ComplexMatrix EigenPropagator::at(double t) const {
    const auto& v = eig_.vectors;
    ComplexVector ph(eig_.values.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(-I_ * eig_.values(k) * t);
    return v * ph.asDiagonal() * v.adjoint();
}

ComplexMatrix propagator(const ComplexMatrix& h, double t, double hbar) {
    if (!(hbar > 0.0)) throw ValidationError("propagator: hbar must be positive");
    return EigenPropagator(h).at(t / hbar);
}

double phase_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("phase_distance: shape mismatch");
    cplx ov = (b.conjugate().cwiseProduct(a)).sum();
    cplx ph = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1.0);
    return (a - ph * b).cwiseAbs().maxCoeff();
}

ComplexMatrix pauli(int k) {
    ComplexMatrix s = ComplexMatrix::Zero(2, 2);
    switch (k) {
        case 0: s(0, 0) = 1; s(1, 1) = 1; break;
        case 1: s(0, 1) = 1; s(1, 0) = 1; break;
        case 2: s(0, 1) = -I_; s(1, 0) = I_; break;
        case 3: s(0, 0) = 1; s(1, 1) = -1; break;
        default: throw ValidationError("pauli: index must be 0..3");
    }
    return s;
}

}  // namespace mutomo
