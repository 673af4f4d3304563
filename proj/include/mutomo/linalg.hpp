#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace mutomo {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I_ {0.0, 1.0};

enum class Subsystem { A, B };

struct SubsystemDims {
    int dimA = 2;
    int dimB = 2;
    int total() const { return dimA * dimB; }
};

struct HermitianEigen {
    RealVector values;     // ascending
    ComplexMatrix vectors; // columns
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix partial_trace(const ComplexMatrix& m, SubsystemDims dims, Subsystem keep);
ComplexMatrix partial_transpose(const ComplexMatrix& m, SubsystemDims dims, Subsystem which);

bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12);
bool is_unitary(const ComplexMatrix& u, double tol = 1e-10);

HermitianEigen eig_hermitian(const ComplexMatrix& m);
ComplexMatrix propagator(const ComplexMatrix& h, double t, double hbar = 1.0);

// exp(-i h t) for many t without re-diagonalizing
class EigenPropagator {
public:
    explicit EigenPropagator(const ComplexMatrix& h);
    ComplexMatrix at(double t) const;
    const HermitianEigen& eigen() const { return eig_; }
private:
    HermitianEigen eig_;
};

// phase-insensitive distance: min over phi of max |a - e^{i phi} b|
double phase_distance(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix pauli(int k);  // 0 = I, 1 = x, 2 = y, 3 = z

}  // namespace mutomo
