#pragma once

#include "mutomo/density.hpp"
#include "mutomo/sphere.hpp"
#include "mutomo/spin.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace mutomo {

inline constexpr Spin max_rotation_spin = HalfInt::from_twice(4);

double three_j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3);
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);
double wigner_small_d(Spin j, HalfInt mp, HalfInt m, double beta);

// exp(-i theta n_perp.J), m descending
ComplexMatrix rotation_matrix(Spin j, const Direction& dir);

// Tr[rho R|jm><jm|R^dag] over m descending
std::vector<double> tomogram(const DensityMatrix& rho, Spin j, const Direction& dir);
// same, for any Hermitian operator (no trace/positivity requirement)
std::vector<double> tomogram_symbol(const ComplexMatrix& a, Spin j, const Direction& dir);

// irreducible tensor T_kq in the |jm> basis
ComplexMatrix tensor_operator(Spin j, int k, int q);
ComplexMatrix quantizer(Spin j, HalfInt m, const Direction& dir);

struct SpinTomogram {
    Spin j;
    QuadratureGrid grid;
    std::vector<std::vector<double>> values;  // [node][m index]
};

SpinTomogram sample_tomogram(const DensityMatrix& rho, Spin j, const QuadratureGrid& grid);
ComplexMatrix reconstruct_operator(const SpinTomogram& tom);
DensityMatrix reconstruct_from_sphere(const SpinTomogram& tom);

std::array<Vec3, 3> dual_basis(const Direction& n1, const Direction& n2, const Direction& n3);
DensityMatrix reconstruct_qubit_three_directions(double w1, double w2, double w3, const Direction& n1,
                                                 const Direction& n2, const Direction& n3);

void write_tomogram_csv(std::ostream& os, const SpinTomogram& tom);
SpinTomogram read_tomogram_csv(std::istream& is);

}  // namespace mutomo
