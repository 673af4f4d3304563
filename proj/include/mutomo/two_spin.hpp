#pragma once

#include "mutomo/density.hpp"
#include "mutomo/sphere.hpp"
#include "mutomo/spin.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace mutomo {

struct TwoSpinBasis {
    Spin j_mu = half;
    Spin j_e = half;

    int dim_mu() const { return spin_dim(j_mu); }
    int dim_e() const { return spin_dim(j_e); }
    int dim() const { return dim_mu() * dim_e(); }
    SubsystemDims dims() const { return {dim_mu(), dim_e()}; }
    // (L, M), L descending then M descending
    std::vector<std::pair<HalfInt, HalfInt>> coupled_labels() const;
    // muon spin 1/2, electron spin inferred from the dimension
    static TwoSpinBasis for_dim(int dim);
};

// rows: coupled states |LM>, columns: product states |m_mu m_e>
ComplexMatrix cg_matrix(Spin j_mu, Spin j_e);

std::vector<double> individual_tomogram_unitary(const DensityMatrix& rho, const ComplexMatrix& u);
std::vector<double> individual_tomogram(const DensityMatrix& rho, const Direction& n_mu, const Direction& n_e);
std::vector<double> reduced_tomogram(const DensityMatrix& rho, const Direction& n_mu);
std::vector<double> total_tomogram(const DensityMatrix& rho, const ComplexMatrix& u);

ComplexMatrix blockdiag_rotation(Spin j_mu, Spin j_e, const Direction& N);
std::vector<double> total_pdf(const DensityMatrix& rho, const Direction& N);

struct TotalPdfSamples {
    TwoSpinBasis basis;
    QuadratureGrid grid;
    std::vector<std::vector<double>> values;  // [node][coupled index]
};

TotalPdfSamples sample_total_pdf(const DensityMatrix& rho, const QuadratureGrid& grid);
// direct sum of the per-L blocks, in the coupled basis
ComplexMatrix reconstruct_blockdiag(const TotalPdfSamples& f);

struct TwoSpinTomogram {
    TwoSpinBasis basis;
    QuadratureGrid grid_mu, grid_e;
    std::vector<double> values;

    std::size_t index(std::size_t node_mu, std::size_t node_e, int a_mu, int a_e) const {
        return ((node_mu * grid_e.size() + node_e) * basis.dim_mu() + a_mu) * basis.dim_e() + a_e;
    }
    double at(std::size_t node_mu, std::size_t node_e, int a_mu, int a_e) const {
        return values[index(node_mu, node_e, a_mu, a_e)];
    }
};

TwoSpinTomogram sample_two_spin_tomogram(const DensityMatrix& rho, const QuadratureGrid& grid_mu,
                                         const QuadratureGrid& grid_e);
// same sampling for any operator (tomographic symbol)
TwoSpinTomogram sample_two_spin_symbol(const ComplexMatrix& a, const TwoSpinBasis& basis, const QuadratureGrid& grid_mu,
                                       const QuadratureGrid& grid_e);
ComplexMatrix reconstruct_two_spin_operator(const TwoSpinTomogram& w);
DensityMatrix reconstruct_two_spin(const TwoSpinTomogram& w);
std::vector<double> total_from_individual(const TwoSpinTomogram& w, const ComplexMatrix& u);

void write_two_spin_csv(std::ostream& os, const TwoSpinTomogram& w);
TwoSpinTomogram read_two_spin_csv(std::istream& is);

}  // namespace mutomo
