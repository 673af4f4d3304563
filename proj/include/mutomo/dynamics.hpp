#pragma once

#include "mutomo/density.hpp"
#include "mutomo/sphere.hpp"
#include "mutomo/spin.hpp"
#include "mutomo/two_spin.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mutomo {

// internal units: ns, rad/ns, Gauss, hbar = 1
struct PhysicalConstants {
    double g_e = 2.0023193;
    double g_mu = 2.0;
    double mu_B_over_h = 1.3996244936;      // MHz/G
    double mu_p_over_h = 2.1288739e-3;      // MHz/G
    double mu_mu_over_mu_p = 3.18334;

    double gamma_e() const;   // g_e mu_B / hbar, rad/ns/G
    double gamma_mu() const;  // g_mu mu_mu / hbar, rad/ns/G
    // field at which B (gamma_e - gamma_mu) = A
    double critical_field(double A) const;
};

double mhz_to_rad_per_ns(double mhz, bool angular);

enum class HamiltonianFamily { HyperfineOnly, IsotropicMu, AnisotropicMuStar };

struct HamiltonianSpec {
    HamiltonianFamily family = HamiltonianFamily::HyperfineOnly;
    double A = 0;       // rad/ns
    double deltaA = 0;  // rad/ns
    double omega0 = 0;  // rad/ns
    Vec3 B {0, 0, 0};   // Gauss
    Direction aniso_axis = Direction::z();
    Spin j_e = half;

    void validate() const;
    TwoSpinBasis basis() const { return {half, j_e}; }
    double coupling() const { return family == HamiltonianFamily::HyperfineOnly ? omega0 : A; }
};

ComplexMatrix build_hamiltonian(const HamiltonianSpec& spec, const PhysicalConstants& k = {});

enum class ClosedFormVariant { Hyperfine, MuZ, MuX, MuY, MuStarZZ, MuStarXZ, MuStarYZ, MuLikeSpin1 };

std::string variant_name(ClosedFormVariant v);

struct PropagatorScalars {
    double a = 0, b_plus = 0, b_minus = 0, c = 0, d = 0, f = 0, h = 0;
};

struct PropagatorSpec {
    HamiltonianSpec hamiltonian;
    enum class Method { ClosedForm, Numeric } method = Method::Numeric;
    std::optional<ClosedFormVariant> variant;
    PhysicalConstants constants;
};

std::optional<ClosedFormVariant> detect_variant(const HamiltonianSpec& spec);
// closed form when the orientation is tabulated, numeric otherwise
PropagatorSpec make_propagator_spec(const HamiltonianSpec& spec, const PhysicalConstants& k = {});
PropagatorScalars propagator_scalars(const HamiltonianSpec& spec, const PhysicalConstants& k = {});

ComplexMatrix propagator_closed_form(ClosedFormVariant v, const HamiltonianSpec& spec, double t,
                                     const PhysicalConstants& k = {});
ComplexMatrix propagator_closed_form(const PropagatorSpec& p, double t);
ComplexMatrix propagator_numeric(const HamiltonianSpec& spec, double t, const PhysicalConstants& k = {});

using PropagatorFn = std::function<ComplexMatrix(double)>;

// cached evaluator honoring the spec's method
PropagatorFn make_propagator(const PropagatorSpec& p);

DensityMatrix evolve_density(const DensityMatrix& rho0, const ComplexMatrix& u);

// initial state |up><up| (x) I/(2 j_e + 1)
DensityMatrix muon_polarized_state(Spin j_e = half);

using UnitaryTomogram = std::function<std::vector<double>(const ComplexMatrix&)>;
UnitaryTomogram unitary_tomogram_of(const DensityMatrix& rho0);

// w(m, (R_mu x R_e)^dag U(t)) on the product grid, one tomogram per time
std::vector<TwoSpinTomogram> evolve_tomogram_unitary(const UnitaryTomogram& w0, const TwoSpinBasis& basis,
                                                     const PropagatorFn& u, const std::vector<double>& times,
                                                     const QuadratureGrid& grid_mu, const QuadratureGrid& grid_e);
// conjugation path: rotation-parameterized w0 pushed through U(t) with the quantizer kernel
std::vector<TwoSpinTomogram> evolve_tomogram(const TwoSpinTomogram& w0, const PropagatorFn& u,
                                             const std::vector<double>& times);

double analytic_free_mu(double m_mu, const Direction& n_mu, double m_e, const Direction& n_e, double t, double omega0);
double analytic_reduced_free_mu(double m_mu, const Direction& n_mu, double t, double omega0);

// time grid: `per_period` points per longest oscillation period, capped so the fastest has >= 16
std::vector<double> default_time_grid(const ComplexMatrix& h, double t_max, int per_period = 512);
// nonzero transition frequencies |E_i - E_j|, ascending, deduplicated
std::vector<double> transition_frequencies(const ComplexMatrix& h, double tol = 1e-9);

}  // namespace mutomo
