#pragma once

#include "mutomo/density.hpp"
#include "mutomo/two_spin.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <utility>

namespace mutomo {

struct BellSetting {
    Direction n1_mu, n2_mu, n1_e, n2_e;
};

struct PositivityCoefficients {
    double M2 = 0, M3 = 0, M4 = 0;
};

struct EntanglementReport {
    double t = 0;
    double E = 0;
    PositivityCoefficients M;
    double max_bell = 0;
    double negativity = 0;
};

// rows (++, +-, -+, --), columns (n1 n1, n1 n2, n2 n1, n2 n2)
Eigen::Matrix4d bell_cells(const DensityMatrix& rho, const BellSetting& s);
const Eigen::Matrix4d& bell_sign_matrix();
double bell_number(const Eigen::Matrix4d& cells);

struct BellMaximum {
    double value = 0;
    BellSetting setting;
};

BellMaximum max_bell(const DensityMatrix& rho, std::uint64_t seed = 0x5eedb3114ULL, int starts = 32);

TwoSpinTomogram ppt_tomogram(const TwoSpinTomogram& w);

PositivityCoefficients positivity_coefficients(const ComplexMatrix& lambda);
double entanglement_E(const DensityMatrix& rho);
double negativity(const DensityMatrix& rho, SubsystemDims dims);

struct SpinLabel {
    double m = 0.5;
    Vec3 n {0, 0, 1};
};

using QubitPair = std::array<SpinLabel, 2>;

cplx star_kernel(const QubitPair& primed, const QubitPair& double_primed, const QubitPair& out);

// M3, M4 of the operator whose tomogram is `w` (pass the PPT tomogram for the separability test)
std::pair<double, double> tomographic_M34(const TwoSpinTomogram& w, const Direction& n_mu = Direction::z(),
                                          const Direction& n_e = Direction::z());
double tomographic_E(const TwoSpinTomogram& w);

EntanglementReport entanglement_report(const DensityMatrix& rho, double t, bool with_bell = true);
nlohmann::json to_json(const EntanglementReport& r);

}  // namespace mutomo
