#pragma once

#include "mutomo/density.hpp"
#include "mutomo/dynamics.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace mutomo {

struct MeasurementPlan {
    std::vector<Direction> directions {Direction::x(), Direction::y(), Direction::z()};
    std::vector<double> times;
    PropagatorSpec propagator;
    std::optional<ComplexMatrix> hamiltonian;  // explicit H (rad/ns); overrides `propagator` when set

    void validate() const;
    ComplexMatrix h() const;
    int dim() const;
    std::size_t size() const { return directions.size() * times.size(); }
};

// 5 times over one beat period of the two lowest transition frequencies, golden-ratio spaced
std::vector<double> default_plan_times(const ComplexMatrix& h, int n = 5);
MeasurementPlan default_plan(const PropagatorSpec& p);

// w(1/2, n_k, t_l), ordered time-major: index l * K + k
std::vector<double> forward_model(const DensityMatrix& rho0, const MeasurementPlan& plan);

// rho = I/4 + sum_k theta_k B_k, B_k = (sigma_i x sigma_j)/2, (i, j) != (0, 0), i-major
ComplexMatrix parameter_basis(int k);
std::string parameter_label(int k);
Eigen::VectorXd parameters_of(const ComplexMatrix& rho);

struct DesignMatrix {
    Eigen::MatrixXd G;       // rows: plan points, cols: 15 parameters
    Eigen::VectorXd offset;  // prediction for theta = 0
    Eigen::VectorXd singular_values;
    int rank = 0;
    double condition = 0;  // sigma_max / sigma_min over the retained values
};
DesignMatrix design_matrix(const MeasurementPlan& plan);

struct Identifiability {
    int rank = 0;
    double condition = 0;
};
Identifiability identifiability(const MeasurementPlan& plan);
// unobservable parameter combinations, one line per null vector
std::string describe_null_space(const MeasurementPlan& plan);

struct ReconstructionResult {
    DensityMatrix rho;
    ComplexMatrix unprojected;
    int rank = 0;
    double condition = 0;
    double residual_norm = 0;  // weighted
    bool clipped = false;
    bool clip_significant = false;  // some eigenvalue moved by more than 3 sigma
};

struct ReconstructOptions {
    bool min_norm = false;  // accept rank < 15 and return the minimum-norm solution
};

ReconstructionResult reconstruct_initial(const std::vector<double>& values, const std::vector<double>& sigmas,
                                         const MeasurementPlan& plan, const ReconstructOptions& opt = {});

nlohmann::json to_json(const HamiltonianSpec& s);
HamiltonianSpec hamiltonian_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MeasurementPlan& p);
MeasurementPlan plan_from_json(const nlohmann::json& j);
nlohmann::json report_json(const ReconstructionResult& r, const MeasurementPlan& p);

}  // namespace mutomo
