#pragma once

#include "mutomo/linalg.hpp"
#include "mutomo/sphere.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mutomo {

enum class Species { MuPlus, MuMinus };

struct DecayModel {
    double asymmetry = 1.0 / 3.0;  // 0 forces isotropic emission
    double lifetime_ns = 2197.0;
    Species species = Species::MuPlus;
    void validate() const;
};

struct Detector {
    Direction axis;
    double half_angle = 0;  // rad, in (0, pi]
    double efficiency = 1;
};

struct DetectorGeometry {
    std::vector<Detector> detectors;
    void validate() const;
    // cones along +x, -x, +y, -y, +z, -z
    static DetectorGeometry six_cones(double half_angle = std::numbers::pi / 4, double efficiency = 1.0);
    static DetectorGeometry full_sphere();
    // (forward, backward) index pairs with opposite axes and equal cones
    std::vector<std::pair<std::size_t, std::size_t>> opposite_pairs() const;
};

struct HistogramSeries {
    std::vector<double> edges;                       // ns, strictly increasing
    std::vector<std::vector<std::uint64_t>> counts;  // [detector][bin]
    std::uint64_t n_muons = 0;
    double background_fraction = 0;
    std::uint64_t seed = 0;
    std::size_t bins() const { return edges.size() - 1; }
    void validate() const;
    bool operator==(const HistogramSeries&) const = default;
};

// Gamma(n) = 1 + a P.n, normalized to 1 over the sphere
double gamma_distribution(const Vec3& P, const Direction& n, double a);
// (w(+1/2), w(-1/2)) along n
std::pair<double, double> histogram_to_tomogram(double gamma_value, double a, Species species);

// muon polarization P(t) = Tr[rho_mu(t) sigma]
using PolarizationFn = std::function<Vec3(double)>;
Vec3 polarization(const ComplexMatrix& rho_mu);
PolarizationFn polarization_of(std::function<ComplexMatrix(double)> rho_mu_of_t);
// spectral form for a static Hamiltonian on muon (x) electron, cheap per call
PolarizationFn polarization_from_hamiltonian(const ComplexMatrix& rho0, const ComplexMatrix& h, SubsystemDims dims);

struct SimulationOptions {
    std::vector<double> edges;
    double background_fraction = 0.01;
    std::size_t chunk = 1 << 16;  // muons per random stream
    unsigned threads = 0;         // 0: hardware concurrency
};

HistogramSeries simulate_events(const PolarizationFn& P, const DetectorGeometry& geometry, const DecayModel& model,
                                std::uint64_t n_muons, std::uint64_t seed, const SimulationOptions& opt);

std::vector<double> uniform_edges(double t_max_ns, std::size_t bins);

struct TomogramEstimate {
    Direction axis;
    std::size_t forward = 0, backward = 0;
    double background_per_ns = 0;  // per detector, fitted
    std::vector<double> t_start, t_end, w_plus, sigma;
    std::vector<std::uint64_t> counts;  // forward + backward raw
    std::vector<bool> low_confidence;
};

std::vector<TomogramEstimate> estimate_tomogram(const HistogramSeries& hist, const DetectorGeometry& geometry,
                                                const DecayModel& model, std::uint64_t count_floor = 100);

// decay-weighted bin average of w(+1/2, axis, t)
double true_bin_tomogram(const PolarizationFn& P, const Direction& axis, double t0, double t1, double lifetime_ns);

void write_histogram(const HistogramSeries& h, const DetectorGeometry& g, const DecayModel& m, const std::string& csv_path,
                     const std::string& json_path);
struct HistogramFile {
    HistogramSeries hist;
    DetectorGeometry geometry;
    DecayModel model;
};
HistogramFile read_histogram(const std::string& csv_path, const std::string& json_path);

nlohmann::json to_json(const DetectorGeometry& g);
DetectorGeometry geometry_from_json(const nlohmann::json& j);

}  // namespace mutomo
