#include "mutomo/dynamics.hpp"
#include "mutomo/entanglement.hpp"
#include "mutomo/error.hpp"
#include "mutomo/materials.hpp"
#include "mutomo/musr.hpp"
#include "mutomo/reconstruction.hpp"
#include "mutomo/two_spin.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

using namespace mutomo;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* version = "1";

struct Config {
    std::string material = "quartz";
    std::vector<double> fields;
    std::string b_axis, aniso_axis;
    std::optional<double> t_max_ns;
    std::optional<int> steps;
    std::string init = "muon-polarized";
    std::string out = "mutomo_out";
    std::uint64_t seed = 1;
    std::string detectors = "six";
    std::uint64_t n_muons = 1000000;
    double background = 0.01;
    double asymmetry = 1.0 / 3.0;
    bool bell = false;
    std::string measurements, plan;
};

struct Run {
    MaterialPreset preset;
    double B = 0;
    HamiltonianSpec spec;
    PropagatorSpec prop;
    ComplexMatrix h;
};

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(15) << x;
    return os.str();
}

std::vector<Run> runs_of(const Config& c) {
    Run base;
    base.preset = find_preset(c.material);
    const Vec3 b_axis = c.b_axis.empty() ? base.preset.B_axis : parse_axis(c.b_axis);
    const Vec3 n_axis = c.aniso_axis.empty() ? base.preset.aniso_axis : parse_axis(c.aniso_axis);
    std::vector<Run> out;
    for (double B : c.fields.empty() ? base.preset.default_fields_G : c.fields) {
        Run r = base;
        r.B = B;
        r.spec = base.preset.spec(B, b_axis, n_axis);
        r.prop = make_propagator_spec(r.spec);
        r.h = build_hamiltonian(r.spec);
        out.push_back(r);
    }
    return out;
}

DensityMatrix initial_state(const Config& c, const Run& r) {
    if (c.init == "muon-polarized") return muon_polarized_state(r.spec.j_e);
    std::ifstream in(c.init);
    if (!in) throw ValidationError("cannot read initial state file " + c.init);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("initial state file: " + std::string(e.what()));
    }
    auto re = j.at("real").get<std::vector<std::vector<double>>>();
    auto im = j.at("imag").get<std::vector<std::vector<double>>>();
    const int n = static_cast<int>(re.size());
    if (n != r.spec.basis().dim() || static_cast<int>(im.size()) != n)
        throw ValidationError("initial state: expected a " + std::to_string(r.spec.basis().dim()) + "x" +
                              std::to_string(r.spec.basis().dim()) + " matrix");
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(re[i].size()) != n || static_cast<int>(im[i].size()) != n) throw ValidationError("initial state: matrix must be square");
        for (int k = 0; k < n; ++k) m(i, k) = cplx(re[i][k], im[i][k]);
    }
    DensityMatrix rho(m);
    if (!rho.is_psd(1e-10)) throw ValidationError("initial state: matrix is not positive semidefinite");
    return rho;
}

std::vector<double> time_grid(const Config& c, const Run& r) {
    double t_max;
    if (c.t_max_ns) {
        t_max = *c.t_max_ns;
    } else {
        auto f = transition_frequencies(r.h);
        t_max = f.empty() ? 10.0 : 4 * 2 * std::numbers::pi / f.front();
    }
    if (!(t_max > 0)) throw ValidationError("--t-max-ns must be positive");
    if (!c.steps) return default_time_grid(r.h, t_max);
    if (*c.steps < 1) throw ValidationError("--steps must be at least 1");
    std::vector<double> t(*c.steps + 1);
    for (int i = 0; i <= *c.steps; ++i) t[i] = t_max * i / *c.steps;
    return t;
}

std::string field_tag(double B) {
    std::ostringstream os;
    os << "B" << std::setprecision(10) << B << "G";
    return os.str();
}

void ensure_dir(const std::string& d) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw ValidationError("cannot create output directory " + d);
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p);
    if (!out) throw ValidationError("cannot write " + p.string());
    out << j.dump(2) << '\n';
}

json run_json(const Run& r) {
    return {{"B_G", r.B},
            {"hamiltonian", to_json(r.spec)},
            {"variant", r.prop.variant ? variant_name(*r.prop.variant) : "none"},
            {"method", r.prop.method == PropagatorSpec::Method::ClosedForm ? "closed-form" : "numeric"}};
}

int cmd_evolve(const Config& c) {
    ensure_dir(c.out);
    json manifest = {{"verb", "evolve"}, {"version", version}, {"material", to_json(find_preset(c.material))}, {"files", json::array()}};
    const Direction axes[3] = {Direction::x(), Direction::y(), Direction::z()};
    const char* names[3] = {"x", "y", "z"};
    for (const auto& r : runs_of(c)) {
        const auto rho0 = initial_state(c, r);
        const auto u = make_propagator(r.prop);
        const auto times = time_grid(c, r);
        const int de = spin_dim(r.spec.j_e);
        const fs::path file = fs::path(c.out) / ("evolve_" + r.preset.name + "_" + field_tag(r.B) + ".csv");
        std::ofstream out(file);
        if (!out) throw ValidationError("cannot write " + file.string());
        out << "# mutomo evolve v" << version << " material=" << r.preset.name << " B_G=" << num(r.B) << '\n';
        out << "t_ns,axis,w_reduced,E,negativity,max_bell\n";
        for (double t : times) {
            const DensityMatrix rho = evolve_density(rho0, u(t));
            std::string e_cell, n_cell, b_cell;
            if (de == 2) e_cell = num(std::max(0.0, entanglement_E(rho)));
            if (de <= 3) n_cell = num(negativity(rho, {2, de}));
            if (c.bell && de == 2) b_cell = num(max_bell(rho, c.seed).value);
            for (int k = 0; k < 3; ++k) {
                const double w = std::clamp(reduced_tomogram(rho, axes[k])[0], 0.0, 1.0);
                out << num(t) << ',' << names[k] << ',' << num(w) << ',' << e_cell << ',' << n_cell << ',' << b_cell << '\n';
            }
        }
        json entry = run_json(r);
        entry["path"] = file.filename().string();
        entry["points"] = times.size();
        manifest["files"].push_back(entry);
    }
    write_json(fs::path(c.out) / "manifest.json", manifest);
    return 0;
}

DetectorGeometry geometry_of(const Config& c) {
    if (c.detectors == "six") return DetectorGeometry::six_cones();
    if (c.detectors.rfind("six:", 0) == 0) {
        double deg;
        try {
            deg = std::stod(c.detectors.substr(4));
        } catch (const std::exception&) {
            throw ValidationError("--detectors six:<half-angle degrees>");
        }
        return DetectorGeometry::six_cones(deg * std::numbers::pi / 180);
    }
    std::ifstream in(c.detectors);
    if (!in) throw ValidationError("cannot read detector file " + c.detectors);
    try {
        json j;
        in >> j;
        return geometry_from_json(j.contains("detectors") ? j["detectors"] : j);
    } catch (const json::exception& e) {
        throw ValidationError("detector file: " + std::string(e.what()));
    }
}

int cmd_simulate(const Config& c) {
    ensure_dir(c.out);
    const auto geometry = geometry_of(c);
    auto runs = runs_of(c);
    const Run& r = runs.front();
    const auto rho0 = initial_state(c, r);
    auto pf = polarization_from_hamiltonian(rho0.matrix(), r.h, {2, spin_dim(r.spec.j_e)});
    DecayModel model;
    model.asymmetry = c.asymmetry;
    model.validate();
    SimulationOptions opt;
    opt.edges = uniform_edges(c.t_max_ns.value_or(15000.0), static_cast<std::size_t>(c.steps.value_or(10)));
    opt.background_fraction = c.background;
    auto hist = simulate_events(pf, geometry, model, c.n_muons, c.seed, opt);
    const fs::path dir(c.out);
    write_histogram(hist, geometry, model, (dir / "histogram.csv").string(), (dir / "histogram.json").string());

    auto est = estimate_tomogram(hist, geometry, model);
    std::ofstream out(dir / "estimate.csv");
    out << "# mutomo estimate v" << version << '\n';
    out << "axis_theta,axis_phi,bin_start_ns,bin_end_ns,w_plus,sigma,counts,low_confidence,truth\n";
    int checked = 0, inside = 0;
    double sigma0 = 0;
    for (const auto& e : est) {
        for (std::size_t i = 0; i < e.w_plus.size(); ++i) {
            const double truth = true_bin_tomogram(pf, e.axis, e.t_start[i], e.t_end[i], model.lifetime_ns);
            out << num(e.axis.theta) << ',' << num(e.axis.phi) << ',' << num(e.t_start[i]) << ',' << num(e.t_end[i]) << ','
                << num(e.w_plus[i]) << ',' << num(e.sigma[i]) << ',' << e.counts[i] << ',' << (e.low_confidence[i] ? 1 : 0) << ','
                << num(truth) << '\n';
            if (e.counts[i] >= 1000) {
                ++checked;
                inside += std::abs(e.w_plus[i] - truth) < 3 * e.sigma[i];
            }
        }
        sigma0 = std::max(sigma0, e.sigma.front());
    }
    json report = {{"verb", "simulate"},
                   {"version", version},
                   {"run", run_json(r)},
                   {"n_muons", c.n_muons},
                   {"seed", c.seed},
                   {"bins_checked", checked},
                   {"bins_within_3sigma", inside},
                   {"fraction_within_3sigma", checked ? double(inside) / checked : 0.0},
                   {"max_sigma_first_bin", sigma0}};
    write_json(dir / "report.json", report);
    return 0;
}

int cmd_reconstruct(const Config& c) {
    if (c.plan.empty() || c.measurements.empty()) throw ValidationError("reconstruct needs --plan and --measurements");
    std::ifstream pin(c.plan);
    if (!pin) throw ValidationError("cannot read plan file " + c.plan);
    json pj;
    try {
        pin >> pj;
    } catch (const json::exception& e) {
        throw ValidationError("plan file: " + std::string(e.what()));
    }
    auto plan = plan_from_json(pj);

    // rows t_ns,axis_theta,axis_phi,w[,sigma], matched to plan points
    std::ifstream min(c.measurements);
    if (!min) throw ValidationError("cannot read measurement file " + c.measurements);
    std::vector<double> values(plan.size(), std::nan("")), sigmas(plan.size(), 0.0);
    bool any_sigma = false;
    std::string line;
    bool header = false;
    while (std::getline(min, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> v;
        try {
            while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ValidationError("measurement file: malformed row '" + line + "'");
        }
        if (v.size() != 4 && v.size() != 5) throw ValidationError("measurement file: expected 4 or 5 columns");
        const Direction d = Direction::from_angles(v[1], v[2]);
        bool matched = false;
        for (std::size_t l = 0; l < plan.times.size() && !matched; ++l)
            for (std::size_t k = 0; k < plan.directions.size() && !matched; ++k)
                if (std::abs(plan.times[l] - v[0]) < 1e-9 && (plan.directions[k].n - d.n).norm() < 1e-9) {
                    values[l * plan.directions.size() + k] = v[3];
                    if (v.size() == 5) {
                        sigmas[l * plan.directions.size() + k] = v[4];
                        any_sigma = true;
                    }
                    matched = true;
                }
        if (!matched) throw ValidationError("measurement file: row does not match any plan point: " + line);
    }
    for (double x : values)
        if (std::isnan(x)) throw ValidationError("measurement file: missing values for some plan points");
    auto result = reconstruct_initial(values, any_sigma ? sigmas : std::vector<double> {}, plan);
    auto report = report_json(result, plan);
    if (c.out == "-") {
        std::cout << report.dump(2) << '\n';
    } else {
        const fs::path p(c.out);
        if (p.has_parent_path()) ensure_dir(p.parent_path().string());
        write_json(p, report);
    }
    return 0;
}

int cmd_bell(const Config& c) {
    ensure_dir(c.out);
    json manifest = {{"verb", "bell"}, {"version", version}, {"files", json::array()}};
    for (const auto& r : runs_of(c)) {
        if (r.spec.j_e != half) throw ValidationError("bell: two-qubit systems only");
        const auto rho0 = initial_state(c, r);
        const auto u = make_propagator(r.prop);
        Config cc = c;
        if (!cc.steps) cc.steps = 200;
        const auto times = time_grid(cc, r);
        const fs::path file = fs::path(c.out) / ("bell_" + r.preset.name + "_" + field_tag(r.B) + ".csv");
        std::ofstream out(file);
        out << "# mutomo bell v" << version << " material=" << r.preset.name << " B_G=" << num(r.B) << '\n';
        out << "t_ns,max_bell,E,n1_mu_theta,n1_mu_phi,n2_mu_theta,n2_mu_phi,n1_e_theta,n1_e_phi,n2_e_theta,n2_e_phi\n";
        for (double t : times) {
            const DensityMatrix rho = evolve_density(rho0, u(t));
            auto b = max_bell(rho, c.seed);
            out << num(t) << ',' << num(b.value) << ',' << num(std::max(0.0, entanglement_E(rho)));
            for (const auto* d : {&b.setting.n1_mu, &b.setting.n2_mu, &b.setting.n1_e, &b.setting.n2_e})
                out << ',' << num(d->theta) << ',' << num(d->phi);
            out << '\n';
        }
        json entry = run_json(r);
        entry["path"] = file.filename().string();
        manifest["files"].push_back(entry);
    }
    write_json(fs::path(c.out) / "manifest.json", manifest);
    return 0;
}

int cmd_report(const Config& c) {
    const auto preset = find_preset(c.material);
    PhysicalConstants k;
    json rep = {{"verb", "report"},
                {"version", version},
                {"material", to_json(preset)},
                {"A_rad_per_ns", preset.A()},
                {"gamma_e_MHz_per_G", k.gamma_e() / (2 * std::numbers::pi) * 1e3},
                {"gamma_mu_MHz_per_G", k.gamma_mu() / (2 * std::numbers::pi) * 1e3},
                {"runs", json::array()}};
    if (preset.family != HamiltonianFamily::HyperfineOnly) rep["critical_field_G"] = k.critical_field(preset.A());
    for (const auto& r : runs_of(c)) {
        json j = run_json(r);
        std::vector<double> f_mhz;
        for (double f : transition_frequencies(r.h)) f_mhz.push_back(f / (2 * std::numbers::pi) * 1e3);
        j["transition_frequencies_MHz"] = f_mhz;
        if (r.prop.variant) {
            double worst = 0;
            for (double t : {0.37, 1.9, 7.3}) worst = std::max(worst, phase_distance(propagator_closed_form(r.prop, t), propagator_numeric(r.spec, t)));
            j["closed_form_vs_numeric"] = worst;
        }
        if (r.spec.j_e == half) {
            const auto rho0 = initial_state(c, r);
            const auto u = make_propagator(r.prop);
            double emax = 0, tmax = 0;
            for (double t : time_grid(c, r)) {
                const double e = entanglement_E(evolve_density(rho0, u(t)));
                if (e > emax) {
                    emax = e;
                    tmax = t;
                }
            }
            j["max_E"] = emax;
            j["t_max_E_ns"] = tmax;
        }
        rep["runs"].push_back(j);
    }
    if (c.out == "-") {
        std::cout << rep.dump(2) << '\n';
    } else {
        ensure_dir(c.out);
        write_json(fs::path(c.out) / "report.json", rep);
    }
    return 0;
}

void common_flags(CLI::App* s, Config& c) {
    s->add_option("--material", c.material, "preset name (vacuum-mu, quartz, si-mustar, mulike-spin1 or a file in MUTOMO_PRESET_PATH)");
    s->add_option("--B", c.fields, "field magnitudes in Gauss (default: preset sweep)");
    s->add_option("--B-axis", c.b_axis, "field axis: x, y, z or nx,ny,nz");
    s->add_option("--aniso-axis", c.aniso_axis, "anisotropy axis: x, y, z or nx,ny,nz");
    s->add_option("--t-max-ns", c.t_max_ns, "time span in ns");
    s->add_option("--steps", c.steps, "number of time steps (bins for simulate)");
    s->add_option("--init", c.init, "muon-polarized or a JSON file {real, imag}");
    s->add_option("--out", c.out, "output directory (file for reconstruct, '-' for stdout)");
    s->add_option("--seed", c.seed, "random seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app {"muon spin tomography toolkit"};
    app.require_subcommand(1);
    Config c;
    auto* evolve = app.add_subcommand("evolve", "reduced tomogram and entanglement traces per field");
    common_flags(evolve, c);
    evolve->add_flag("--bell", c.bell, "also compute the maximal Bell number");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo histograms and tomogram estimates");
    common_flags(simulate, c);
    simulate->add_option("--detectors", c.detectors, "six, six:<deg> or a geometry JSON file");
    simulate->add_option("--n-muons", c.n_muons, "muons to launch");
    simulate->add_option("--background", c.background, "background fraction");
    simulate->add_option("--asymmetry", c.asymmetry, "decay asymmetry a");
    auto* recon = app.add_subcommand("reconstruct", "initial state from reduced tomogram series");
    recon->add_option("--measurements", c.measurements, "CSV t_ns,axis_theta,axis_phi,w[,sigma]")->required();
    recon->add_option("--plan", c.plan, "plan JSON")->required();
    recon->add_option("--out", c.out, "report JSON path or '-'");
    auto* bell = app.add_subcommand("bell", "maximal Bell number traces");
    common_flags(bell, c);
    auto* report = app.add_subcommand("report", "constants, critical field and propagator summary");
    common_flags(report, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*evolve) return cmd_evolve(c);
        if (*simulate) return cmd_simulate(c);
        if (*recon) return cmd_reconstruct(c);
        if (*bell) return cmd_bell(c);
        if (*report) return cmd_report(c);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
