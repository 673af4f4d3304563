#include "mutomo/reconstruction.hpp"

#include "mutomo/error.hpp"
#include "mutomo/materials.hpp"
#include "mutomo/spin_tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mutomo {

namespace {

constexpr int n_params = 15;

// U(t)^dag (Pi_n x I) U(t) for every plan point
std::vector<ComplexMatrix> observables(const MeasurementPlan& plan) {
    plan.validate();
    const ComplexMatrix h = plan.h();
    const int dim = static_cast<int>(h.rows()), de = dim / 2;
    EigenPropagator prop(h);
    std::vector<ComplexMatrix> pis;
    for (const auto& n : plan.directions) {
        ComplexMatrix r = rotation_matrix(half, n);
        pis.push_back(kron(r.col(0) * r.col(0).adjoint(), ComplexMatrix::Identity(de, de)));
    }
    std::vector<ComplexMatrix> out;
    for (double t : plan.times) {
        const ComplexMatrix u = prop.at(t);
        for (const auto& p : pis) out.push_back(u.adjoint() * p * u);
    }
    return out;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j, const char* what) {
    auto re = j.at("real").get<std::vector<std::vector<double>>>();
    auto im = j.at("imag").get<std::vector<std::vector<double>>>();
    const std::size_t n = re.size();
    if (n == 0 || im.size() != n) throw ValidationError(std::string(what) + ": real/imag shape mismatch");
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (re[i].size() != n || im[i].size() != n) throw ValidationError(std::string(what) + ": matrix must be square");
        for (std::size_t k = 0; k < n; ++k) m(i, k) = cplx(re[i][k], im[i][k]);
    }
    return m;
}

nlohmann::json matrix_json(const ComplexMatrix& m) {
    std::vector<std::vector<double>> re(m.rows(), std::vector<double>(m.cols())), im = re;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            re[i][k] = m(i, k).real();
            im[i][k] = m(i, k).imag();
        }
    return {{"real", re}, {"imag", im}};
}

}  // namespace

ComplexMatrix MeasurementPlan::h() const {
    if (hamiltonian) return *hamiltonian;
    return build_hamiltonian(propagator.hamiltonian, propagator.constants);
}

int MeasurementPlan::dim() const { return static_cast<int>(h().rows()); }

void MeasurementPlan::validate() const {
    if (directions.empty() || times.empty()) throw ValidationError("MeasurementPlan: need at least one direction and one time");
    for (double t : times)
        if (!std::isfinite(t)) throw ValidationError("MeasurementPlan: non-finite time");
    const ComplexMatrix hm = h();
    if (hm.rows() % 2 != 0 || !is_hermitian(hm)) throw ValidationError("MeasurementPlan: Hamiltonian must be Hermitian on muon (x) electron");
    const auto freqs = transition_frequencies(hm);
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t k = i + 1; k < times.size(); ++k) {
            const double dt = std::abs(times[i] - times[k]);
            if (dt < 1e-9) throw ValidationError("MeasurementPlan: times must be pairwise distinct");
            for (double f : freqs) {
                const double periods = dt * f / (2 * std::numbers::pi);
                if (std::abs(periods - std::round(periods)) * (2 * std::numbers::pi / f) < 1e-9)
                    throw ValidationError("MeasurementPlan: two times coincide modulo a propagator period");
            }
        }
}

std::vector<double> default_plan_times(const ComplexMatrix& h, int n) {
    if (n < 1) throw ValidationError("default_plan_times: need at least one time");
    const auto f = transition_frequencies(h);
    if (f.empty()) throw ValidationError("default_plan_times: Hamiltonian has no dynamics");
    const double beat = f.size() >= 2 && f[1] - f[0] > 1e-9 ? f[1] - f[0] : f[0];
    const double period = 2 * std::numbers::pi / beat;
    const double g = (std::sqrt(5.0) - 1) / 2;
    std::vector<double> t;
    for (int i = 1; i <= n; ++i) t.push_back(period * std::fmod(i * g, 1.0));
    std::sort(t.begin(), t.end());
    return t;
}

MeasurementPlan default_plan(const PropagatorSpec& p) {
    MeasurementPlan plan;
    plan.propagator = p;
    plan.times = default_plan_times(plan.h());
    return plan;
}

std::vector<double> forward_model(const DensityMatrix& rho0, const MeasurementPlan& plan) {
    if (rho0.dim() != plan.dim()) throw ValidationError("forward_model: state dimension does not match the plan");
    std::vector<double> out;
    for (const auto& o : observables(plan)) out.push_back((rho0.matrix() * o).trace().real());
    return out;
}

ComplexMatrix parameter_basis(int k) {
    if (k < 0 || k >= n_params) throw ValidationError("parameter_basis: index must be 0..14");
    const int i = (k + 1) / 4, j = (k + 1) % 4;
    return 0.5 * kron(pauli(i), pauli(j));
}

std::string parameter_label(int k) {
    if (k < 0 || k >= n_params) throw ValidationError("parameter_label: index must be 0..14");
    const char* l = "IXYZ";
    return {l[(k + 1) / 4], l[(k + 1) % 4]};
}

Eigen::VectorXd parameters_of(const ComplexMatrix& rho) {
    if (rho.rows() != 4) throw ValidationError("parameters_of: two-qubit states only");
    Eigen::VectorXd th(n_params);
    for (int k = 0; k < n_params; ++k) th(k) = (rho * parameter_basis(k)).trace().real();
    return th;
}

DesignMatrix design_matrix(const MeasurementPlan& plan) {
    if (plan.dim() != 4) throw ValidationError("design_matrix: two-qubit plans only");
    const auto obs = observables(plan);
    DesignMatrix d;
    d.G.resize(obs.size(), n_params);
    d.offset.resize(obs.size());
    for (std::size_t r = 0; r < obs.size(); ++r) {
        d.offset(r) = obs[r].trace().real() / 4;
        for (int k = 0; k < n_params; ++k) d.G(r, k) = (obs[r] * parameter_basis(k)).trace().real();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.G);
    d.singular_values = svd.singularValues();
    const double smax = d.singular_values.size() ? d.singular_values(0) : 0.0;
    for (Eigen::Index i = 0; i < d.singular_values.size(); ++i)
        if (d.singular_values(i) > 1e-10 * smax) ++d.rank;
    d.condition = d.rank ? smax / d.singular_values(d.rank - 1) : std::numeric_limits<double>::infinity();
    return d;
}

Identifiability identifiability(const MeasurementPlan& plan) {
    auto d = design_matrix(plan);
    return {d.rank, d.condition};
}

std::string describe_null_space(const MeasurementPlan& plan) {
    auto d = design_matrix(plan);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.G, Eigen::ComputeFullV);
    const Eigen::MatrixXd& v = svd.matrixV();
    std::ostringstream os;
    os.precision(3);
    for (int c = d.rank; c < n_params; ++c) {
        bool first = true;
        for (int k = 0; k < n_params; ++k) {
            if (std::abs(v(k, c)) < 1e-6) continue;
            os << (first ? "" : " ") << (v(k, c) < 0 ? "-" : "+") << std::abs(v(k, c)) << " " << parameter_label(k);
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

ReconstructionResult reconstruct_initial(const std::vector<double>& values, const std::vector<double>& sigmas,
                                         const MeasurementPlan& plan, const ReconstructOptions& opt) {
    auto d = design_matrix(plan);
    const std::size_t n = values.size();
    if (n != static_cast<std::size_t>(d.G.rows())) throw ValidationError("reconstruct_initial: measurement count does not match the plan");
    if (!sigmas.empty() && sigmas.size() != n) throw ValidationError("reconstruct_initial: sigma count does not match the plan");
    if (d.rank < n_params && !opt.min_norm)
        throw NumericError("reconstruct_initial: plan is not identifiable (rank " + std::to_string(d.rank) +
                           " < 15); unobservable combinations:\n" + describe_null_space(plan));
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!(sigmas[i] > 0)) throw ValidationError("reconstruct_initial: sigmas must be positive");
        w(i) = 1 / sigmas[i];
    }
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) y(i) = values[i] - d.offset(i);
    const Eigen::MatrixXd a = w.asDiagonal() * d.G;
    const Eigen::VectorXd b = w.cwiseProduct(y);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd theta = svd.solve(b);

    ReconstructionResult r;
    r.rank = d.rank;
    r.condition = d.condition;
    r.residual_norm = (a * theta - b).norm();
    r.unprojected = ComplexMatrix::Identity(4, 4) / 4.0;
    for (int k = 0; k < n_params; ++k) r.unprojected += theta(k) * parameter_basis(k);

    // parameter covariance -> eigenvalue noise scale
    const auto& sv = svd.singularValues();
    double sigma_eig = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) sigma_eig = std::max(sigma_eig, 1 / sv(i));

    auto eig = eig_hermitian(r.unprojected);
    Eigen::VectorXd lam = eig.values;
    double shift = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam(i) < 0) {
            r.clipped = true;
            shift = std::max(shift, -lam(i));
            lam(i) = 0;
        }
    if (r.clipped) {
        if (lam.sum() <= 0) throw NumericError("reconstruct_initial: estimate has no positive part");
        lam /= lam.sum();
        r.clip_significant = sigmas.empty() ? false : shift > 3 * sigma_eig;
        ComplexMatrix m = eig.vectors * lam.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
        r.rho = DensityMatrix(0.5 * (m + m.adjoint()));
    } else {
        r.rho = DensityMatrix(r.unprojected);
    }
    return r;
}

nlohmann::json to_json(const HamiltonianSpec& s) {
    return {{"family", family_name(s.family)},
            {"A", s.A},
            {"deltaA", s.deltaA},
            {"omega0", s.omega0},
            {"B", {s.B(0), s.B(1), s.B(2)}},
            {"aniso_axis", {s.aniso_axis.n(0), s.aniso_axis.n(1), s.aniso_axis.n(2)}},
            {"j_e", s.j_e.value()}};
}

HamiltonianSpec hamiltonian_from_json(const nlohmann::json& j) {
    try {
        HamiltonianSpec s;
        s.family = parse_family(j.at("family").get<std::string>());
        s.A = j.value("A", 0.0);
        s.deltaA = j.value("deltaA", 0.0);
        s.omega0 = j.value("omega0", 0.0);
        if (j.contains("B")) {
            auto b = j["B"].get<std::vector<double>>();
            if (b.size() != 3) throw ValidationError("hamiltonian: B needs 3 components");
            s.B = Vec3(b[0], b[1], b[2]);
        }
        if (j.contains("aniso_axis")) {
            auto n = j["aniso_axis"].get<std::vector<double>>();
            if (n.size() != 3) throw ValidationError("hamiltonian: aniso_axis needs 3 components");
            s.aniso_axis = Direction::from_vector(Vec3(n[0], n[1], n[2]));
        }
        s.j_e = HalfInt(j.value("j_e", 0.5));
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("hamiltonian json: ") + e.what());
    }
}

nlohmann::json to_json(const MeasurementPlan& p) {
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& d : p.directions) dirs.push_back({d.theta, d.phi});
    nlohmann::json j = {{"directions", dirs}, {"times_ns", p.times}};
    if (p.hamiltonian) {
        j["hamiltonian_matrix"] = matrix_json(*p.hamiltonian);
    } else {
        j["hamiltonian"] = to_json(p.propagator.hamiltonian);
        j["method"] = p.propagator.method == PropagatorSpec::Method::ClosedForm ? "closed-form" : "numeric";
    }
    return j;
}

MeasurementPlan plan_from_json(const nlohmann::json& j) {
    try {
        MeasurementPlan p;
        if (j.contains("hamiltonian_matrix")) {
            p.hamiltonian = matrix_from_json(j["hamiltonian_matrix"], "plan hamiltonian_matrix");
        } else {
            p.propagator = make_propagator_spec(hamiltonian_from_json(j.at("hamiltonian")));
        }
        if (j.contains("directions")) {
            p.directions.clear();
            for (const auto& d : j["directions"]) {
                auto a = d.get<std::vector<double>>();
                if (a.size() == 2) p.directions.push_back(Direction::from_angles(a[0], a[1]));
                else if (a.size() == 3) p.directions.push_back(Direction::from_vector(Vec3(a[0], a[1], a[2])));
                else throw ValidationError("plan: direction needs (theta, phi) or (x, y, z)");
            }
        }
        if (j.contains("times_ns")) p.times = j["times_ns"].get<std::vector<double>>();
        else p.times = default_plan_times(p.h());
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("plan json: ") + e.what());
    }
}

nlohmann::json report_json(const ReconstructionResult& r, const MeasurementPlan& p) {
    std::vector<std::vector<double>> re(4, std::vector<double>(4)), im = re;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            re[i][k] = r.rho.matrix()(i, k).real();
            im[i][k] = r.rho.matrix()(i, k).imag();
        }
    return {{"plan", to_json(p)},
            {"rank", r.rank},
            {"condition_number", r.condition},
            {"rho0_real", re},
            {"rho0_imag", im},
            {"residual_norm", r.residual_norm},
            {"clipped", r.clipped},
            {"clip_significant", r.clip_significant}};
}

}  // namespace mutomo
