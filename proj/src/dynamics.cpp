#include "mutomo/dynamics.hpp"

#include "mutomo/error.hpp"
#include "mutomo/spin_tomography.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace mutomo {

namespace {

constexpr double two_pi = 2 * std::numbers::pi;

bool parallel(const Vec3& v, const Vec3& axis) {
    double n = v.norm();
    return n == 0.0 || v.cross(axis).norm() <= 1e-12 * n;
}

// num * sin(den t) / den, continuous at den = 0
double sdiv(double num, double den, double t) {
    if (std::abs(den) < 1e-300) return num * t;
    return num * std::sin(den * t) / den;
}

double signed_component(const HamiltonianSpec& s, ClosedFormVariant v) {
    switch (v) {
        case ClosedFormVariant::MuX: return s.B(0);
        case ClosedFormVariant::MuY: return s.B(1);
        default: return s.B(2);
    }
}

ComplexMatrix mu_x(const PropagatorScalars& p, double t) {
    const cplx em = std::exp(-I_ * p.a * t), ep = std::exp(I_ * p.a * t);
    const double cb = std::cos(p.b_minus * t), sb = std::sin(p.b_minus * t);
    const double cc = std::cos(p.c * t);
    const double s2a = sdiv(2 * p.a, p.c, t), sbp = sdiv(p.b_plus, p.c, t);
    ComplexMatrix u(4, 4);
    u(0, 0) = u(3, 3) = 0.5 * (em * cb + ep * (cc - I_ * s2a));
    u(1, 1) = u(2, 2) = 0.5 * (em * cb + ep * (cc + I_ * s2a));
    u(0, 1) = u(2, 3) = -0.5 * I_ * (-em * sb + sbp * ep);
    u(0, 2) = u(1, 3) = -0.5 * I_ * (-em * sb - sbp * ep);
    u(0, 3) = 0.5 * (em * cb - ep * (cc - I_ * s2a));
    u(1, 2) = 0.5 * (em * cb - ep * (cc + I_ * s2a));
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < i; ++k) u(i, k) = u(k, i);
    return u;
}

ComplexMatrix mu_star_xz(const PropagatorScalars& p, double t, double sign14) {
    const cplx em = std::exp(-I_ * p.a * t), ep = std::exp(I_ * p.a * t);
    const double cf = std::cos(p.f * t), ch = std::cos(p.h * t);
    ComplexMatrix u = ComplexMatrix::Zero(4, 4);
    u(0, 0) = em * (cf + I_ * sdiv(p.b_minus, p.f, t));
    u(3, 3) = em * (cf - I_ * sdiv(p.b_minus, p.f, t));
    u(0, 3) = u(3, 0) = sign14 * (-I_) * em * sdiv(p.d, p.f, t);
    u(1, 1) = ep * (ch + I_ * sdiv(p.b_plus, p.h, t));
    u(2, 2) = ep * (ch - I_ * sdiv(p.b_plus, p.h, t));
    u(1, 2) = u(2, 1) = -I_ * ep * sdiv(2 * p.a + p.d, p.h, t);
    return u;
}

}  // namespace

double PhysicalConstants::gamma_e() const { return two_pi * g_e * mu_B_over_h * 1e-3; }

double PhysicalConstants::gamma_mu() const { return two_pi * g_mu * mu_mu_over_mu_p * mu_p_over_h * 1e-3; }

double PhysicalConstants::critical_field(double A) const { return A / (gamma_e() - gamma_mu()); }

double mhz_to_rad_per_ns(double mhz, bool angular) { return (angular ? 1.0 : two_pi) * mhz * 1e-3; }

void HamiltonianSpec::validate() const {
    if (j_e != half && j_e != HalfInt(1.0) && j_e != HalfInt(1.5))
        throw ValidationError("HamiltonianSpec: electron spin must be 1/2, 1 or 3/2");
    if (!B.allFinite() || !std::isfinite(A) || !std::isfinite(deltaA) || !std::isfinite(omega0))
        throw ValidationError("HamiltonianSpec: non-finite parameter");
    if (std::abs(aniso_axis.n.norm() - 1.0) > 1e-12) throw ValidationError("HamiltonianSpec: anisotropy axis not a unit vector");
    switch (family) {
        case HamiltonianFamily::HyperfineOnly:
            if (!(omega0 > 0)) throw ValidationError("HamiltonianSpec: hyperfine-only family needs omega0 > 0");
            if (B.norm() != 0.0 || deltaA != 0.0) throw ValidationError("HamiltonianSpec: hyperfine-only family takes no field or anisotropy");
            break;
        case HamiltonianFamily::IsotropicMu:
            if (!(A > 0)) throw ValidationError("HamiltonianSpec: A must be positive");
            if (deltaA != 0.0) throw ValidationError("HamiltonianSpec: isotropic family takes no anisotropy");
            break;
        case HamiltonianFamily::AnisotropicMuStar:
            if (!(A > 0)) throw ValidationError("HamiltonianSpec: A must be positive");
            break;
    }
}

ComplexMatrix build_hamiltonian(const HamiltonianSpec& spec, const PhysicalConstants& k) {
    spec.validate();
    const auto sm = spin_matrices(half), se = spin_matrices(spec.j_e);
    const ComplexMatrix im = ComplexMatrix::Identity(2, 2), ie = ComplexMatrix::Identity(spin_dim(spec.j_e), spin_dim(spec.j_e));
    ComplexMatrix jj = kron(sm.x, se.x) + kron(sm.y, se.y) + kron(sm.z, se.z);
    ComplexMatrix h = spec.coupling() * jj;
    if (spec.family != HamiltonianFamily::HyperfineOnly) {
        h += -k.gamma_mu() * kron(spin_along(sm, spec.B), ie) + k.gamma_e() * kron(im, spin_along(se, spec.B));
    }
    if (spec.family == HamiltonianFamily::AnisotropicMuStar)
        h += spec.deltaA * kron(spin_along(sm, spec.aniso_axis.n), spin_along(se, spec.aniso_axis.n));
    return 0.5 * (h + h.adjoint());
}

std::string variant_name(ClosedFormVariant v) {
    switch (v) {
        case ClosedFormVariant::Hyperfine: return "hf";
        case ClosedFormVariant::MuZ: return "mu-z";
        case ClosedFormVariant::MuX: return "mu-x";
        case ClosedFormVariant::MuY: return "mu-y";
        case ClosedFormVariant::MuStarZZ: return "mustar-zz";
        case ClosedFormVariant::MuStarXZ: return "mustar-xz";
        case ClosedFormVariant::MuStarYZ: return "mustar-yz";
        case ClosedFormVariant::MuLikeSpin1: return "mulike-spin1-hf";
    }
    return "?";
}

std::optional<ClosedFormVariant> detect_variant(const HamiltonianSpec& s) {
    s.validate();
    const Vec3 x(1, 0, 0), y(0, 1, 0), z(0, 0, 1);
    const bool qubit = s.j_e == half, spin1 = s.j_e == HalfInt(1.0);
    switch (s.family) {
        case HamiltonianFamily::HyperfineOnly:
            if (qubit) return ClosedFormVariant::Hyperfine;
            if (spin1) return ClosedFormVariant::MuLikeSpin1;
            return std::nullopt;
        case HamiltonianFamily::IsotropicMu:
            if (spin1 && s.B.norm() == 0.0) return ClosedFormVariant::MuLikeSpin1;
            if (!qubit) return std::nullopt;
            if (parallel(s.B, z)) return ClosedFormVariant::MuZ;
            if (parallel(s.B, x)) return ClosedFormVariant::MuX;
            if (parallel(s.B, y)) return ClosedFormVariant::MuY;
            return std::nullopt;
        case HamiltonianFamily::AnisotropicMuStar:
            if (!qubit || !parallel(s.B, z)) return std::nullopt;
            if (parallel(s.aniso_axis.n, z)) return ClosedFormVariant::MuStarZZ;
            if (parallel(s.aniso_axis.n, x)) return ClosedFormVariant::MuStarXZ;
            if (parallel(s.aniso_axis.n, y)) return ClosedFormVariant::MuStarYZ;
            return std::nullopt;
    }
    return std::nullopt;
}

PropagatorSpec make_propagator_spec(const HamiltonianSpec& spec, const PhysicalConstants& k) {
    PropagatorSpec p;
    p.hamiltonian = spec;
    p.constants = k;
    p.variant = detect_variant(spec);
    p.method = p.variant ? PropagatorSpec::Method::ClosedForm : PropagatorSpec::Method::Numeric;
    return p;
}

PropagatorScalars propagator_scalars(const HamiltonianSpec& spec, const PhysicalConstants& k) {
    auto v = detect_variant(spec);
    const double B = signed_component(spec, v.value_or(ClosedFormVariant::MuZ));
    const double A = spec.coupling(), dA = spec.family == HamiltonianFamily::AnisotropicMuStar ? spec.deltaA : 0.0;
    const double gm = k.gamma_mu(), ge = k.gamma_e();
    PropagatorScalars p;
    p.a = A / 4;
    p.b_plus = B * (gm + ge) / 2;
    p.b_minus = B * (gm - ge) / 2;
    p.c = std::sqrt(A * A + B * B * (gm + ge) * (gm + ge)) / 2;
    p.d = dA / 4;
    p.f = std::sqrt(dA * dA + 4 * B * B * (gm - ge) * (gm - ge)) / 4;
    p.h = std::sqrt((A + dA / 2) * (A + dA / 2) + B * B * (gm + ge) * (gm + ge)) / 2;
    return p;
}

ComplexMatrix propagator_closed_form(ClosedFormVariant v, const HamiltonianSpec& spec, double t, const PhysicalConstants& k) {
    auto detected = detect_variant(spec);
    if (!detected || *detected != v)
        throw ValidationError("propagator_closed_form: spec orientation does not match variant " + variant_name(v));
    const PropagatorScalars p = propagator_scalars(spec, k);
    switch (v) {
        case ClosedFormVariant::Hyperfine: {
            const double w = spec.coupling();
            const cplx e = std::exp(I_ * w * t);
            ComplexMatrix u = ComplexMatrix::Zero(4, 4);
            u(0, 0) = u(3, 3) = 2.0;
            u(1, 1) = u(2, 2) = 1.0 + e;
            u(1, 2) = u(2, 1) = 1.0 - e;
            return 0.5 * std::exp(-I_ * w * t / 4.0) * u;
        }
        case ClosedFormVariant::MuZ:
        case ClosedFormVariant::MuStarZZ: {
            const double ad = v == ClosedFormVariant::MuZ ? p.a : p.a + p.d;
            ComplexMatrix u = ComplexMatrix::Zero(4, 4);
            u(0, 0) = std::exp(-I_ * (2 * ad - p.b_minus) * t);
            u(1, 1) = std::cos(p.c * t) + I_ * sdiv(p.b_plus, p.c, t);
            u(1, 2) = u(2, 1) = -I_ * sdiv(2 * p.a, p.c, t);
            u(2, 2) = std::cos(p.c * t) - I_ * sdiv(p.b_plus, p.c, t);
            u(3, 3) = std::exp(-I_ * (2 * ad + p.b_minus) * t);
            return std::exp(I_ * ad * t) * u;
        }
        case ClosedFormVariant::MuX: return mu_x(p, t);
        case ClosedFormVariant::MuY: {
            ComplexMatrix ux = mu_x(p, t);
            Eigen::Matrix4cd s;
            s << 1.0, -I_, -I_, -1.0, I_, 1.0, 1.0, -I_, I_, 1.0, 1.0, -I_, -1.0, I_, I_, 1.0;
            return ux.cwiseProduct(ComplexMatrix(s));
        }
        case ClosedFormVariant::MuStarXZ: return mu_star_xz(p, t, 1.0);
        case ClosedFormVariant::MuStarYZ: return mu_star_xz(p, t, -1.0);
        case ClosedFormVariant::MuLikeSpin1: {
            const double A = spec.coupling();
            const cplx ph = std::exp(I_ * A * t / 4.0);
            const double c3 = std::cos(3 * A * t / 4), s3 = std::sin(3 * A * t / 4);
            const cplx v1 = std::exp(-I_ * A * t / 2.0);
            const cplx v2 = -I_ * ph * (2 * std::sqrt(2.0) / 3) * s3;
            const cplx vp = ph * (c3 + I_ / 3.0 * s3), vm = ph * (c3 - I_ / 3.0 * s3);
            ComplexMatrix u = ComplexMatrix::Zero(6, 6);
            u(0, 0) = u(5, 5) = v1;
            u(1, 1) = u(4, 4) = vm;
            u(2, 2) = u(3, 3) = vp;
            u(1, 3) = u(3, 1) = u(2, 4) = u(4, 2) = v2;
            return u;
        }
    }
    throw ValidationError("propagator_closed_form: unknown variant");
}

ComplexMatrix propagator_closed_form(const PropagatorSpec& p, double t) {
    if (!p.variant) throw ValidationError("propagator_closed_form: orientation not tabulated, use the numeric propagator");
    return propagator_closed_form(*p.variant, p.hamiltonian, t, p.constants);
}

ComplexMatrix propagator_numeric(const HamiltonianSpec& spec, double t, const PhysicalConstants& k) {
    return propagator(build_hamiltonian(spec, k), t);
}

PropagatorFn make_propagator(const PropagatorSpec& p) {
    if (p.method == PropagatorSpec::Method::ClosedForm) {
        if (!p.variant) throw ValidationError("make_propagator: closed form requested without a tabulated variant");
        return [p](double t) { return propagator_closed_form(p, t); };
    }
    auto e = std::make_shared<EigenPropagator>(build_hamiltonian(p.hamiltonian, p.constants));
    return [e](double t) { return e->at(t); };
}

DensityMatrix evolve_density(const DensityMatrix& rho0, const ComplexMatrix& u) {
    if (u.rows() != rho0.dim() || !is_unitary(u, 1e-10)) throw ValidationError("evolve_density: U must be unitary of matching size");
    ComplexMatrix r = u * rho0.matrix() * u.adjoint();
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

DensityMatrix muon_polarized_state(Spin j_e) {
    ComplexMatrix up = ComplexMatrix::Zero(2, 2);
    up(0, 0) = 1;
    const int de = spin_dim(j_e);
    return DensityMatrix(kron(up, ComplexMatrix::Identity(de, de) / double(de)));
}

UnitaryTomogram unitary_tomogram_of(const DensityMatrix& rho0) {
    return [rho0](const ComplexMatrix& u) { return individual_tomogram_unitary(rho0, u); };
}

std::vector<TwoSpinTomogram> evolve_tomogram_unitary(const UnitaryTomogram& w0, const TwoSpinBasis& basis,
                                                     const PropagatorFn& u, const std::vector<double>& times,
                                                     const QuadratureGrid& grid_mu, const QuadratureGrid& grid_e) {
    std::vector<ComplexMatrix> rm, re;
    for (const auto& d : grid_mu.nodes) rm.push_back(rotation_matrix(basis.j_mu, d));
    for (const auto& d : grid_e.nodes) re.push_back(rotation_matrix(basis.j_e, d));
    std::vector<TwoSpinTomogram> out;
    for (double t : times) {
        const ComplexMatrix ut = u(t);
        TwoSpinTomogram w {basis, grid_mu, grid_e, {}};
        w.values.reserve(grid_mu.size() * grid_e.size() * basis.dim());
        for (const auto& a : rm)
            for (const auto& b : re) {
                auto p = w0(kron(a, b).adjoint() * ut);
                w.values.insert(w.values.end(), p.begin(), p.end());
            }
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<TwoSpinTomogram> evolve_tomogram(const TwoSpinTomogram& w0, const PropagatorFn& u,
                                             const std::vector<double>& times) {
    // sum over x~ of w0(x~) U D(x~) U^dag is linear in w0, so the quantizer sum is formed once
    const ComplexMatrix rho0 = reconstruct_two_spin_operator(w0);
    std::vector<TwoSpinTomogram> out;
    for (double t : times) {
        const ComplexMatrix ut = u(t);
        if (!is_unitary(ut, 1e-10)) throw ValidationError("evolve_tomogram: propagator is not unitary");
        out.push_back(sample_two_spin_symbol(ut * rho0 * ut.adjoint(), w0.basis, w0.grid_mu, w0.grid_e));
    }
    return out;
}

double analytic_free_mu(double m_mu, const Direction& n_mu, double m_e, const Direction& n_e, double t, double omega0) {
    if (!(omega0 > 0)) throw ValidationError("analytic_free_mu: omega0 must be positive");
    const double zm = n_mu.n(2), ze = n_e.n(2);
    const double cross = n_mu.n.cross(n_e.n)(2);
    return 0.25 * (1 + m_mu * zm + m_e * ze + (m_mu * zm - m_e * ze) * std::cos(omega0 * t) +
                   2 * m_mu * m_e * cross * std::sin(omega0 * t));
}

double analytic_reduced_free_mu(double m_mu, const Direction& n_mu, double t, double omega0) {
    if (!(omega0 > 0)) throw ValidationError("analytic_reduced_free_mu: omega0 must be positive");
    return 0.5 * (1 + m_mu * n_mu.n(2) * (1 + std::cos(omega0 * t)));
}

std::vector<double> transition_frequencies(const ComplexMatrix& h, double tol) {
    auto e = eig_hermitian(h).values;
    std::vector<double> f;
    for (Eigen::Index i = 0; i < e.size(); ++i)
        for (Eigen::Index k = i + 1; k < e.size(); ++k) {
            double d = std::abs(e(k) - e(i));
            if (d > tol) f.push_back(d);
        }
    std::sort(f.begin(), f.end());
    std::vector<double> out;
    for (double v : f)
        if (out.empty() || v - out.back() > tol * std::max(1.0, v)) out.push_back(v);
    return out;
}

std::vector<double> default_time_grid(const ComplexMatrix& h, double t_max, int per_period) {
    if (!(t_max > 0) || per_period < 2) throw ValidationError("default_time_grid: need t_max > 0 and per_period >= 2");
    auto f = transition_frequencies(h);
    double dt = t_max / per_period;
    if (!f.empty()) dt = std::min(two_pi / f.front() / per_period, two_pi / f.back() / 16);
    const long n = std::max(1L, static_cast<long>(std::ceil(t_max / dt - 1e-9)));
    if (n > 5'000'000) throw ValidationError("default_time_grid: too many time points, give explicit steps");
    std::vector<double> t(n + 1);
    for (long i = 0; i <= n; ++i) t[i] = t_max * double(i) / double(n);
    return t;
}

}  // namespace mutomo
