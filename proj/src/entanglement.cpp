#include "mutomo/entanglement.hpp"

#include "mutomo/error.hpp"
#include "mutomo/spin_tomography.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace mutomo {

namespace {

constexpr double pi = std::numbers::pi;

void require_two_qubit(int dim, const char* what) {
    if (dim != 4) throw ValidationError(std::string(what) + ": two-qubit state required");
}

Vec3 unit(double theta, double phi) {
    return Vec3(std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta));
}

struct Correlations {
    Vec3 r, s;
    Eigen::Matrix3d T;
};

Correlations correlations(const ComplexMatrix& rho) {
    Correlations c;
    const ComplexMatrix id = pauli(0);
    for (int i = 0; i < 3; ++i) {
        c.r(i) = (rho * kron(pauli(i + 1), id)).trace().real();
        c.s(i) = (rho * kron(id, pauli(i + 1))).trace().real();
        for (int k = 0; k < 3; ++k) c.T(i, k) = (rho * kron(pauli(i + 1), pauli(k + 1))).trace().real();
    }
    return c;
}

// CHSH combination from x = 8 angles; equals bell_number(bell_cells(.)) exactly
double chsh(const Correlations& c, const double* x) {
    Vec3 a1 = unit(x[0], x[1]), a2 = unit(x[2], x[3]), b1 = unit(x[4], x[5]), b2 = unit(x[6], x[7]);
    auto e = [&](const Vec3& a, const Vec3& b) { return a.dot(c.T * b); };
    return e(a1, b1) + e(a1, b2) + e(a2, b1) - e(a2, b2);
}

// one angle at a time: coarse scan for the bracket, golden section inside it
void coordinate_ascent(const Correlations& c, double* x) {
    constexpr int scan = 12;
    constexpr double g = 0.6180339887498949;
    double best = chsh(c, x);
    for (int sweep = 0; sweep < 200; ++sweep) {
        const double start = best;
        for (int k = 0; k < 8; ++k) {
            const double x0 = x[k];
            double bx = x0, bv = best;
            for (int s = 1; s < scan; ++s) {
                x[k] = x0 + 2 * pi * s / scan;
                double v = chsh(c, x);
                if (v > bv) { bv = v; bx = x[k]; }
            }
            double lo = bx - 2 * pi / scan, hi = bx + 2 * pi / scan;
            double p = hi - g * (hi - lo), q = lo + g * (hi - lo);
            x[k] = p; double fp = chsh(c, x);
            x[k] = q; double fq = chsh(c, x);
            while (hi - lo > 1e-9) {
                if (fp > fq) { hi = q; q = p; fq = fp; p = hi - g * (hi - lo); x[k] = p; fp = chsh(c, x); }
                else { lo = p; p = q; fp = fq; q = lo + g * (hi - lo); x[k] = q; fq = chsh(c, x); }
            }
            x[k] = 0.5 * (lo + hi);
            double v = chsh(c, x);
            if (v >= bv) best = v;
            else { x[k] = bx; best = bv; }
        }
        if (best - start < 1e-13) break;
    }
}

Direction to_direction(double theta, double phi) { return Direction::from_vector(unit(theta, phi)); }

// per-qubit kernel factor
cplx kernel_factor(const SpinLabel& p, const SpinLabel& q, const SpinLabel& o) {
    return 0.25 + 9 * p.m * q.m * p.n.dot(q.n) + 3 * o.m * p.m * o.n.dot(p.n) + 3 * o.m * q.m * o.n.dot(q.n) +
           I_ * 18.0 * o.m * p.m * q.m * o.n.dot(p.n.cross(q.n));
}

// star products of qubit-pair symbols on a product grid
class StarAlgebra {
public:
    StarAlgebra(const QuadratureGrid& gm, const QuadratureGrid& ge) : mu_(labels(gm)), e_(labels(ge)) {
        km_ = table(mu_, mu_);
        ke_ = table(e_, e_);
    }

    using Symbol = Eigen::MatrixXcd;  // [mu label][e label]

    std::size_t nmu() const { return mu_.size(); }
    std::size_t ne() const { return e_.size(); }

    Symbol star(const Symbol& f, const Symbol& g) const { return contract(f, g, km_, ke_, mu_.size(), e_.size()); }

    // sum over output projections at directions (n_mu, n_e)
    cplx star_trace(const Symbol& f, const Symbol& g, const Vec3& n_mu, const Vec3& n_e) const {
        std::vector<SpinLabel> om {{0.5, n_mu}, {-0.5, n_mu}}, oe {{0.5, n_e}, {-0.5, n_e}};
        Symbol h = contract(f, g, table(mu_, om), table(e_, oe), 2, 2);
        return h.sum();
    }

    Symbol unit_symbol() const { return Symbol::Ones(mu_.size(), e_.size()); }

private:
    struct Label : SpinLabel {
        double w = 0;
    };

    static std::vector<Label> labels(const QuadratureGrid& g) {
        std::vector<Label> out;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (double m : {0.5, -0.5}) {
                Label l;
                l.m = m;
                l.n = g.nodes[i].n;
                l.w = g.weights[i];
                out.push_back(l);
            }
        return out;
    }

    // [p][q][o], flattened; quadrature weights of p and q folded in
    template <class Out>
    static std::vector<cplx> table(const std::vector<Label>& in, const std::vector<Out>& out) {
        std::vector<cplx> t(in.size() * in.size() * out.size());
        std::size_t k = 0;
        for (const auto& p : in)
            for (const auto& q : in)
                for (const auto& o : out) t[k++] = p.w * q.w * kernel_factor(p, q, o);
        return t;
    }

    Symbol contract(const Symbol& f, const Symbol& g, const std::vector<cplx>& k1, const std::vector<cplx>& k2,
                    std::size_t o1, std::size_t o2) const {
        const std::size_t L1 = mu_.size(), L2 = e_.size();
        // Y[a''][b'][b] = sum_b'' g[a''][b''] k2[b'][b''][b]
        std::vector<cplx> Y(L1 * L2 * o2, 0.0);
        for (std::size_t a2 = 0; a2 < L1; ++a2)
            for (std::size_t b1 = 0; b1 < L2; ++b1)
                for (std::size_t b2 = 0; b2 < L2; ++b2) {
                    const cplx gv = g(a2, b2);
                    const cplx* kk = &k2[(b1 * L2 + b2) * o2];
                    cplx* y = &Y[(a2 * L2 + b1) * o2];
                    for (std::size_t b = 0; b < o2; ++b) y[b] += gv * kk[b];
                }
        // T[a'][a''][b] = sum_b' f[a'][b'] Y[a''][b'][b]
        std::vector<cplx> T(L1 * L1 * o2, 0.0);
        for (std::size_t a1 = 0; a1 < L1; ++a1)
            for (std::size_t a2 = 0; a2 < L1; ++a2) {
                cplx* t = &T[(a1 * L1 + a2) * o2];
                for (std::size_t b1 = 0; b1 < L2; ++b1) {
                    const cplx fv = f(a1, b1);
                    const cplx* y = &Y[(a2 * L2 + b1) * o2];
                    for (std::size_t b = 0; b < o2; ++b) t[b] += fv * y[b];
                }
            }
        // h[a][b] = sum_{a',a''} k1[a'][a''][a] T[a'][a''][b]
        Symbol h = Symbol::Zero(o1, o2);
        for (std::size_t a1 = 0; a1 < L1; ++a1)
            for (std::size_t a2 = 0; a2 < L1; ++a2) {
                const cplx* kk = &k1[(a1 * L1 + a2) * o1];
                const cplx* t = &T[(a1 * L1 + a2) * o2];
                for (std::size_t a = 0; a < o1; ++a)
                    for (std::size_t b = 0; b < o2; ++b) h(a, b) += kk[a] * t[b];
            }
        return h;
    }

    std::vector<Label> mu_, e_;
    std::vector<cplx> km_, ke_;
};

}  // namespace

Eigen::Matrix4d bell_cells(const DensityMatrix& rho, const BellSetting& s) {
    require_two_qubit(rho.dim(), "bell_cells");
    const Direction* mu[4] = {&s.n1_mu, &s.n1_mu, &s.n2_mu, &s.n2_mu};
    const Direction* e[4] = {&s.n1_e, &s.n2_e, &s.n1_e, &s.n2_e};
    Eigen::Matrix4d w;
    for (int c = 0; c < 4; ++c) {
        auto p = individual_tomogram(rho, *mu[c], *e[c]);
        for (int r = 0; r < 4; ++r) w(r, c) = p[r];
    }
    return w;
}

const Eigen::Matrix4d& bell_sign_matrix() {
    static const Eigen::Matrix4d m = [] {
        Eigen::Matrix4d s;
        s << 1, -1, -1, 1, 1, -1, -1, 1, 1, -1, -1, 1, -1, 1, 1, -1;
        return s;
    }();
    return m;
}

double bell_number(const Eigen::Matrix4d& cells) {
    for (int c = 0; c < 4; ++c)
        if (std::abs(cells.col(c).sum() - 1.0) > 1e-8) throw ValidationError("bell_number: column does not sum to 1");
    return (bell_sign_matrix() * cells).trace();
}

BellMaximum max_bell(const DensityMatrix& rho, std::uint64_t seed, int starts) {
    require_two_qubit(rho.dim(), "max_bell");
    if (starts < 1) throw ValidationError("max_bell: need at least one start");
    const Correlations c = correlations(rho.matrix());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double best = -std::numeric_limits<double>::infinity();
    double bx[8] = {};
    for (int s = 0; s < starts; ++s) {
        double x[8];
        for (int k = 0; k < 8; k += 2) {
            x[k] = std::acos(2 * u(rng) - 1);
            x[k + 1] = 2 * pi * u(rng);
        }
        coordinate_ascent(c, x);
        double v = chsh(c, x);
        if (v > best) {
            best = v;
            std::copy(x, x + 8, bx);
        }
    }
    BellMaximum r;
    r.setting = {to_direction(bx[0], bx[1]), to_direction(bx[2], bx[3]), to_direction(bx[4], bx[5]),
                 to_direction(bx[6], bx[7])};
    r.value = std::abs(bell_number(bell_cells(rho, r.setting)));
    return r;
}

TwoSpinTomogram ppt_tomogram(const TwoSpinTomogram& w) {
    auto map = w.grid_mu.reflection_map();
    TwoSpinTomogram out = w;
    for (std::size_t i = 0; i < w.grid_mu.size(); ++i)
        for (std::size_t k = 0; k < w.grid_e.size(); ++k)
            for (int a = 0; a < w.basis.dim_mu(); ++a)
                for (int b = 0; b < w.basis.dim_e(); ++b) out.values[out.index(i, k, a, b)] = w.at(map[i], k, a, b);
    return out;
}

PositivityCoefficients positivity_coefficients(const ComplexMatrix& lambda) {
    if (lambda.rows() != 4 || lambda.cols() != 4) throw ValidationError("positivity_coefficients: 4x4 matrix required");
    if (!is_hermitian(lambda, 1e-10)) throw ValidationError("positivity_coefficients: matrix is not Hermitian");
    if (std::abs(lambda.trace() - 1.0) > 1e-10) throw ValidationError("positivity_coefficients: trace differs from 1");
    const ComplexMatrix l2 = lambda * lambda;
    const double t2 = l2.trace().real(), t3 = (l2 * lambda).trace().real(), t4 = (l2 * l2).trace().real();
    return {(1 - t2) / 2, (1 - 3 * t2 + 2 * t3) / 6, (1 - 6 * t2 + 3 * t2 * t2 + 8 * t3 - 6 * t4) / 24};
}

double entanglement_E(const DensityMatrix& rho) {
    require_two_qubit(rho.dim(), "entanglement_E");
    auto m = positivity_coefficients(partial_transpose(rho.matrix(), {2, 2}, Subsystem::A));
    return std::abs(m.M3) + std::abs(m.M4) - m.M3 - m.M4;
}

double negativity(const DensityMatrix& rho, SubsystemDims dims) {
    if (dims.dimA != 2 || (dims.dimB != 2 && dims.dimB != 3))
        throw ValidationError("negativity: only 2x2 and 2x3 systems are supported");
    if (rho.dim() != dims.total()) throw ValidationError("negativity: dimension mismatch");
    auto e = eig_hermitian(partial_transpose(rho.matrix(), dims, Subsystem::A));
    double s = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i)
        if (e.values(i) < 0) s -= e.values(i);
    return s;
}

cplx star_kernel(const QubitPair& primed, const QubitPair& double_primed, const QubitPair& out) {
    cplx k = 1.0;
    for (int i = 0; i < 2; ++i) {
        for (const auto* l : {&primed[i], &double_primed[i], &out[i]})
            if (std::abs(std::abs(l->m) - 0.5) > 1e-12) throw ValidationError("star_kernel: projections must be +-1/2");
        k *= kernel_factor(primed[i], double_primed[i], out[i]);
    }
    return k;
}

std::pair<double, double> tomographic_M34(const TwoSpinTomogram& w, const Direction& n_mu, const Direction& n_e) {
    if (w.basis.j_mu != half || w.basis.j_e != half) throw ValidationError("tomographic_M34: two-qubit tomogram required");
    if (w.grid_mu.degree < 2 || w.grid_e.degree < 2)
        throw ValidationError("tomographic_M34: star integrals need quadrature degree >= 2 on both factors");
    if (w.values.size() != w.grid_mu.size() * w.grid_e.size() * 4)
        throw ValidationError("tomographic_M34: sample count mismatch");
    StarAlgebra alg(w.grid_mu, w.grid_e);
    StarAlgebra::Symbol f(alg.nmu(), alg.ne());
    for (std::size_t i = 0; i < w.grid_mu.size(); ++i)
        for (std::size_t k = 0; k < w.grid_e.size(); ++k)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) f(2 * i + a, 2 * k + b) = w.at(i, k, a, b);
    const auto f2 = alg.star(f, f);
    const auto f3 = alg.star(f, f2);
    const double s1 = alg.star_trace(f, alg.unit_symbol(), n_mu.n, n_e.n).real();
    const double s2 = alg.star_trace(f, f, n_mu.n, n_e.n).real();
    const double s3 = alg.star_trace(f, f2, n_mu.n, n_e.n).real();
    const double s4 = alg.star_trace(f, f3, n_mu.n, n_e.n).real();
    const double m3 = (s1 - 3 * s2 + 2 * s3) / 6;
    const double m4 = (3 * s2 * s2 + s1 - 6 * s2 + 8 * s3 - 6 * s4) / 24;
    return {m3, m4};
}

double tomographic_E(const TwoSpinTomogram& w) {
    auto [m3, m4] = tomographic_M34(ppt_tomogram(w));
    return std::abs(m3) + std::abs(m4) - m3 - m4;
}

EntanglementReport entanglement_report(const DensityMatrix& rho, double t, bool with_bell) {
    require_two_qubit(rho.dim(), "entanglement_report");
    EntanglementReport r;
    r.t = t;
    r.M = positivity_coefficients(partial_transpose(rho.matrix(), {2, 2}, Subsystem::A));
    r.E = std::abs(r.M.M3) + std::abs(r.M.M4) - r.M.M3 - r.M.M4;
    r.negativity = negativity(rho, {2, 2});
    r.max_bell = with_bell ? max_bell(rho).value : std::numeric_limits<double>::quiet_NaN();
    return r;
}

nlohmann::json to_json(const EntanglementReport& r) {
    nlohmann::json j;
    j["t"] = r.t;
    j["E"] = r.E;
    j["M2"] = r.M.M2;
    j["M3"] = r.M.M3;
    j["M4"] = r.M.M4;
    j["max_bell"] = std::isnan(r.max_bell) ? nlohmann::json(nullptr) : nlohmann::json(r.max_bell);
    j["negativity"] = r.negativity;
    return j;
}

}  // namespace mutomo
