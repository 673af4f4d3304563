#include "mutomo/two_spin.hpp"

#include "mutomo/error.hpp"
#include "mutomo/spin_tomography.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace mutomo {

namespace {

void check_basis(const TwoSpinBasis& b, const char* what) {
    require_spin(b.j_mu, max_rotation_spin, what);
    require_spin(b.j_e, max_rotation_spin, what);
}

ComplexMatrix rotation_or_identity(Spin j, const Direction& d) {
    if (j.twice() == 0) return ComplexMatrix::Identity(1, 1);
    return rotation_matrix(j, d);
}

std::vector<double> diagonal(const ComplexMatrix& m) {
    std::vector<double> d(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) d[i] = m(i, i).real();
    return d;
}

void require_unitary(const ComplexMatrix& u, int dim, const char* what) {
    if (u.rows() != dim || u.cols() != dim) throw ValidationError(std::string(what) + ": unitary has wrong dimension");
    if (!is_unitary(u, 1e-10)) throw ValidationError(std::string(what) + ": matrix is not unitary");
}

// quantizers D(m, n) for every node of a grid, [node][m index]
std::vector<std::vector<ComplexMatrix>> quantizer_table(Spin j, const QuadratureGrid& g) {
    std::vector<std::vector<ComplexMatrix>> t(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int a = 0; a < spin_dim(j); ++a) t[i].push_back(quantizer(j, projection_at(j, a), g.nodes[i]));
    return t;
}

void check_grids(const TwoSpinTomogram& w, const char* what) {
    check_basis(w.basis, what);
    if (w.grid_mu.degree < 2 * w.basis.j_mu.twice() || w.grid_e.degree < 2 * w.basis.j_e.twice())
        throw ValidationError(std::string(what) + ": quadrature degree below 4j");
    if (w.values.size() != w.grid_mu.size() * w.grid_e.size() * std::size_t(w.basis.dim()))
        throw ValidationError(std::string(what) + ": sample count mismatch");
}

std::string spin_text(Spin j) { return j.str(); }

Spin parse_spin(const std::string& v) {
    auto slash = v.find('/');
    double x = slash == std::string::npos ? std::stod(v) : std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
    return HalfInt(x);
}

}  // namespace

std::vector<std::pair<HalfInt, HalfInt>> TwoSpinBasis::coupled_labels() const {
    std::vector<std::pair<HalfInt, HalfInt>> out;
    for (int L = j_mu.twice() + j_e.twice(); L >= std::abs(j_mu.twice() - j_e.twice()); L -= 2)
        for (int M = L; M >= -L; M -= 2) out.emplace_back(HalfInt::from_twice(L), HalfInt::from_twice(M));
    return out;
}

TwoSpinBasis TwoSpinBasis::for_dim(int dim) {
    if (dim < 4 || dim % 2 != 0 || dim > 10) throw ValidationError("two-spin state of dimension " + std::to_string(dim) + " not supported");
    return {half, HalfInt::from_twice(dim / 2 - 1)};
}

ComplexMatrix cg_matrix(Spin j_mu, Spin j_e) {
    TwoSpinBasis b {j_mu, j_e};
    check_basis(b, "cg_matrix");
    auto labels = b.coupled_labels();
    ComplexMatrix c = ComplexMatrix::Zero(b.dim(), b.dim());
    for (int r = 0; r < b.dim(); ++r)
        for (int a = 0; a < b.dim_mu(); ++a)
            for (int e = 0; e < b.dim_e(); ++e)
                c(r, a * b.dim_e() + e) = clebsch_gordan(j_mu, projection_at(j_mu, a), j_e, projection_at(j_e, e),
                                                         labels[r].first, labels[r].second);
    return c;
}

std::vector<double> individual_tomogram_unitary(const DensityMatrix& rho, const ComplexMatrix& u) {
    require_unitary(u, rho.dim(), "individual_tomogram_unitary");
    return diagonal(u * rho.matrix() * u.adjoint());
}

std::vector<double> individual_tomogram(const DensityMatrix& rho, const Direction& n_mu, const Direction& n_e) {
    auto b = TwoSpinBasis::for_dim(rho.dim());
    ComplexMatrix r = kron(rotation_matrix(b.j_mu, n_mu), rotation_matrix(b.j_e, n_e));
    return diagonal(r.adjoint() * rho.matrix() * r);
}

std::vector<double> reduced_tomogram(const DensityMatrix& rho, const Direction& n_mu) {
    auto b = TwoSpinBasis::for_dim(rho.dim());
    return tomogram_symbol(partial_trace(rho.matrix(), b.dims(), Subsystem::A), b.j_mu, n_mu);
}

std::vector<double> total_tomogram(const DensityMatrix& rho, const ComplexMatrix& u) {
    auto b = TwoSpinBasis::for_dim(rho.dim());
    require_unitary(u, rho.dim(), "total_tomogram");
    ComplexMatrix c = cg_matrix(b.j_mu, b.j_e);
    return diagonal(c * u * rho.matrix() * u.adjoint() * c.adjoint());
}

ComplexMatrix blockdiag_rotation(Spin j_mu, Spin j_e, const Direction& N) {
    TwoSpinBasis b {j_mu, j_e};
    check_basis(b, "blockdiag_rotation");
    ComplexMatrix r = ComplexMatrix::Zero(b.dim(), b.dim());
    int off = 0;
    for (int L = j_mu.twice() + j_e.twice(); L >= std::abs(j_mu.twice() - j_e.twice()); L -= 2) {
        r.block(off, off, L + 1, L + 1) = rotation_or_identity(HalfInt::from_twice(L), N);
        off += L + 1;
    }
    return r;
}

std::vector<double> total_pdf(const DensityMatrix& rho, const Direction& N) {
    auto b = TwoSpinBasis::for_dim(rho.dim());
    ComplexMatrix c = cg_matrix(b.j_mu, b.j_e);
    ComplexMatrix r = blockdiag_rotation(b.j_mu, b.j_e, N);
    return diagonal(r.adjoint() * c * rho.matrix() * c.adjoint() * r);
}

TotalPdfSamples sample_total_pdf(const DensityMatrix& rho, const QuadratureGrid& grid) {
    TotalPdfSamples f {TwoSpinBasis::for_dim(rho.dim()), grid, {}};
    for (const auto& d : grid.nodes) f.values.push_back(total_pdf(rho, d));
    return f;
}

ComplexMatrix reconstruct_blockdiag(const TotalPdfSamples& f) {
    check_basis(f.basis, "reconstruct_blockdiag");
    const int lmax = f.basis.j_mu.twice() + f.basis.j_e.twice();
    if (f.grid.degree < 2 * lmax) throw ValidationError("reconstruct_blockdiag: quadrature degree below 4 L_max");
    if (f.values.size() != f.grid.size()) throw ValidationError("reconstruct_blockdiag: sample count mismatch");
    const int n = f.basis.dim();
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    int off = 0;
    for (int L = lmax; L >= std::abs(f.basis.j_mu.twice() - f.basis.j_e.twice()); L -= 2) {
        const Spin Ls = HalfInt::from_twice(L);
        if (L == 0) {
            // one-dimensional block: the weight itself
            double s = 0;
            for (std::size_t i = 0; i < f.grid.size(); ++i) s += f.grid.weights[i] * f.values[i][off];
            out(off, off) = s;
        } else {
            for (std::size_t i = 0; i < f.grid.size(); ++i)
                for (int a = 0; a <= L; ++a)
                    out.block(off, off, L + 1, L + 1) +=
                        f.grid.weights[i] * f.values[i][off + a] * quantizer(Ls, projection_at(Ls, a), f.grid.nodes[i]);
        }
        off += L + 1;
    }
    return 0.5 * (out + out.adjoint());
}

TwoSpinTomogram sample_two_spin_tomogram(const DensityMatrix& rho, const QuadratureGrid& grid_mu,
                                         const QuadratureGrid& grid_e) {
    return sample_two_spin_symbol(rho.matrix(), TwoSpinBasis::for_dim(rho.dim()), grid_mu, grid_e);
}

TwoSpinTomogram sample_two_spin_symbol(const ComplexMatrix& a, const TwoSpinBasis& basis, const QuadratureGrid& grid_mu,
                                       const QuadratureGrid& grid_e) {
    check_basis(basis, "sample_two_spin_symbol");
    if (a.rows() != basis.dim() || a.cols() != basis.dim()) throw ValidationError("sample_two_spin_symbol: dimension mismatch");
    TwoSpinTomogram w {basis, grid_mu, grid_e, {}};
    w.values.reserve(grid_mu.size() * grid_e.size() * w.basis.dim());
    std::vector<ComplexMatrix> re;
    for (const auto& d : grid_e.nodes) re.push_back(rotation_matrix(w.basis.j_e, d));
    for (const auto& dm : grid_mu.nodes) {
        ComplexMatrix rm = rotation_matrix(w.basis.j_mu, dm);
        for (const auto& r2 : re) {
            ComplexMatrix r = kron(rm, r2);
            ComplexMatrix c = r.adjoint() * a * r;
            for (int k = 0; k < w.basis.dim(); ++k) w.values.push_back(c(k, k).real());
        }
    }
    return w;
}

ComplexMatrix reconstruct_two_spin_operator(const TwoSpinTomogram& w) {
    check_grids(w, "reconstruct_two_spin");
    auto qm = quantizer_table(w.basis.j_mu, w.grid_mu);
    auto qe = quantizer_table(w.basis.j_e, w.grid_e);
    const int n = w.basis.dim();
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < w.grid_mu.size(); ++i)
        for (int a = 0; a < w.basis.dim_mu(); ++a) {
            // contract the electron factor first
            ComplexMatrix e = ComplexMatrix::Zero(w.basis.dim_e(), w.basis.dim_e());
            for (std::size_t k = 0; k < w.grid_e.size(); ++k)
                for (int b = 0; b < w.basis.dim_e(); ++b) e += w.grid_e.weights[k] * w.at(i, k, a, b) * qe[k][b];
            out += w.grid_mu.weights[i] * kron(qm[i][a], e);
        }
    return out;
}

DensityMatrix reconstruct_two_spin(const TwoSpinTomogram& w) {
    ComplexMatrix r = reconstruct_two_spin_operator(w);
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

std::vector<double> total_from_individual(const TwoSpinTomogram& w, const ComplexMatrix& u) {
    check_grids(w, "total_from_individual");
    require_unitary(u, w.basis.dim(), "total_from_individual");
    // sum_x w(x) <LM| U (D x D)(x) U^dag |LM>; the operator sum is linear, so it is contracted first
    ComplexMatrix c = cg_matrix(w.basis.j_mu, w.basis.j_e) * u;
    return diagonal(c * reconstruct_two_spin_operator(w) * c.adjoint());
}

void write_two_spin_csv(std::ostream& os, const TwoSpinTomogram& w) {
    os << "# mutomo two-spin tomogram v1 j_mu=" << spin_text(w.basis.j_mu) << " j_e=" << spin_text(w.basis.j_e)
       << " degree_mu=" << w.grid_mu.degree << " degree_e=" << w.grid_e.degree << "\n";
    os << "m_mu,theta_mu,phi_mu,m_e,theta_e,phi_e,probability\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < w.grid_mu.size(); ++i)
        for (std::size_t k = 0; k < w.grid_e.size(); ++k)
            for (int a = 0; a < w.basis.dim_mu(); ++a)
                for (int b = 0; b < w.basis.dim_e(); ++b)
                    os << projection_at(w.basis.j_mu, a).value() << ',' << w.grid_mu.nodes[i].theta << ','
                       << w.grid_mu.nodes[i].phi << ',' << projection_at(w.basis.j_e, b).value() << ','
                       << w.grid_e.nodes[k].theta << ',' << w.grid_e.nodes[k].phi << ',' << w.at(i, k, a, b) << '\n';
}

TwoSpinTomogram read_two_spin_csv(std::istream& is) {
    std::string line;
    TwoSpinTomogram w;
    int deg_mu = -1, deg_e = -1;
    std::vector<double> vals;
    std::vector<std::array<double, 6>> keys;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string tok;
            while (hs >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                if (k == "j_mu") w.basis.j_mu = parse_spin(v);
                else if (k == "j_e") w.basis.j_e = parse_spin(v);
                else if (k == "degree_mu") deg_mu = std::stoi(v);
                else if (k == "degree_e") deg_e = std::stoi(v);
            }
            continue;
        }
        if (line.rfind("m_mu", 0) == 0) continue;
        std::istringstream ls(line);
        std::array<double, 7> f {};
        std::string x;
        for (auto& v : f) {
            if (!std::getline(ls, x, ',')) throw ValidationError("read_two_spin_csv: malformed row: " + line);
            v = std::stod(x);
        }
        keys.push_back({f[0], f[1], f[2], f[3], f[4], f[5]});
        vals.push_back(f[6]);
    }
    if (deg_mu < 0 || deg_e < 0) throw ValidationError("read_two_spin_csv: header lacks grid degrees");
    w.grid_mu = QuadratureGrid::for_degree(deg_mu);
    w.grid_e = QuadratureGrid::for_degree(deg_e);
    check_basis(w.basis, "read_two_spin_csv");
    if (vals.size() != w.grid_mu.size() * w.grid_e.size() * std::size_t(w.basis.dim()))
        throw ValidationError("read_two_spin_csv: row count does not match the declared grids");
    // rows are expected in canonical order; verify labels while copying
    w.values.assign(vals.size(), 0.0);
    for (std::size_t r = 0; r < vals.size(); ++r) {
        std::size_t b = r % w.basis.dim_e(), rest = r / w.basis.dim_e();
        std::size_t a = rest % w.basis.dim_mu();
        rest /= w.basis.dim_mu();
        std::size_t k = rest % w.grid_e.size(), i = rest / w.grid_e.size();
        const auto& key = keys[r];
        if (std::abs(key[0] - projection_at(w.basis.j_mu, int(a)).value()) > 1e-12 ||
            std::abs(key[3] - projection_at(w.basis.j_e, int(b)).value()) > 1e-12 ||
            std::abs(key[1] - w.grid_mu.nodes[i].theta) > 1e-9 || std::abs(key[2] - w.grid_mu.nodes[i].phi) > 1e-9 ||
            std::abs(key[4] - w.grid_e.nodes[k].theta) > 1e-9 || std::abs(key[5] - w.grid_e.nodes[k].phi) > 1e-9)
            throw ValidationError("read_two_spin_csv: row " + std::to_string(r) + " is off the declared grid");
        w.values[r] = vals[r];
    }
    return w;
}

}  // namespace mutomo
