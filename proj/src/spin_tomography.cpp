#include "mutomo/spin_tomography.hpp"

#include "mutomo/error.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace mutomo {

namespace {

double lfact(int n) { return std::lgamma(n + 1.0); }

// all arguments in units of 1/2
bool triangle(int a, int b, int c) {
    return c <= a + b && c >= std::abs(a - b) && (a + b + c) % 2 == 0;
}

void require_projection(Spin j, HalfInt m, const char* what) {
    if (std::abs(m.twice()) > j.twice() || (j.twice() - m.twice()) % 2 != 0)
        throw ValidationError(std::string(what) + ": projection " + m.str() + " invalid for j=" + j.str());
}

}  // namespace

double three_j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
    const int J1 = j1.twice(), J2 = j2.twice(), J3 = j3.twice();
    const int M1 = m1.twice(), M2 = m2.twice(), M3 = m3.twice();
    if (J1 < 0 || J2 < 0 || J3 < 0) return 0.0;
    if (M1 + M2 + M3 != 0) return 0.0;
    if (!triangle(J1, J2, J3)) return 0.0;
    if (std::abs(M1) > J1 || std::abs(M2) > J2 || std::abs(M3) > J3) return 0.0;
    if ((J1 + M1) % 2 || (J2 + M2) % 2 || (J3 + M3) % 2) return 0.0;

    // integers below are the actual (not doubled) factorial arguments
    const int a = (J1 + J2 - J3) / 2, b = (J1 - J2 + J3) / 2, c = (-J1 + J2 + J3) / 2;
    const int s = (J1 + J2 + J3) / 2 + 1;
    double log_pre = 0.5 * (lfact(a) + lfact(b) + lfact(c) - lfact(s));
    log_pre += 0.5 * (lfact((J1 + M1) / 2) + lfact((J1 - M1) / 2) + lfact((J2 + M2) / 2) + lfact((J2 - M2) / 2) +
                      lfact((J3 + M3) / 2) + lfact((J3 - M3) / 2));

    const int t1 = (J3 - J2 + M1) / 2, t2 = (J3 - J1 - M2) / 2;
    const int t3 = a, t4 = (J1 - M1) / 2, t5 = (J2 + M2) / 2;
    const int kmin = std::max({0, -t1, -t2});
    const int kmax = std::min({t3, t4, t5});
    double sum = 0.0;
    for (int k = kmin; k <= kmax; ++k) {
        double l = lfact(k) + lfact(t1 + k) + lfact(t2 + k) + lfact(t3 - k) + lfact(t4 - k) + lfact(t5 - k);
        sum += ((k % 2) ? -1.0 : 1.0) * std::exp(log_pre - l);
    }
    const int ph = (J1 - J2 - M3) / 2;
    return ((ph % 2) ? -1.0 : 1.0) * sum;
}

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
    const int ph = (j1.twice() - j2.twice() + M.twice()) / 2;
    return ((ph % 2) ? -1.0 : 1.0) * std::sqrt(J.twice() + 1.0) * three_j(j1, j2, J, m1, m2, -M);
}

double wigner_small_d(Spin j, HalfInt mp, HalfInt m, double beta) {
    if (j.twice() < 0) throw ValidationError("wigner_small_d: negative spin");
    require_projection(j, mp, "wigner_small_d");
    require_projection(j, m, "wigner_small_d");
    const int jpm = (j.twice() + mp.twice()) / 2, jmm = (j.twice() - mp.twice()) / 2;
    const int jp = (j.twice() + m.twice()) / 2, jm = (j.twice() - m.twice()) / 2;
    const int dm = (mp.twice() - m.twice()) / 2;
    const double c = std::cos(beta / 2), s = std::sin(beta / 2);
    const double log_pre = 0.5 * (lfact(jpm) + lfact(jmm) + lfact(jp) + lfact(jm));
    double sum = 0.0;
    for (int k = std::max(0, -dm); k <= std::min(jp, jmm); ++k) {
        double l = lfact(jp - k) + lfact(k) + lfact(dm + k) + lfact(jmm - k);
        int pc = j.twice() - dm - 2 * k;  // exponent of cos: 2j + m - m' - 2k
        int ps = dm + 2 * k;
        double term = std::exp(log_pre - l) * std::pow(c, pc) * std::pow(s, ps);
        sum += (((dm + k) % 2 + 2) % 2 ? -1.0 : 1.0) * term;
    }
    return sum;
}

ComplexMatrix rotation_matrix(Spin j, const Direction& dir) {
    require_spin(j, max_rotation_spin, "rotation_matrix");
    const int n = spin_dim(j);
    ComplexMatrix r(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            HalfInt mp = projection_at(j, a), m = projection_at(j, b);
            r(a, b) = std::exp(-I_ * mp.value() * dir.phi) * wigner_small_d(j, mp, m, dir.theta) *
                      std::exp(I_ * m.value() * dir.phi);
        }
    return r;
}

std::vector<double> tomogram_symbol(const ComplexMatrix& a, Spin j, const Direction& dir) {
    if (a.rows() != spin_dim(j) || a.cols() != spin_dim(j))
        throw ValidationError("tomogram: operator dimension does not match j=" + j.str());
    ComplexMatrix r = rotation_matrix(j, dir);
    ComplexMatrix c = r.adjoint() * a * r;
    std::vector<double> w(spin_dim(j));
    for (int i = 0; i < spin_dim(j); ++i) w[i] = c(i, i).real();
    return w;
}

std::vector<double> tomogram(const DensityMatrix& rho, Spin j, const Direction& dir) {
    return tomogram_symbol(rho.matrix(), j, dir);
}

ComplexMatrix tensor_operator(Spin j, int k, int q) {
    if (k < 0 || k > j.twice() || std::abs(q) > k) throw ValidationError("tensor_operator: invalid (k, q)");
    const int n = spin_dim(j);
    const HalfInt K = HalfInt::from_twice(2 * k), Q = HalfInt::from_twice(2 * q);
    ComplexMatrix t = ComplexMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            HalfInt m1 = projection_at(j, a), m2 = projection_at(j, b);
            t(a, b) = ((a % 2) ? -1.0 : 1.0) * std::sqrt(2.0 * k + 1) * three_j(j, K, j, -m1, Q, m2);
        }
    return t;
}

ComplexMatrix quantizer(Spin j, HalfInt m, const Direction& dir) {
    require_spin(j, max_rotation_spin, "quantizer");
    require_projection(j, m, "quantizer");
    const int n = spin_dim(j);
    const int im = projection_index(j, m);
    ComplexMatrix d = ComplexMatrix::Zero(n, n);
    for (int k = 0; k <= j.twice(); ++k) {
        const double ak = tensor_operator(j, k, 0)(im, im).real();
        if (ak == 0.0) continue;
        const HalfInt K = HalfInt::from_twice(2 * k);
        for (int q = -k; q <= k; ++q) {
            cplx dk = std::exp(-I_ * double(q) * dir.phi) *
                      wigner_small_d(K, HalfInt::from_twice(2 * q), HalfInt(), dir.theta);
            d += (2.0 * k + 1) * ak * dk * tensor_operator(j, k, q);
        }
    }
    return d;
}

SpinTomogram sample_tomogram(const DensityMatrix& rho, Spin j, const QuadratureGrid& grid) {
    SpinTomogram t {j, grid, {}};
    t.values.reserve(grid.size());
    for (const auto& d : grid.nodes) t.values.push_back(tomogram(rho, j, d));
    return t;
}

ComplexMatrix reconstruct_operator(const SpinTomogram& tom) {
    require_spin(tom.j, max_rotation_spin, "reconstruct_from_sphere");
    if (tom.grid.degree < 2 * tom.j.twice())
        throw ValidationError("reconstruct_from_sphere: quadrature degree " + std::to_string(tom.grid.degree) +
                              " below 4j = " + std::to_string(2 * tom.j.twice()));
    if (tom.values.size() != tom.grid.size()) throw ValidationError("reconstruct_from_sphere: sample count mismatch");
    const int n = spin_dim(tom.j);
    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < tom.grid.size(); ++i) {
        if (static_cast<int>(tom.values[i].size()) != n)
            throw ValidationError("reconstruct_from_sphere: wrong number of projections");
        for (int a = 0; a < n; ++a)
            rho += tom.grid.weights[i] * tom.values[i][a] * quantizer(tom.j, projection_at(tom.j, a), tom.grid.nodes[i]);
    }
    return rho;
}

DensityMatrix reconstruct_from_sphere(const SpinTomogram& tom) {
    ComplexMatrix r = reconstruct_operator(tom);
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

std::array<Vec3, 3> dual_basis(const Direction& n1, const Direction& n2, const Direction& n3) {
    const double vol = n1.n.dot(n2.n.cross(n3.n));
    if (std::abs(vol) < 1e-10) throw ValidationError("dual_basis: directions are coplanar");
    return {n2.n.cross(n3.n) / vol, n3.n.cross(n1.n) / vol, n1.n.cross(n2.n) / vol};
}

DensityMatrix reconstruct_qubit_three_directions(double w1, double w2, double w3, const Direction& n1,
                                                 const Direction& n2, const Direction& n3) {
    for (double w : {w1, w2, w3})
        if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("reconstruct_qubit_three_directions: probability outside [0,1]");
    auto l = dual_basis(n1, n2, n3);
    const SpinMatrices s = spin_matrices(half);
    ComplexMatrix rho = ComplexMatrix::Identity(2, 2) / 2.0;
    const double w[3] = {w1, w2, w3};
    for (int k = 0; k < 3; ++k) rho += (2 * w[k] - 1) * spin_along(s, l[k]);
    return DensityMatrix(rho);
}

void write_tomogram_csv(std::ostream& os, const SpinTomogram& tom) {
    os << "# mutomo tomogram v1 j=" << tom.j.str() << " degree=" << tom.grid.degree << "\n";
    os << "m,theta,phi,weight,probability\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < tom.grid.size(); ++i)
        for (std::size_t a = 0; a < tom.values[i].size(); ++a)
            os << projection_at(tom.j, int(a)).value() << ',' << tom.grid.nodes[i].theta << ','
               << tom.grid.nodes[i].phi << ',' << tom.grid.weights[i] << ',' << tom.values[i][a] << '\n';
}

SpinTomogram read_tomogram_csv(std::istream& is) {
    std::string line;
    SpinTomogram tom;
    bool have_j = false;
    std::vector<std::pair<double, double>> keys;
    std::map<std::pair<double, double>, std::size_t> index;
    std::vector<std::map<int, double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string tok;
            while (hs >> tok) {
                if (tok.rfind("j=", 0) == 0) {
                    std::string v = tok.substr(2);
                    auto slash = v.find('/');
                    double jv = slash == std::string::npos ? std::stod(v)
                                                           : std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
                    tom.j = HalfInt(jv);
                    have_j = true;
                } else if (tok.rfind("degree=", 0) == 0) {
                    tom.grid.degree = std::stoi(tok.substr(7));
                }
            }
            continue;
        }
        if (line.rfind("m,", 0) == 0) continue;
        std::istringstream ls(line);
        std::string f[5];
        for (auto& x : f)
            if (!std::getline(ls, x, ',')) throw ValidationError("read_tomogram_csv: malformed row: " + line);
        double m = std::stod(f[0]), th = std::stod(f[1]), ph = std::stod(f[2]), wt = std::stod(f[3]), p = std::stod(f[4]);
        auto key = std::make_pair(th, ph);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, keys.size()).first;
            keys.push_back(key);
            tom.grid.nodes.push_back(Direction::from_angles(th, ph));
            tom.grid.weights.push_back(wt);
            rows.emplace_back();
        }
        rows[it->second][HalfInt(m).twice()] = p;
    }
    if (!have_j) throw ValidationError("read_tomogram_csv: missing j in header");
    for (auto& r : rows) {
        if (static_cast<int>(r.size()) != spin_dim(tom.j)) throw ValidationError("read_tomogram_csv: incomplete direction");
        std::vector<double> v;
        for (int a = 0; a < spin_dim(tom.j); ++a) v.push_back(r.at(projection_at(tom.j, a).twice()));
        tom.values.push_back(std::move(v));
    }
    return tom;
}

}  // namespace mutomo
