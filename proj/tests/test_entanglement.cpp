#include <doctest.h>

#include "mutomo/entanglement.hpp"
#include "mutomo/error.hpp"
#include "mutomo/spin_tomography.hpp"
#include "support.hpp"

using namespace mutomo;
using namespace testing;

namespace {

DensityMatrix singlet() {
    ComplexVector psi = ComplexVector::Zero(4);
    psi(1) = 1 / std::sqrt(2.0);
    psi(2) = -1 / std::sqrt(2.0);
    return DensityMatrix::pure(psi);
}

DensityMatrix separable_mixture(std::mt19937_64& rng, int terms) {
    std::uniform_real_distribution<double> u(0, 1);
    ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
    double tot = 0;
    for (int k = 0; k < terms; ++k) {
        double p = u(rng);
        acc += p * kron(random_density(2, rng, 1 + k % 2).matrix(), random_density(2, rng, 1 + (k / 2) % 2).matrix());
        tot += p;
    }
    return DensityMatrix(acc / tot);
}

// Horodecki: max CHSH = 2 sqrt(l1 + l2), l = two largest eigenvalues of T^T T
double horodecki(const DensityMatrix& rho) {
    Eigen::Matrix3d T;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) T(i, k) = (rho.matrix() * kron(pauli(i + 1), pauli(k + 1))).trace().real();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(T.transpose() * T);
    return 2 * std::sqrt(es.eigenvalues()(2) + es.eigenvalues()(1));
}

Direction in_xz(double deg) { return Direction::from_vector(Vec3(std::sin(deg * M_PI / 180), 0, std::cos(deg * M_PI / 180))); }

}  // namespace

TEST_CASE("bell number") {
    // singlet: E(a, b) = -a.b, CHSH angles in the x-z plane
    BellSetting s {in_xz(90), in_xz(0), in_xz(45), in_xz(135)};
    auto e = [](const Direction& a, const Direction& b) { return -a.n.dot(b.n); };
    double oracle = e(s.n1_mu, s.n1_e) + e(s.n1_mu, s.n2_e) + e(s.n2_mu, s.n1_e) - e(s.n2_mu, s.n2_e);
    CHECK(std::abs(std::abs(oracle) - 2 * std::sqrt(2.0)) < 1e-12);
    double b = bell_number(bell_cells(singlet(), s));
    CHECK(std::abs(b - oracle) < 1e-10);
    CHECK(std::abs(bell_number(bell_cells(DensityMatrix::maximally_mixed(4), s))) < 1e-15);
    std::mt19937_64 rng(31);
    for (int it = 0; it < 10000; ++it) {
        auto rho = it < 100 ? separable_mixture(rng, 1 + it % 4) : DensityMatrix(kron(random_density(2, rng).matrix(), random_density(2, rng).matrix()));
        if (it >= 100 && it % 100 != 0) continue;
        BellSetting r {random_direction(rng), random_direction(rng), random_direction(rng), random_direction(rng)};
        CHECK(std::abs(bell_number(bell_cells(rho, r))) <= 2 + 1e-12);
    }
    Eigen::Matrix4d bad = Eigen::Matrix4d::Constant(0.3);
    CHECK_THROWS_AS(bell_number(bad), ValidationError);
}

TEST_CASE("bell number over random settings for a factorized tomogram") {
    std::mt19937_64 rng(32);
    auto a = random_density(2, rng), c = random_density(2, rng);
    DensityMatrix p(kron(a.matrix(), c.matrix()));
    double worst = 0;
    for (int it = 0; it < 10000; ++it) {
        BellSetting r {random_direction(rng), random_direction(rng), random_direction(rng), random_direction(rng)};
        worst = std::max(worst, std::abs(bell_number(bell_cells(p, r))));
    }
    CHECK(worst <= 2.0);
}

TEST_CASE("max bell") {
    auto s = max_bell(singlet());
    CHECK(std::abs(s.value - 2 * std::sqrt(2.0)) < 1e-3);
    CHECK(std::abs(std::abs(bell_number(bell_cells(singlet(), s.setting))) - s.value) < 1e-12);
    std::mt19937_64 rng(33);
    for (int it = 0; it < 10; ++it) {
        auto rho = random_density(4, rng, 1 + it % 4);
        CHECK(std::abs(max_bell(rho).value - horodecki(rho)) < 1e-3);
        CHECK(max_bell(separable_mixture(rng, 3)).value <= 2 + 1e-6);
    }
}

TEST_CASE("positivity coefficients") {
    auto m = positivity_coefficients(ComplexMatrix::Identity(4, 4) / 4.0);
    CHECK(m.M2 == doctest::Approx(3.0 / 8).epsilon(1e-14));
    CHECK(m.M3 == doctest::Approx(1.0 / 16).epsilon(1e-14));
    CHECK(m.M4 == doctest::Approx(1.0 / 256).epsilon(1e-14));
    std::mt19937_64 rng(34);
    auto pure = random_density(4, rng, 1);
    auto mp = positivity_coefficients(pure.matrix());
    CHECK(std::abs(mp.M2) < 1e-14);
    CHECK(std::abs(mp.M3) < 1e-14);
    CHECK(std::abs(mp.M4) < 1e-14);
    auto ms = positivity_coefficients(partial_transpose(singlet().matrix(), {2, 2}, Subsystem::A));
    // spectrum (-1/2, 1/2, 1/2, 1/2): e2 = 0, e3 = -1/4, e4 = -1/16
    CHECK(std::abs(ms.M2 - 0.0) < 1e-14);
    CHECK(std::abs(ms.M3 + 0.25) < 1e-14);
    CHECK(std::abs(ms.M4 + 1.0 / 16) < 1e-14);
    for (int it = 0; it < 50; ++it) {
        auto rho = random_density(4, rng);
        ComplexMatrix pt = partial_transpose(rho.matrix(), {2, 2}, Subsystem::A);
        auto e = eig_hermitian(pt).values;
        double e2 = 0, e3 = 0, e4 = e(0) * e(1) * e(2) * e(3);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                e2 += e(i) * e(j);
                for (int k = j + 1; k < 4; ++k) e3 += e(i) * e(j) * e(k);
            }
        auto c = positivity_coefficients(pt);
        CHECK(std::abs(c.M2 - e2) < 1e-12);
        CHECK(std::abs(c.M3 - e3) < 1e-12);
        CHECK(std::abs(c.M4 - e4) < 1e-12);
        CHECK(std::abs(c.M2 - positivity_coefficients(rho.matrix()).M2) < 1e-14);
    }
    CHECK_THROWS_AS(positivity_coefficients(ComplexMatrix::Identity(4, 4)), ValidationError);
    CHECK_THROWS_AS(positivity_coefficients(ComplexMatrix::Identity(6, 6) / 6.0), ValidationError);
}

TEST_CASE("E and negativity") {
    CHECK(std::abs(entanglement_E(singlet()) - 0.625) < 1e-12);
    CHECK(std::abs(negativity(singlet(), {2, 2}) - 0.5) < 1e-12);
    std::mt19937_64 rng(35);
    for (int it = 0; it < 200; ++it) {
        auto s = separable_mixture(rng, 1 + it % 5);
        CHECK(entanglement_E(s) <= 1e-12);
        CHECK(negativity(s, {2, 2}) <= 1e-12);
    }
    for (int it = 0; it < 50; ++it) {
        DensityMatrix q(kron(random_density(2, rng).matrix(), random_density(3, rng).matrix()));
        CHECK(negativity(q, {2, 3}) <= 1e-12);
    }
    int ent = 0, sep = 0;
    for (int it = 0; it < 200; ++it) {
        double p = std::uniform_real_distribution<double>(0, 1)(rng);
        DensityMatrix rho(p * random_density(4, rng, 1 + it % 2).matrix() + (1 - p) * ComplexMatrix::Identity(4, 4) / 4.0);
        double E = entanglement_E(rho), N = negativity(rho, {2, 2});
        if (N > 1e-9) {
            CHECK(E > 0);
            ++ent;
        } else if (N == 0.0 || N < 1e-14) {
            CHECK(E <= 1e-14);
            ++sep;
        }
    }
    CHECK(ent > 20);
    CHECK(sep > 20);
    CHECK_THROWS_AS(negativity(DensityMatrix::maximally_mixed(8), {2, 4}), ValidationError);
    CHECK_THROWS_AS(entanglement_E(DensityMatrix::maximally_mixed(6)), ValidationError);
}

TEST_CASE("ppt tomogram") {
    auto g = QuadratureGrid::for_degree(2);
    std::mt19937_64 rng(36);
    ComplexMatrix real_mu = random_density(2, rng).matrix().real().cast<cplx>();
    DensityMatrix p(kron(real_mu, random_density(2, rng).matrix()));
    auto w = sample_two_spin_tomogram(p, g, g);
    auto wp = ppt_tomogram(w);
    for (std::size_t i = 0; i < w.values.size(); ++i) CHECK(std::abs(wp.values[i] - w.values[i]) < 1e-14);
    for (int it = 0; it < 30; ++it) {
        auto rho = random_density(4, rng);
        auto t = sample_two_spin_tomogram(rho, g, g);
        auto tp = ppt_tomogram(t);
        CHECK(max_abs(reconstruct_two_spin_operator(tp) - partial_transpose(rho.matrix(), {2, 2}, Subsystem::A)) < 1e-9);
        auto back = ppt_tomogram(tp);
        for (std::size_t i = 0; i < t.values.size(); ++i) CHECK(back.values[i] == t.values[i]);
    }
}

TEST_CASE("star kernel") {
    SpinLabel up {0.5, Vec3(0, 0, 1)};
    CHECK(std::abs(star_kernel({up, up}, {up, up}, {up, up}) - 16.0) < 1e-14);
    std::mt19937_64 rng(37);
    for (int it = 0; it < 50; ++it) {
        auto lab = [&](bool plane) {
            Vec3 n = random_direction(rng).n;
            if (plane) n = Vec3(n(0), 0, n(2)).normalized();
            return SpinLabel {(rng() % 2) ? 0.5 : -0.5, n};
        };
        QubitPair a {lab(true), lab(true)}, b {lab(true), lab(true)}, c {lab(true), lab(true)};
        CHECK(std::abs(star_kernel(a, b, c).imag()) < 1e-14);
        QubitPair x {lab(false), lab(false)}, y {lab(false), lab(false)}, z {lab(false), lab(false)};
        CHECK(std::abs(star_kernel(x, y, z) - std::conj(star_kernel(y, x, z))) < 1e-13);
    }
}

TEST_CASE("tomographic M3 M4") {
    auto g = QuadratureGrid::for_degree(2);
    auto [m3, m4] = tomographic_M34(ppt_tomogram(sample_two_spin_tomogram(DensityMatrix::maximally_mixed(4), g, g)));
    CHECK(std::abs(m3 - 1.0 / 16) < 1e-12);
    CHECK(std::abs(m4 - 1.0 / 256) < 1e-12);
    auto [s3, s4] = tomographic_M34(ppt_tomogram(sample_two_spin_tomogram(singlet(), g, g)));
    CHECK(std::abs(s3 + 0.25) < 1e-12);
    CHECK(std::abs(s4 + 1.0 / 16) < 1e-12);
    std::mt19937_64 rng(38);
    for (int it = 0; it < 10; ++it) {
        auto rho = random_density(4, rng);
        auto ref = positivity_coefficients(partial_transpose(rho.matrix(), {2, 2}, Subsystem::A));
        auto wp = ppt_tomogram(sample_two_spin_tomogram(rho, g, g));
        for (int k = 0; k < 3; ++k) {
            auto [a, b] = tomographic_M34(wp, random_direction(rng), random_direction(rng));
            CHECK(std::abs(a - ref.M3) < 1e-9);
            CHECK(std::abs(b - ref.M4) < 1e-9);
        }
    }
    CHECK_THROWS_AS(tomographic_M34(sample_two_spin_tomogram(singlet(), QuadratureGrid::for_degree(1), g)), ValidationError);
}

TEST_CASE("report json") {
    auto r = entanglement_report(singlet(), 1.5, true);
    auto j = to_json(r);
    CHECK(j["t"].get<double>() == 1.5);
    CHECK(std::abs(j["E"].get<double>() - 0.625) < 1e-12);
    CHECK(std::abs(j["negativity"].get<double>() - 0.5) < 1e-12);
    CHECK(std::abs(j["max_bell"].get<double>() - 2 * std::sqrt(2.0)) < 1e-3);
    CHECK(j.contains("M2"));
}
