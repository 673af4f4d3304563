#include <doctest.h>

#include "mutomo/error.hpp"
#include "mutomo/spin_tomography.hpp"
#include "mutomo/two_spin.hpp"
#include "support.hpp"

#include <sstream>

using namespace mutomo;
using namespace testing;

namespace {

const double r2 = 1 / std::sqrt(2.0);

DensityMatrix polarized_initial() {
    ComplexMatrix up = ComplexMatrix::Zero(2, 2);
    up(0, 0) = 1;
    return DensityMatrix(kron(up, ComplexMatrix::Identity(2, 2) / 2.0));
}

DensityMatrix singlet() {
    ComplexVector psi = ComplexVector::Zero(4);
    psi(1) = r2;
    psi(2) = -r2;
    return DensityMatrix::pure(psi);
}

// textbook table for j (x) 1/2, spin 1/2 second
double cg_j_half(double j, double m2j, double ms, double J, double M) {
    if (std::abs(m2j + ms - M) > 1e-12) return 0.0;
    const double d = 2 * j + 1;
    if (std::abs(J - (j + 0.5)) < 1e-12)
        return ms > 0 ? std::sqrt((j + M + 0.5) / d) : std::sqrt((j - M + 0.5) / d);
    return ms > 0 ? -std::sqrt((j - M + 0.5) / d) : std::sqrt((j + M + 0.5) / d);
}

DensityMatrix random_product(std::mt19937_64& rng, int de = 2) {
    return DensityMatrix(kron(random_density(2, rng).matrix(), random_density(de, rng).matrix()));
}

}  // namespace

TEST_CASE("cg matrix") {
    ComplexMatrix c = cg_matrix(half, half);
    Eigen::Matrix4d ref;
    ref << 1, 0, 0, 0, 0, r2, r2, 0, 0, 0, 0, 1, 0, r2, -r2, 0;
    CHECK(max_abs(c - ref.cast<cplx>()) < 1e-15);
    for (double je : {0.5, 1.0, 1.5}) {
        ComplexMatrix u = cg_matrix(half, HalfInt(je));
        CHECK(is_unitary(u, 1e-13));
        CHECK(u.imag().cwiseAbs().maxCoeff() == 0.0);
        TwoSpinBasis b {half, HalfInt(je)};
        auto labels = b.coupled_labels();
        for (int r = 0; r < b.dim(); ++r)
            for (int a = 0; a < 2; ++a)
                for (int e = 0; e < b.dim_e(); ++e) {
                    double mm = 0.5 - a, me = je - e;
                    double J = labels[r].first.value(), M = labels[r].second.value();
                    // exchange symmetry: <1/2 mm, je me|JM> = (-1)^{1/2+je-J} <je me, 1/2 mm|JM>
                    double sign = (static_cast<int>(std::lround(0.5 + je - J)) % 2) ? -1.0 : 1.0;
                    CHECK(std::abs(u(r, a * b.dim_e() + e).real() - sign * cg_j_half(je, me, mm, J, M)) < 1e-13);
                }
    }
    CHECK(cg_matrix(half, HalfInt(1.0))(0, 0).real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(cg_matrix(half, HalfInt(3.0)), ValidationError);
}

TEST_CASE("individual tomograms") {
    auto w = individual_tomogram_unitary(polarized_initial(), ComplexMatrix::Identity(4, 4));
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));
    CHECK(std::abs(w[2]) < 1e-15);
    CHECK(std::abs(w[3]) < 1e-15);
    std::mt19937_64 rng(21);
    for (int it = 0; it < 10; ++it)
        for (double v : individual_tomogram_unitary(DensityMatrix::maximally_mixed(4), random_unitary(4, rng)))
            CHECK(v == doctest::Approx(0.25));
    CHECK_THROWS_AS(individual_tomogram_unitary(polarized_initial(), 2.0 * ComplexMatrix::Identity(4, 4)), ValidationError);

    for (int it = 0; it < 30; ++it) {
        Direction nm = random_direction(rng), ne = random_direction(rng);
        for (int de : {2, 3}) {
            auto a = random_density(2, rng), b = random_density(de, rng);
            DensityMatrix p(kron(a.matrix(), b.matrix()));
            auto wp = individual_tomogram(p, nm, ne);
            auto wa = tomogram(a, half, nm);
            auto wb = tomogram(b, HalfInt((de - 1) / 2.0), ne);
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < de; ++k) CHECK(std::abs(wp[i * de + k] - wa[i] * wb[k]) < 1e-14);
        }
        auto w0 = individual_tomogram(polarized_initial(), nm, ne);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) CHECK(std::abs(w0[i * 2 + k] - 0.5 * (0.5 + (0.5 - i) * nm.n(2))) < 1e-14);
        auto ws = individual_tomogram(singlet(), nm, nm);
        CHECK(std::abs(ws[0]) < 1e-14);
        CHECK(std::abs(ws[3]) < 1e-14);
        CHECK(std::abs(ws[1] - 0.5) < 1e-14);
        CHECK(std::abs(ws[2] - 0.5) < 1e-14);
    }
}

TEST_CASE("reduced tomogram and non-signalling") {
    std::mt19937_64 rng(22);
    for (int it = 0; it < 50; ++it) {
        Direction nm = random_direction(rng);
        auto w0 = reduced_tomogram(polarized_initial(), nm);
        CHECK(std::abs(w0[0] - (1 + nm.n(2)) / 2) < 1e-14);
        CHECK(std::abs(w0[1] - (1 - nm.n(2)) / 2) < 1e-14);
        for (double v : reduced_tomogram(DensityMatrix::maximally_mixed(6), nm)) CHECK(v == doctest::Approx(0.5));
        int de = 2 + it % 3;
        auto rho = random_density(2 * de, rng);
        auto wr = reduced_tomogram(rho, nm);
        std::vector<double> first;
        for (int rep = 0; rep < 3; ++rep) {
            auto wi = individual_tomogram(rho, nm, random_direction(rng));
            for (int i = 0; i < 2; ++i) {
                double s = 0;
                for (int k = 0; k < de; ++k) s += wi[i * de + k];
                CHECK(std::abs(s - wr[i]) < 1e-13);
            }
        }
    }
}

TEST_CASE("resolution of identity") {
    std::mt19937_64 rng(23);
    for (double je : {0.5, 1.0, 1.5}) {
        Spin j(je);
        for (int it = 0; it < 10; ++it) {
            ComplexMatrix r = rotation_matrix(j, random_direction(rng));
            ComplexMatrix s = ComplexMatrix::Zero(spin_dim(j), spin_dim(j));
            for (int a = 0; a < spin_dim(j); ++a) s += r.adjoint().col(a) * r.adjoint().col(a).adjoint();
            CHECK(max_abs(s - ComplexMatrix::Identity(spin_dim(j), spin_dim(j))) < 1e-13);
        }
    }
}

TEST_CASE("total tomogram") {
    auto ws = total_tomogram(singlet(), ComplexMatrix::Identity(4, 4));
    CHECK(std::abs(ws[3] - 1) < 1e-15);
    auto w0 = total_tomogram(polarized_initial(), ComplexMatrix::Identity(4, 4));
    CHECK(w0[0] == doctest::Approx(0.5));
    CHECK(w0[1] == doctest::Approx(0.25));
    CHECK(std::abs(w0[2]) < 1e-15);
    CHECK(w0[3] == doctest::Approx(0.25));
    std::mt19937_64 rng(24);
    for (int it = 0; it < 20; ++it) {
        auto u = random_unitary(4, rng);
        for (double v : total_tomogram(DensityMatrix::maximally_mixed(4), u)) CHECK(v == doctest::Approx(0.25));
        int de = 2 + it % 2;
        auto rho = random_density(2 * de, rng);
        auto uu = random_unitary(2 * de, rng);
        auto t = total_tomogram(rho, uu);
        auto i = individual_tomogram_unitary(rho, cg_matrix(half, HalfInt((de - 1) / 2.0)) * uu);
        for (std::size_t k = 0; k < t.size(); ++k) CHECK(std::abs(t[k] - i[k]) < 1e-14);
    }
}

TEST_CASE("direct sum rotation identity") {
    CHECK(max_abs(blockdiag_rotation(half, half, Direction::z()) - ComplexMatrix::Identity(4, 4)) < 1e-15);
    std::mt19937_64 rng(25);
    for (double je : {0.5, 1.0}) {
        Spin j(je);
        ComplexMatrix c = cg_matrix(half, j);
        for (int it = 0; it < 50; ++it) {
            Direction N = random_direction(rng);
            ComplexMatrix bd = blockdiag_rotation(half, j, N);
            ComplexMatrix prod = c * kron(rotation_matrix(half, N), rotation_matrix(j, N)) * c.adjoint();
            CHECK(max_abs(bd - prod) < 1e-12);
            CHECK(is_unitary(bd, 1e-13));
            int L1 = j.twice() + 2;  // size of the top block
            CHECK(bd.block(0, L1, L1, bd.cols() - L1).cwiseAbs().maxCoeff() < 1e-13);
            CHECK(prod.block(0, L1, L1, bd.cols() - L1).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("total pdf") {
    std::mt19937_64 rng(26);
    ComplexMatrix c = cg_matrix(half, half);
    for (int it = 0; it < 20; ++it) {
        Direction N = random_direction(rng);
        CHECK(std::abs(total_pdf(singlet(), N)[3] - 1) < 1e-14);
        // singlet-triplet coherence is invisible
        ComplexVector psi = random_complex(4, 1, rng);
        auto rho = DensityMatrix::pure(psi);
        ComplexMatrix coupled = c * rho.matrix() * c.adjoint();
        ComplexMatrix bd = ComplexMatrix::Zero(4, 4);
        bd.block(0, 0, 3, 3) = coupled.block(0, 0, 3, 3);
        bd(3, 3) = coupled(3, 3);
        DensityMatrix proj(c.adjoint() * bd * c);
        auto f1 = total_pdf(rho, N), f2 = total_pdf(proj, N);
        double s = 0;
        for (int k = 0; k < 4; ++k) {
            CHECK(std::abs(f1[k] - f2[k]) < 1e-13);
            s += f1[k];
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    }
    ComplexVector t11 = ComplexVector::Zero(4);
    t11(0) = 1;
    CHECK(std::abs(total_pdf(DensityMatrix::pure(t11), Direction::z())[0] - 1) < 1e-15);
}

TEST_CASE("block diagonal reconstruction") {
    auto grid = QuadratureGrid::for_degree(4);
    ComplexMatrix c = cg_matrix(half, half);
    ComplexMatrix s = reconstruct_blockdiag(sample_total_pdf(singlet(), grid));
    CHECK(std::abs(s(3, 3) - 1.0) < 1e-12);
    CHECK(max_abs(s.block(0, 0, 3, 3)) < 1e-12);
    std::mt19937_64 rng(27);
    for (int it = 0; it < 20; ++it) {
        ComplexMatrix bd = ComplexMatrix::Zero(4, 4);
        double p = std::uniform_real_distribution<double>(0, 1)(rng);
        bd.block(0, 0, 3, 3) = (1 - p) * random_density(3, rng).matrix();
        bd(3, 3) = p;
        DensityMatrix rho(c.adjoint() * bd * c);
        CHECK(max_abs(reconstruct_blockdiag(sample_total_pdf(rho, grid)) - bd) < 1e-9);
        DensityMatrix werner(p * singlet().matrix() + (1 - p) * ComplexMatrix::Identity(4, 4) / 4.0);
        CHECK(max_abs(reconstruct_blockdiag(sample_total_pdf(werner, grid)) - c * werner.matrix() * c.adjoint()) < 1e-9);
    }
    // qubit-qutrit: L = 3/2 and 1/2 blocks
    auto g6 = QuadratureGrid::for_degree(6);
    ComplexMatrix c6 = cg_matrix(half, HalfInt(1.0));
    ComplexMatrix bd = ComplexMatrix::Zero(6, 6);
    bd.block(0, 0, 4, 4) = 0.7 * random_density(4, rng).matrix();
    bd.block(4, 4, 2, 2) = 0.3 * random_density(2, rng).matrix();
    DensityMatrix rho6(c6.adjoint() * bd * c6);
    CHECK(max_abs(reconstruct_blockdiag(sample_total_pdf(rho6, g6)) - bd) < 1e-9);
    CHECK_THROWS_AS(reconstruct_blockdiag(sample_total_pdf(singlet(), QuadratureGrid::for_degree(3))), ValidationError);
}

TEST_CASE("two-spin reconstruction and total from individual") {
    auto g2 = QuadratureGrid::for_degree(2), g4 = QuadratureGrid::for_degree(4);
    std::mt19937_64 rng(28);
    for (int it = 0; it < 50; ++it) {
        auto rho = random_density(4, rng, 1 + it % 4);
        auto w = sample_two_spin_tomogram(rho, g2, g2);
        CHECK((reconstruct_two_spin(w).matrix() - rho.matrix()).norm() < 1e-9);
        if (it < 20) {
            auto u = random_unitary(4, rng);
            auto a = total_from_individual(w, u), b = total_tomogram(rho, u);
            for (int k = 0; k < 4; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-9);
        }
    }
    auto p = random_product(rng);
    CHECK((reconstruct_two_spin(sample_two_spin_tomogram(p, g2, g2)).matrix() - p.matrix()).norm() < 1e-12);
    for (int it = 0; it < 10; ++it) {
        auto rho = random_density(6, rng);
        CHECK((reconstruct_two_spin(sample_two_spin_tomogram(rho, g2, g4)).matrix() - rho.matrix()).norm() < 1e-9);
    }
    auto wm = sample_two_spin_tomogram(DensityMatrix::maximally_mixed(4), g2, g2);
    for (double v : total_from_individual(wm, random_unitary(4, rng))) CHECK(v == doctest::Approx(0.25));
    auto w0 = total_from_individual(sample_two_spin_tomogram(polarized_initial(), g2, g2), ComplexMatrix::Identity(4, 4));
    CHECK(std::abs(w0[0] - 0.5) < 1e-12);
    CHECK(std::abs(w0[1] - 0.25) < 1e-12);
    CHECK(std::abs(w0[2]) < 1e-12);
    CHECK(std::abs(w0[3] - 0.25) < 1e-12);
    auto low = sample_two_spin_tomogram(random_density(6, rng), g2, g2);
    CHECK_THROWS_AS(reconstruct_two_spin(low), ValidationError);
}

TEST_CASE("two-spin csv") {
    std::mt19937_64 rng(29);
    auto g2 = QuadratureGrid::for_degree(2), g4 = QuadratureGrid::for_degree(4);
    auto w = sample_two_spin_tomogram(random_density(6, rng), g2, g4);
    std::stringstream ss;
    write_two_spin_csv(ss, w);
    auto back = read_two_spin_csv(ss);
    CHECK(back.basis.j_e == HalfInt(1.0));
    REQUIRE(back.values.size() == w.values.size());
    for (std::size_t i = 0; i < w.values.size(); ++i) CHECK(back.values[i] == w.values[i]);
}
