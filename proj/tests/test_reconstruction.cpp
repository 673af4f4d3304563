#include <doctest.h>

#include "mutomo/error.hpp"
#include "mutomo/materials.hpp"
#include "mutomo/reconstruction.hpp"
#include "mutomo/spin_tomography.hpp"
#include "support.hpp"

using namespace mutomo;
using namespace testing;

namespace {

const double pi = std::numbers::pi;

MeasurementPlan generic_plan(std::mt19937_64& rng) {
    MeasurementPlan p;
    p.hamiltonian = random_hermitian(4, rng);
    p.times = default_plan_times(*p.hamiltonian);
    return p;
}

MeasurementPlan hf_plan() {
    HamiltonianSpec s;
    s.omega0 = 2.0;
    MeasurementPlan p;
    p.propagator = make_propagator_spec(s);
    p.times = {0.1, 0.45, 0.9, 1.3, 2.2};
    return p;
}

MeasurementPlan mustar_xz_plan(double B) {
    auto s = find_preset("si-mustar", "").spec(B);
    return default_plan(make_propagator_spec(s));
}

}  // namespace

TEST_CASE("parameter basis is orthonormal") {
    for (int a = 0; a < 15; ++a)
        for (int b = 0; b < 15; ++b)
            CHECK(std::abs((parameter_basis(a) * parameter_basis(b)).trace() - (a == b ? 1.0 : 0.0)) < 1e-15);
    CHECK(parameter_label(0) == "IX");
    CHECK(parameter_label(14) == "ZZ");
    std::mt19937_64 rng(1);
    auto rho = random_density(4, rng).matrix();
    auto th = parameters_of(rho);
    ComplexMatrix back = ComplexMatrix::Identity(4, 4) / 4.0;
    for (int k = 0; k < 15; ++k) back += th(k) * parameter_basis(k);
    CHECK(max_abs(back - rho) < 1e-15);
}

TEST_CASE("forward model") {
    // free muonium from the polarized state: reduced tomogram law
    auto p = hf_plan();
    auto v = forward_model(muon_polarized_state(), p);
    REQUIRE(v.size() == 15);
    for (std::size_t l = 0; l < p.times.size(); ++l) {
        const double t = p.times[l];
        CHECK(v[3 * l + 0] == doctest::Approx(0.5));
        CHECK(v[3 * l + 1] == doctest::Approx(0.5));
        CHECK(v[3 * l + 2] == doctest::Approx(0.5 * (1 + 0.5 * (1 + std::cos(2.0 * t)))));
    }
    for (double x : forward_model(DensityMatrix::maximally_mixed(4), p)) CHECK(x == doctest::Approx(0.5));

    // affine in rho, and the design matrix reproduces it
    std::mt19937_64 rng(2);
    auto g = generic_plan(rng);
    auto d = design_matrix(g);
    for (int trial = 0; trial < 10; ++trial) {
        auto r1 = random_density(4, rng), r2 = random_density(4, rng);
        const double a = std::uniform_real_distribution<double>(0, 1)(rng);
        auto mix = DensityMatrix(a * r1.matrix() + (1 - a) * r2.matrix());
        auto f1 = forward_model(r1, g), f2 = forward_model(r2, g), fm = forward_model(mix, g);
        Eigen::VectorXd pred = d.offset + d.G * parameters_of(r1.matrix());
        for (std::size_t i = 0; i < fm.size(); ++i) {
            CHECK(fm[i] == doctest::Approx(a * f1[i] + (1 - a) * f2[i]).epsilon(1e-12));
            CHECK(std::abs(pred(i) - f1[i]) < 1e-12);
        }
    }
}

TEST_CASE("identifiability") {
    std::mt19937_64 rng(3);
    auto g = generic_plan(rng);
    CHECK(identifiability(g).rank == 15);
    CHECK(std::isfinite(identifiability(g).condition));

    auto h = hf_plan();
    CHECK(identifiability(h).rank < 15);
    CHECK_FALSE(describe_null_space(h).empty());

    auto z = hf_plan();
    z.times = {0.0};
    CHECK(identifiability(z).rank == 3);

    // N along x, B along z: the pi rotation about z hides two population combinations
    CHECK(identifiability(mustar_xz_plan(10)).rank == 13);
    CHECK(identifiability(mustar_xz_plan(100)).rank == 13);
}

TEST_CASE("rank is invariant under a global rotation") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        HamiltonianSpec s;
        s.family = HamiltonianFamily::AnisotropicMuStar;
        s.A = 1.3;
        s.deltaA = -0.8;
        s.B = random_direction(rng).n * 40.0;
        s.aniso_axis = random_direction(rng);
        auto p = default_plan(make_propagator_spec(s));
        p.directions.push_back(random_direction(rng));

        // rotation about a random axis, applied to directions, field and anisotropy axis
        const Vec3 axis = random_direction(rng).n;
        const double ang = std::uniform_real_distribution<double>(0, 2 * pi)(rng);
        const Eigen::Matrix3d R = Eigen::AngleAxisd(ang, axis).toRotationMatrix();
        auto q = p;
        q.propagator.hamiltonian.B = R * s.B;
        q.propagator.hamiltonian.aniso_axis = Direction::from_vector(R * s.aniso_axis.n);
        for (auto& d : q.directions) d = Direction::from_vector(R * d.n);
        auto ip = identifiability(p), iq = identifiability(q);
        CHECK(ip.rank == iq.rank);
        CHECK(ip.condition == doctest::Approx(iq.condition).epsilon(1e-6));

        // the same statement on an explicit Hamiltonian with W = R x R
        MeasurementPlan a;
        a.hamiltonian = random_hermitian(4, rng);
        a.times = default_plan_times(*a.hamiltonian);
        ComplexMatrix r1 = random_unitary(2, rng);
        ComplexMatrix w = kron(r1, r1);
        MeasurementPlan b = a;
        b.hamiltonian = w * *a.hamiltonian * w.adjoint();
        // a direction n maps to the direction of r1 (n.sigma) r1^dag
        for (auto& d : b.directions) {
            ComplexMatrix ns = r1 * (d.n(0) * pauli(1) + d.n(1) * pauli(2) + d.n(2) * pauli(3)) * r1.adjoint();
            d = Direction::from_vector(Vec3(ns(0, 1).real(), -ns(0, 1).imag(), ns(0, 0).real()));
        }
        CHECK(identifiability(a).rank == identifiability(b).rank);
        CHECK(identifiability(a).condition == doctest::Approx(identifiability(b).condition).epsilon(1e-6));
    }
}

TEST_CASE("noiseless round trip") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = generic_plan(rng);
        auto rho = random_density(4, rng, 1 + trial % 4);
        auto r = reconstruct_initial(forward_model(rho, p), {}, p);
        CHECK(r.rank == 15);
        CHECK((r.rho.matrix() - rho.matrix()).norm() <= 1e-6);
        CHECK(r.residual_norm < 1e-8);
    }
}

TEST_CASE("polarized initial state from anisotropic muonium data") {
    auto p = mustar_xz_plan(33);
    auto rho0 = muon_polarized_state();
    auto v = forward_model(rho0, p);
    CHECK_THROWS_AS(reconstruct_initial(v, {}, p), NumericError);
    ReconstructOptions opt;
    opt.min_norm = true;
    auto r = reconstruct_initial(v, {}, p, opt);
    CHECK(r.rank == 13);
    CHECK((r.rho.matrix() - rho0.matrix()).norm() <= 1e-6);
}

TEST_CASE("noise scaling") {
    std::mt19937_64 rng(6);
    auto p = generic_plan(rng);
    auto d = design_matrix(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.G);
    double pinv_f = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) pinv_f += 1 / std::pow(svd.singularValues()(i), 2);
    pinv_f = std::sqrt(pinv_f);

    const double sigma = 5e-3;
    std::normal_distribution<double> noise(0, sigma);
    auto rho = random_density(4, rng);
    auto clean = forward_model(rho, p);
    double mean = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto v = clean;
        for (auto& x : v) x += noise(rng);
        auto r = reconstruct_initial(v, std::vector<double>(v.size(), sigma), p);
        mean += (r.unprojected - rho.matrix()).norm() / 100;
        CHECK(r.rho.is_psd());
        CHECK(r.rho.matrix().trace().real() == doctest::Approx(1.0));
    }
    const double predicted = sigma * pinv_f;
    CHECK(mean > predicted / 3);
    CHECK(mean < predicted * 3);
    CHECK(mean <= sigma * d.condition * 15);
}

TEST_CASE("pure state estimates get clipped") {
    std::mt19937_64 rng(7);
    auto p = generic_plan(rng);
    auto rho = random_density(4, rng, 1);
    std::normal_distribution<double> noise(0, 2e-2);
    int clipped = 0;
    for (int trial = 0; trial < 20; ++trial) {
        auto v = forward_model(rho, p);
        for (auto& x : v) x += noise(rng);
        auto r = reconstruct_initial(v, std::vector<double>(v.size(), 2e-2), p);
        clipped += r.clipped;
        CHECK(r.rho.is_psd());
    }
    CHECK(clipped > 10);
}

TEST_CASE("plan validation and json") {
    auto p = hf_plan();
    p.times = {0.5, 0.5 + pi};  // omega0 = 2, period pi
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.times = {0.3, 0.3};
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.times = {};
    CHECK_THROWS_AS(p.validate(), ValidationError);

    std::mt19937_64 rng(8);
    auto g = generic_plan(rng);
    auto back = plan_from_json(nlohmann::json::parse(to_json(g).dump()));
    CHECK(max_abs(*back.hamiltonian - *g.hamiltonian) == 0.0);
    CHECK(back.times == g.times);

    auto m = mustar_xz_plan(10);
    auto mb = plan_from_json(to_json(m));
    CHECK(identifiability(mb).rank == identifiability(m).rank);
    CHECK_THROWS_AS(plan_from_json(nlohmann::json::parse(R"({"hamiltonian": {"family": "nope"}})")), ValidationError);

    auto rho = random_density(4, rng);
    auto r = reconstruct_initial(forward_model(rho, g), {}, g);
    auto j = report_json(r, g);
    for (const char* key : {"plan", "rank", "condition_number", "rho0_real", "rho0_imag", "residual_norm", "clipped"})
        CHECK(j.contains(key));
    CHECK_THROWS_AS(reconstruct_initial({0.5, 0.5}, {}, g), ValidationError);
}
