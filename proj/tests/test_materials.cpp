#include <doctest.h>

#include "mutomo/error.hpp"
#include "mutomo/materials.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace mutomo;

TEST_CASE("built-in presets") {
    auto q = find_preset("quartz", "");
    CHECK(q.A() == doctest::Approx(2 * std::numbers::pi * 4.404));
    CHECK(q.default_fields_G == std::vector<double> {0, 790, 1580, 3160});
    PhysicalConstants k;
    CHECK(k.critical_field(q.A()) == doctest::Approx(1580).epsilon(0.01));

    auto si = find_preset("si-mustar", "");
    CHECK(k.critical_field(si.A()) == doctest::Approx(33).epsilon(0.05));
    auto s = si.spec(33);
    CHECK(s.family == HamiltonianFamily::AnisotropicMuStar);
    CHECK(s.deltaA == doctest::Approx(2 * std::numbers::pi * -0.075776));
    CHECK(detect_variant(s) == ClosedFormVariant::MuStarXZ);

    auto v = find_preset("vacuum-mu", "");
    CHECK(v.spec(0).omega0 == doctest::Approx(2 * std::numbers::pi * 4.453));
    CHECK_THROWS_AS(v.spec(10), ValidationError);
    CHECK(detect_variant(find_preset("mulike-spin1", "").spec(0)) == ClosedFormVariant::MuLikeSpin1);
    CHECK_THROWS_AS(find_preset("unobtainium", ""), ValidationError);
}

TEST_CASE("shipped preset files match the built-ins") {
    const std::string dir = MUTOMO_SOURCE_DIR "/data/materials";
    for (const auto& p : builtin_presets()) {
        auto f = find_preset(p.name, dir);
        CHECK(to_json(f) == to_json(p));
    }
}

TEST_CASE("search path and environment") {
    auto dir = std::filesystem::temp_directory_path() / "mutomo_presets";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "quartz.json");
        f << R"({"name": "quartz", "family": "mu", "A_MHz": 27.0, "A_is_angular": true, "default_fields_G": [5], "B_axis": [1, 1, 0]})";
        std::ofstream g(dir / "broken.json");
        g << "{ not json";
        std::ofstream h(dir / "nofamily.json");
        h << R"({"name": "x", "A_MHz": 1})";
    }
    auto q = find_preset("quartz", "/nonexistent:" + dir.string());
    CHECK(q.A() == doctest::Approx(0.027));
    CHECK(q.B_axis(0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(q.spec(5).B(1) == doctest::Approx(5 / std::sqrt(2.0)));
    CHECK_THROWS_AS(find_preset("broken", dir.string()), ValidationError);
    CHECK_THROWS_AS(find_preset("nofamily", dir.string()), ValidationError);

    ::setenv("MUTOMO_PRESET_PATH", dir.string().c_str(), 1);
    CHECK(find_preset("quartz").A() == doctest::Approx(0.027));
    ::unsetenv("MUTOMO_PRESET_PATH");
    CHECK(find_preset("quartz").A() == doctest::Approx(2 * std::numbers::pi * 4.404));
}

TEST_CASE("axis parsing") {
    CHECK(parse_axis("x") == Vec3(1, 0, 0));
    CHECK(parse_axis("Z") == Vec3(0, 0, 1));
    CHECK((parse_axis("0,3,4") - Vec3(0, 0.6, 0.8)).norm() < 1e-15);
    CHECK_THROWS_AS(parse_axis("0,0,0"), ValidationError);
    CHECK_THROWS_AS(parse_axis("diagonal"), ValidationError);
    CHECK_THROWS_AS(parse_family("graphene"), ValidationError);
}
