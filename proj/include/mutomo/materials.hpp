#pragma once

#include "mutomo/dynamics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mutomo {

// frequencies as given in the literature, with an explicit angular/linear flag each
struct MaterialPreset {
    std::string name;
    HamiltonianFamily family = HamiltonianFamily::IsotropicMu;
    double A_MHz = 0;
    bool A_is_angular = false;
    double deltaA_MHz = 0;
    bool deltaA_is_angular = false;
    Spin j_e = half;
    std::string notes;
    std::vector<double> default_fields_G {0.0};
    Vec3 B_axis {0, 0, 1};
    Vec3 aniso_axis {0, 0, 1};

    // rad/ns
    double A() const { return mhz_to_rad_per_ns(A_MHz, A_is_angular); }
    double deltaA() const { return mhz_to_rad_per_ns(deltaA_MHz, deltaA_is_angular); }
    HamiltonianSpec spec(double B_gauss) const;
    HamiltonianSpec spec(double B_gauss, const Vec3& b_axis, const Vec3& n_axis) const;
};

std::string family_name(HamiltonianFamily f);
HamiltonianFamily parse_family(const std::string& s);

MaterialPreset preset_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MaterialPreset& p);

const std::vector<MaterialPreset>& builtin_presets();
// <dir>/<name>.json for each dir of the search path (':'-separated), then the built-ins
MaterialPreset find_preset(const std::string& name, const std::string& search_path);
// search path from MUTOMO_PRESET_PATH
MaterialPreset find_preset(const std::string& name);

Vec3 parse_axis(const std::string& s);

}  // namespace mutomo
