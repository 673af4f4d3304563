#include "mutomo/materials.hpp"

#include "mutomo/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mutomo {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

Vec3 unit(const Vec3& v, const char* what) {
    if (!v.allFinite() || v.norm() < 1e-12) throw ValidationError(std::string(what) + ": axis must be a non-zero vector");
    return v.normalized();
}

Vec3 vec_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_axis(j.get<std::string>());
    auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw ValidationError("preset: axis needs 3 components");
    return Vec3(v[0], v[1], v[2]);
}

}  // namespace

std::string family_name(HamiltonianFamily f) {
    switch (f) {
        case HamiltonianFamily::HyperfineOnly: return "hyperfine";
        case HamiltonianFamily::IsotropicMu: return "mu";
        case HamiltonianFamily::AnisotropicMuStar: return "mustar";
    }
    return "?";
}

HamiltonianFamily parse_family(const std::string& s) {
    auto l = lower(s);
    if (l == "hyperfine" || l == "hf") return HamiltonianFamily::HyperfineOnly;
    if (l == "mu" || l == "isotropic") return HamiltonianFamily::IsotropicMu;
    if (l == "mustar" || l == "mu*" || l == "anisotropic") return HamiltonianFamily::AnisotropicMuStar;
    throw ValidationError("unknown Hamiltonian family '" + s + "'");
}

Vec3 parse_axis(const std::string& s) {
    auto l = lower(s);
    if (l == "x") return {1, 0, 0};
    if (l == "y") return {0, 1, 0};
    if (l == "z") return {0, 0, 1};
    std::stringstream ss(l);
    std::string tok;
    std::vector<double> v;
    try {
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    } catch (const std::exception&) {
        throw ValidationError("bad axis '" + s + "' (x, y, z or nx,ny,nz)");
    }
    if (v.size() != 3) throw ValidationError("bad axis '" + s + "' (x, y, z or nx,ny,nz)");
    return unit(Vec3(v[0], v[1], v[2]), "axis");
}

HamiltonianSpec MaterialPreset::spec(double B_gauss) const { return spec(B_gauss, B_axis, aniso_axis); }

HamiltonianSpec MaterialPreset::spec(double B_gauss, const Vec3& b_axis, const Vec3& n_axis) const {
    HamiltonianSpec s;
    s.family = family;
    s.j_e = j_e;
    if (family == HamiltonianFamily::HyperfineOnly) {
        if (B_gauss != 0.0) throw ValidationError("preset " + name + ": hyperfine-only family takes no field");
        s.omega0 = A();
    } else {
        s.A = A();
        s.B = B_gauss * unit(b_axis, "field");
    }
    if (family == HamiltonianFamily::AnisotropicMuStar) {
        s.deltaA = deltaA();
        s.aniso_axis = Direction::from_vector(unit(n_axis, "anisotropy"));
    }
    s.validate();
    return s;
}

MaterialPreset preset_from_json(const nlohmann::json& j) {
    try {
        MaterialPreset p;
        p.name = j.at("name").get<std::string>();
        p.family = parse_family(j.at("family").get<std::string>());
        p.A_MHz = j.at("A_MHz").get<double>();
        p.A_is_angular = j.value("A_is_angular", false);
        p.deltaA_MHz = j.value("deltaA_MHz", 0.0);
        p.deltaA_is_angular = j.value("deltaA_is_angular", p.A_is_angular);
        p.j_e = HalfInt(j.value("j_e", 0.5));
        p.notes = j.value("notes", "");
        if (j.contains("default_fields_G")) p.default_fields_G = j["default_fields_G"].get<std::vector<double>>();
        if (j.contains("B_axis")) p.B_axis = unit(vec_from_json(j["B_axis"]), "field");
        if (j.contains("aniso_axis")) p.aniso_axis = unit(vec_from_json(j["aniso_axis"]), "anisotropy");
        if (p.default_fields_G.empty()) throw ValidationError("preset " + p.name + ": empty field list");
        p.spec(p.family == HamiltonianFamily::HyperfineOnly ? 0.0 : p.default_fields_G.front());
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("preset json: ") + e.what());
    }
}

nlohmann::json to_json(const MaterialPreset& p) {
    return {{"name", p.name},
            {"family", family_name(p.family)},
            {"A_MHz", p.A_MHz},
            {"A_is_angular", p.A_is_angular},
            {"deltaA_MHz", p.deltaA_MHz},
            {"deltaA_is_angular", p.deltaA_is_angular},
            {"j_e", p.j_e.value()},
            {"notes", p.notes},
            {"default_fields_G", p.default_fields_G},
            {"B_axis", {p.B_axis(0), p.B_axis(1), p.B_axis(2)}},
            {"aniso_axis", {p.aniso_axis(0), p.aniso_axis(1), p.aniso_axis(2)}}};
}

const std::vector<MaterialPreset>& builtin_presets() {
    static const std::vector<MaterialPreset> presets = [] {
        std::vector<MaterialPreset> v;
        MaterialPreset vac;
        vac.name = "vacuum-mu";
        vac.family = HamiltonianFamily::HyperfineOnly;
        vac.A_MHz = 4453;
        vac.notes = "free muonium, zero field";
        v.push_back(vac);

        MaterialPreset q;
        q.name = "quartz";
        q.A_MHz = 4404;
        q.notes = "muonium in quartz";
        q.default_fields_G = {0, 790, 1580, 3160};
        v.push_back(q);

        MaterialPreset si;
        si.name = "si-mustar";
        si.family = HamiltonianFamily::AnisotropicMuStar;
        si.A_MHz = 92.595;
        si.deltaA_MHz = -75.776;
        si.notes = "anomalous muonium in silicon";
        si.default_fields_G = {0, 10, 33, 100};
        si.aniso_axis = {1, 0, 0};
        v.push_back(si);

        MaterialPreset s1;
        s1.name = "mulike-spin1";
        s1.family = HamiltonianFamily::HyperfineOnly;
        s1.A_MHz = 100;
        s1.j_e = HalfInt(1.0);
        s1.notes = "muon coupled to an effective spin-1 shell, illustrative coupling";
        v.push_back(s1);
        return v;
    }();
    return presets;
}

MaterialPreset find_preset(const std::string& name, const std::string& search_path) {
    std::stringstream ss(search_path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) continue;
        std::filesystem::path f = std::filesystem::path(dir) / (name + ".json");
        if (!std::filesystem::exists(f)) continue;
        std::ifstream in(f);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("preset file " + f.string() + ": " + e.what());
        }
        return preset_from_json(j);
    }
    for (const auto& p : builtin_presets())
        if (p.name == lower(name)) return p;
    throw ValidationError("unknown material preset '" + name + "'");
}

MaterialPreset find_preset(const std::string& name) {
    const char* env = std::getenv("MUTOMO_PRESET_PATH");
    return find_preset(name, env ? env : "");
}

}  // namespace mutomo
