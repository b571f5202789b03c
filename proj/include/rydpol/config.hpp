#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "rydpol/eit.hpp"
#include "rydpol/errors.hpp"
#include "rydpol/gate.hpp"
#include "rydpol/units.hpp"

namespace rydpol {

// ---------------------------------------------------------------------------
// Flat section/key documents. Configs are TOML (scalar subset: sections,
// `key = value`, comments) or JSON (one object per section); the format is
// picked by file extension.
// ---------------------------------------------------------------------------

using ConfigValue = std::variant<double, long long, bool, std::string>;

class ConfigDoc {
  public:
    void set(const std::string& section, const std::string& key, ConfigValue v) {
        sections_[section][key] = std::move(v);
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    double number(const std::string& section, const std::string& key) const {
        const ConfigValue& v = fetch(section, key);
        if (std::holds_alternative<double>(v)) return std::get<double>(v);
        if (std::holds_alternative<long long>(v)) return static_cast<double>(std::get<long long>(v));
        throw ConfigError(section + "." + key + " must be a number");
    }

    double number_or(const std::string& section, const std::string& key, double fallback) const {
        if (!contains(section, key)) return fallback;
        return number(section, key);
    }

    long long integer(const std::string& section, const std::string& key) const {
        const ConfigValue& v = fetch(section, key);
        if (std::holds_alternative<long long>(v)) return std::get<long long>(v);
        throw ConfigError(section + "." + key + " must be an integer");
    }

    long long integer_or(const std::string& section, const std::string& key,
                         long long fallback) const {
        if (!contains(section, key)) return fallback;
        return integer(section, key);
    }

    bool contains(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    /// Every key must be consumed by a reader; leftovers are config errors.
    void check_consumed() const {
        for (const auto& [section, keys] : sections_) {
            for (const auto& [key, value] : keys) {
                if (!consumed_.count(section + "." + key)) {
                    throw ConfigError("unknown config key: " + section + "." + key);
                }
            }
        }
    }

    void mark_section_consumed(const std::string& section) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return;
        for (const auto& [key, value] : s->second) consumed_.insert(section + "." + key);
    }

  private:
    const ConfigValue& fetch(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) throw ConfigError("missing config section: [" + section + "]");
        auto k = s->second.find(key);
        if (k == s->second.end()) {
            throw ConfigError("missing config key: " + section + "." + key);
        }
        consumed_.insert(section + "." + key);
        return k->second;
    }

    std::map<std::string, std::map<std::string, ConfigValue>> sections_;
    mutable std::set<std::string> consumed_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline ConfigValue parse_toml_scalar(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("empty value at line " + std::to_string(line_no));
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw ConfigError("unterminated string at line " + std::to_string(line_no));
        }
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    // Integer if it parses fully without ., e, E.
    if (v.find_first_of(".eE") == std::string::npos) {
        std::size_t pos = 0;
        try {
            const long long i = std::stoll(v, &pos);
            if (pos == v.size()) return i;
        } catch (...) {
        }
    }
    std::size_t pos = 0;
    try {
        const double d = std::stod(v, &pos);
        if (pos == v.size()) return d;
    } catch (...) {
    }
    throw ConfigError("cannot parse value '" + v + "' at line " + std::to_string(line_no));
}

inline std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

}  // namespace detail

inline ConfigDoc parse_toml(std::istream& in) {
    ConfigDoc doc;
    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(detail::strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("malformed section header at line " + std::to_string(line_no));
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError("empty section name at line " + std::to_string(line_no));
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value at line " + std::to_string(line_no));
        }
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(line_no));
        doc.set(section, key, detail::parse_toml_scalar(line.substr(eq + 1), line_no));
    }
    return doc;
}

inline ConfigDoc parse_json_config(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    ConfigDoc doc;
    for (auto& [section, body] : j.items()) {
        if (!body.is_object()) {
            throw ConfigError("config section '" + section + "' must be an object");
        }
        for (auto& [key, value] : body.items()) {
            if (value.is_number_integer()) {
                doc.set(section, key, value.get<long long>());
            } else if (value.is_number()) {
                doc.set(section, key, value.get<double>());
            } else if (value.is_boolean()) {
                doc.set(section, key, value.get<bool>());
            } else if (value.is_string()) {
                doc.set(section, key, value.get<std::string>());
            } else {
                throw ConfigError("unsupported value type for " + section + "." + key);
            }
        }
    }
    return doc;
}

inline ConfigDoc load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        return parse_json_config(in);
    }
    return parse_toml(in);
}

// ---------------------------------------------------------------------------
// Typed readers. All keys carry explicit unit suffixes.
// ---------------------------------------------------------------------------

inline MediumParams medium_from_config(const ConfigDoc& doc,
                                       const std::string& section = "medium") {
    MediumParams m;
    m.gamma_e = units::mhz_to_rad_per_s(doc.number(section, "gamma_e_mhz"));
    m.gamma_rg = units::per_us_to_per_s(doc.number(section, "gamma_rg_per_us"));
    m.k_s = two_pi / units::nm_to_m(doc.number(section, "wavelength_nm"));
    m.length = units::um_to_m(doc.number(section, "length_um"));
    m.c6 = units::c6_au_to_si(doc.number(section, "c6_au"));
    if (doc.contains(section, "od_max")) {
        m.chi0_override = doc.number(section, "od_max") / (m.k_s * m.length);
        m.rho = 0.0;
        m.d_ge = 0.0;
    } else if (doc.contains(section, "chi0")) {
        m.chi0_override = doc.number(section, "chi0");
        m.rho = 0.0;
        m.d_ge = 0.0;
    } else {
        m.rho = units::per_cm3_to_per_m3(doc.number(section, "density_per_cm3"));
        m.d_ge = doc.number(section, "d_ge_coulomb_m");
    }
    m.validate();
    return m;
}

inline Drive drive_from_config(const ConfigDoc& doc, const std::string& section = "drive") {
    Drive d;
    d.omega_c = units::mhz_to_rad_per_s(doc.number(section, "omega_c_mhz"));
    d.delta_s = units::mhz_to_rad_per_s(doc.number(section, "delta_s_mhz"));
    if (doc.contains(section, "delta_c_mhz")) {
        d.delta_c = units::mhz_to_rad_per_s(doc.number(section, "delta_c_mhz"));
    } else if (doc.contains(section, "two_photon_mhz")) {
        d.delta_c = units::mhz_to_rad_per_s(doc.number(section, "two_photon_mhz")) - d.delta_s;
    } else {
        throw ConfigError("drive section needs delta_c_mhz or two_photon_mhz");
    }
    if (d.omega_c < 0.0) throw ConfigError("omega_c_mhz must be >= 0");
    return d;
}

inline EfficiencyBudget budget_from_config(const ConfigDoc& doc,
                                           const std::string& section = "budget") {
    EfficiencyBudget b;
    b.eta_r = doc.number(section, "eta_r");
    b.eta_l = doc.number(section, "eta_l");
    b.t_r = doc.number(section, "t_r");
    b.t_l = doc.number(section, "t_l");
    b.detector_qe = doc.number(section, "detector_qe");
    b.n_c = doc.number(section, "n_c");
    b.n_t = doc.number(section, "n_t");
    b.path_transmission_control = doc.number_or(section, "path_transmission_control", 1.0);
    b.path_transmission_target = doc.number_or(section, "path_transmission_target", 1.0);
    b.shots = doc.integer_or(section, "shots", 10000);
    b.validate();
    return b;
}

struct ReferenceVisibilities {
    double v_c = 1.0;
    double v_t = 1.0;
    double eps_r = 0.0;
    double eps_l = 0.0;

    /// Worst-case split V2 = 1, V3 = V_t of V_t = V2 V3, at the ideal means.
    NoiseModel noise_model() const { return NoiseModel{v_c, 1.0, v_t, 0.0, pi, pi}; }
};

inline ReferenceVisibilities visibilities_from_config(const ConfigDoc& doc,
                                                      const std::string& section = "noise") {
    ReferenceVisibilities v;
    v.v_c = doc.number(section, "v_c");
    v.v_t = doc.number(section, "v_t");
    v.eps_r = doc.number_or(section, "eps_r", 0.0);
    v.eps_l = doc.number_or(section, "eps_l", 0.0);
    return v;
}

struct HoppingInputs {
    double dark_time = 0.0;
    double tau = 0.0;
    double eta = 0.0;
    double t_single = 0.0;
    double interaction_factor = 0.82;
    double c6_over_chi6 = 29.0;
};

inline HoppingInputs hopping_from_config(const ConfigDoc& doc,
                                         const std::string& section = "hopping") {
    HoppingInputs h;
    h.dark_time = units::us_to_s(doc.number(section, "dark_time_us"));
    h.tau = units::us_to_s(doc.number(section, "tau_us"));
    h.eta = doc.number(section, "eta");
    h.t_single = doc.number(section, "t_single");
    h.interaction_factor = doc.number_or(section, "retrieval_interaction_factor", 0.82);
    h.c6_over_chi6 = doc.number_or(section, "c6_over_chi6", 29.0);
    return h;
}

// ---------------------------------------------------------------------------
// Config echo: emitted JSON that reproduces the ingested values.
// ---------------------------------------------------------------------------

inline nlohmann::json medium_to_json(const MediumParams& m) {
    nlohmann::json j;
    j["gamma_e_mhz"] = units::rad_per_s_to_mhz(m.gamma_e);
    j["gamma_rg_per_us"] = units::per_s_to_per_us(m.gamma_rg);
    j["wavelength_nm"] = two_pi / m.k_s * 1e9;
    j["length_um"] = units::m_to_um(m.length);
    j["c6_au"] = m.c6 / c6_atomic_unit;
    if (m.chi0_override) {
        j["chi0"] = *m.chi0_override;
    } else {
        j["density_per_cm3"] = m.rho / 1e6;
        j["d_ge_coulomb_m"] = m.d_ge;
    }
    return j;
}

inline nlohmann::json drive_to_json(const Drive& d) {
    nlohmann::json j;
    j["omega_c_mhz"] = units::rad_per_s_to_mhz(d.omega_c);
    j["delta_s_mhz"] = units::rad_per_s_to_mhz(d.delta_s);
    j["delta_c_mhz"] = units::rad_per_s_to_mhz(d.delta_c);
    return j;
}

}  // namespace rydpol
