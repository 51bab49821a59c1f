#pragma once
// Flat key=value run configuration, figure presets, and the JSON form used by
// the metadata sidecar.
//
//   # comment
//   preset = fig2
//   gm = 0.04
//
// The preset (wherever it appears) is applied first, then explicit keys in
// file order. Each key may appear once.

#include <charconv>
#include <functional>
#include <map>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mwconv/scan.hpp"

namespace mwconv {

struct RunConfig {
  std::string preset;
  // medium
  double gamma31_hz = sodium_d1::gamma31 / (2.0 * std::numbers::pi);
  double gamma32_rel = 1.0;
  double Gamma_rel = sodium_d1::Gamma_rel;
  double lambda31_nm = sodium_d1::lambda31 * 1e9;
  double omega21_hz = sodium_d1::ground_splitting_hz;
  double density_per_cm3 = sodium_d1::density * 1e-6;
  double temperature_K = sodium_d1::temperature;
  double mass_amu = sodium_d1::mass_amu;
  double intensity_scale = 0.0;  // 0: calibrate g = 2 to 12.6 mW/cm^2
  // fields
  double g31_in = 2.0;
  double g32_in = 0.0;
  double gm = 0.02;
  double delta31 = 0.0;
  double delta_m = 0.0;
  double chi_m = 0.0;
  // run
  double zeta_end = 400.0;
  int samples = 801;
  int quad_nodes = 64;
  std::string quad_kind = "resonance";
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  bool equal_k = false;
  // sweep
  std::string sweep_param;
  std::string sweep_grid;

  bool has_sweep() const { return !sweep_param.empty(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError("'" + std::string(s) + "' is not a number");
  if (!std::isfinite(v)) throw ConfigError("value must be finite");
  return v;
}

inline int parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError("'" + std::string(s) + "' is not an integer");
  return v;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("'" + std::string(s) + "' is not a boolean");
}

inline double positive(double v) {
  if (!(v > 0.0)) throw ConfigError("must be positive");
  return v;
}
inline double non_negative(double v) {
  if (!(v >= 0.0)) throw ConfigError("must be non-negative");
  return v;
}
inline double tolerance(double v) {
  if (!(v > 0.0 && v <= 1e-2)) throw ConfigError("must lie in (0, 1e-2]");
  return v;
}

struct KeySpec {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<nlohmann::json(const RunConfig&)> get;
};

#define MWCONV_DOUBLE_KEY(name, check)                                        \
  {#name, {[](RunConfig& c, std::string_view v) { c.name = check(parse_double(v)); }, \
           [](const RunConfig& c) { return nlohmann::json(c.name); }}}

inline double any_value(double v) { return v; }

}  // namespace detail

inline std::vector<double> parse_grid(std::string_view text);

inline const std::map<std::string, detail::KeySpec>& config_keys() {
  using namespace detail;
  static const std::map<std::string, KeySpec> keys = {
      MWCONV_DOUBLE_KEY(gamma31_hz, positive),
      MWCONV_DOUBLE_KEY(gamma32_rel, positive),
      MWCONV_DOUBLE_KEY(Gamma_rel, non_negative),
      MWCONV_DOUBLE_KEY(lambda31_nm, positive),
      MWCONV_DOUBLE_KEY(omega21_hz, non_negative),
      MWCONV_DOUBLE_KEY(density_per_cm3, positive),
      MWCONV_DOUBLE_KEY(temperature_K, non_negative),
      MWCONV_DOUBLE_KEY(mass_amu, positive),
      MWCONV_DOUBLE_KEY(intensity_scale, non_negative),
      MWCONV_DOUBLE_KEY(g31_in, non_negative),
      MWCONV_DOUBLE_KEY(g32_in, non_negative),
      MWCONV_DOUBLE_KEY(gm, non_negative),
      MWCONV_DOUBLE_KEY(delta31, any_value),
      MWCONV_DOUBLE_KEY(delta_m, any_value),
      MWCONV_DOUBLE_KEY(chi_m, any_value),
      MWCONV_DOUBLE_KEY(zeta_end, positive),
      MWCONV_DOUBLE_KEY(rel_tol, tolerance),
      MWCONV_DOUBLE_KEY(abs_tol, tolerance),
      {"samples",
       {[](RunConfig& c, std::string_view v) {
          const int n = parse_int(v);
          if (n < 2) throw ConfigError("must be at least 2");
          c.samples = n;
        },
        [](const RunConfig& c) { return nlohmann::json(c.samples); }}},
      {"quad_nodes",
       {[](RunConfig& c, std::string_view v) {
          const int n = parse_int(v);
          if (n < 1) throw ConfigError("must be at least 1");
          c.quad_nodes = n;
        },
        [](const RunConfig& c) { return nlohmann::json(c.quad_nodes); }}},
      {"quad_kind",
       {[](RunConfig& c, std::string_view v) {
          const std::string s(trim(v));
          try {
            quadrature_kind_from_string(s);
          } catch (const DomainError& e) {
            throw ConfigError(e.what());
          }
          c.quad_kind = s;
        },
        [](const RunConfig& c) { return nlohmann::json(c.quad_kind); }}},
      {"equal_k",
       {[](RunConfig& c, std::string_view v) { c.equal_k = parse_bool(v); },
        [](const RunConfig& c) { return nlohmann::json(c.equal_k); }}},
      {"sweep_param",
       {[](RunConfig& c, std::string_view v) {
          const std::string s(trim(v));
          if (!s.empty()) {
            try {
              sweep_parameter_from_string(s);
            } catch (const DomainError& e) {
              throw ConfigError(e.what());
            }
          }
          c.sweep_param = s;
        },
        [](const RunConfig& c) { return nlohmann::json(c.sweep_param); }}},
      {"sweep_grid",
       {[](RunConfig& c, std::string_view v) {
          const std::string s(trim(v));
          if (!s.empty()) parse_grid(s);
          c.sweep_grid = s;
        },
        [](const RunConfig& c) { return nlohmann::json(c.sweep_grid); }}},
  };
  return keys;
}

#undef MWCONV_DOUBLE_KEY

/// Grid text: parts joined by '+', each one of
///   lin:a:b:n   log:a:b:n   symlog:a:b:n (0 and +-log)   list:v1,v2,...
/// The merged grid is sorted ascending.
inline std::vector<double> parse_grid(std::string_view text) {
  using detail::parse_double;
  using detail::parse_int;
  std::vector<std::vector<double>> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t plus = text.find('+', start);
    // '+' directly after 'e' or ':' or ',' belongs to a number.
    std::size_t cut = plus;
    while (cut != std::string_view::npos && cut > 0 &&
           (text[cut - 1] == 'e' || text[cut - 1] == 'E' ||
            text[cut - 1] == ':' || text[cut - 1] == ','))
      cut = text.find('+', cut + 1);
    const std::string_view part = detail::trim(
        text.substr(start, cut == std::string_view::npos ? std::string_view::npos
                                                          : cut - start));
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos)
      throw ConfigError("grid part '" + std::string(part) + "' lacks a kind");
    const std::string_view kind = part.substr(0, colon);
    const std::string_view args = part.substr(colon + 1);
    std::vector<std::string_view> f;
    const char sep = kind == "list" ? ',' : ':';
    for (std::size_t p = 0;;) {
      const std::size_t q = args.find(sep, p);
      f.push_back(args.substr(p, q == std::string_view::npos ? q : q - p));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    try {
      if (kind == "list") {
        std::vector<double> v;
        for (auto s : f) v.push_back(parse_double(s));
        parts.push_back(v);
      } else {
        if (f.size() != 3)
          throw ConfigError("grid '" + std::string(part) + "' needs a:b:n");
        const double a = parse_double(f[0]), b = parse_double(f[1]);
        const int n = parse_int(f[2]);
        if (kind == "lin") parts.push_back(linspace(a, b, n));
        else if (kind == "log") parts.push_back(geomspace(a, b, n));
        else if (kind == "symlog") parts.push_back(symmetric_geomspace(a, b, n));
        else throw ConfigError("unknown grid kind '" + std::string(kind) + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    if (cut == std::string_view::npos) break;
    start = cut + 1;
  }
  try {
    return merge_grids(std::move(parts));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

inline std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig4", "fig5", "ideal-weak", "ideal-strong"};
}

/// Parameter sets for the sodium D1 figures and two ideal-medium runs
/// (no Doppler broadening, no ground dephasing).
inline RunConfig preset_config(const std::string& name) {
  RunConfig c;  // defaults are the fig2 set
  c.preset = name;
  auto sweep = [&c](const char* param, const char* grid) {
    c.zeta_end = 340.0;
    c.samples = 69;
    c.sweep_param = param;
    c.sweep_grid = grid;
  };
  if (name == "fig2") return c;
  if (name == "fig3") {
    sweep("mw_detuning", "symlog:1e-6:5e-3:100");
  } else if (name == "fig4") {
    sweep("optical_detuning", "lin:-200:200:201");
  } else if (name == "fig5") {
    sweep("mw_rabi", "log:1e-3:1e3:160+lin:0.005:0.05:60");
  } else if (name == "ideal-weak" || name == "ideal-strong") {
    c.Gamma_rel = 0.0;
    c.temperature_K = 0.0;
    if (name == "ideal-strong") {
      c.gm = 50.0;
      c.zeta_end = 200.0;
    }
  } else {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (available: " + list + ")");
  }
  return c;
}

/// Sets one key; errors name the key and the given origin ("line 3", "--set").
inline void apply_key(RunConfig& c, const std::string& key,
                      std::string_view value, const std::string& origin) {
  const auto& keys = config_keys();
  const auto it = keys.find(key);
  if (it == keys.end())
    throw ConfigError(origin + ": unknown key '" + key + "'");
  try {
    it->second.set(c, value);
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": key '" + key + "': " + e.what());
  }
}

struct KeyValue {
  std::string key;
  std::string value;
  std::string origin;
};

inline KeyValue split_assignment(std::string_view line, const std::string& origin) {
  const std::size_t eq = line.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(origin + ": expected key=value");
  KeyValue kv{std::string(detail::trim(line.substr(0, eq))),
              std::string(detail::trim(line.substr(eq + 1))), origin};
  if (kv.key.empty()) throw ConfigError(origin + ": empty key");
  return kv;
}

/// Builds a configuration from assignments: preset first, then the rest.
inline RunConfig build_config(const std::vector<KeyValue>& items) {
  RunConfig c;
  std::map<std::string, std::string> seen;
  for (const auto& kv : items) {
    if (!seen.emplace(kv.key, kv.origin).second)
      throw ConfigError(kv.origin + ": key '" + kv.key + "' already set at " +
                        seen[kv.key]);
    if (kv.key == "preset") c = preset_config(kv.value);
  }
  for (const auto& kv : items)
    if (kv.key != "preset") apply_key(c, kv.key, kv.value, kv.origin);
  return c;
}

inline std::vector<KeyValue> parse_assignments(std::string_view text) {
  std::vector<KeyValue> items;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                      : nl - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (!line.empty())
      items.push_back(split_assignment(line, "line " + std::to_string(line_no)));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return items;
}

inline RunConfig parse_config(std::string_view text) {
  return build_config(parse_assignments(text));
}

// ---------------------------------------------------------------------------
// Conversion to the simulation types

inline AtomMedium to_medium(const RunConfig& c) {
  try {
    AtomMedium m = AtomMedium::from_wavelength(
        2.0 * std::numbers::pi * c.gamma31_hz, c.gamma32_rel, c.Gamma_rel,
        c.lambda31_nm * 1e-9, 2.0 * std::numbers::pi * c.omega21_hz,
        c.density_per_cm3 * 1e6,
        most_probable_speed(c.temperature_K, c.mass_amu * constants::amu));
    if (c.intensity_scale > 0.0) {
      m.intensity_scale = c.intensity_scale;
    } else {
      m.intensity_scale =
          sodium_d1::calib_intensity /
          rabi_to_intensity(sodium_d1::calib_rabi, m.omega31, m.gamma31, 1.0);
    }
    return m;
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(std::string("medium: ") + e.what());
  }
}

inline DriveFields to_fields(const RunConfig& c) {
  DriveFields f;
  f.a1 = c.g31_in;
  f.a2 = c.g32_in;
  f.gm = c.gm;
  f.chi_m = c.chi_m;
  f.delta31 = c.delta31;
  f.delta_m = c.delta_m;
  return f;
}

inline Scenario to_scenario(const RunConfig& c) {
  Scenario s;
  s.medium = to_medium(c);
  s.fields = to_fields(c);
  s.quadrature = {quadrature_kind_from_string(c.quad_kind), c.quad_nodes};
  s.zeta_end = c.zeta_end;
  s.samples = c.samples;
  s.rel_tol = c.rel_tol;
  s.abs_tol = c.abs_tol;
  s.equal_wavevectors = c.equal_k;
  if (!(s.fields.g0sq() > 0.0))
    throw ConfigError("key 'g31_in': input optical field must be nonzero");
  return s;
}

inline SweepSpec to_sweep_spec(const RunConfig& c) {
  if (!c.has_sweep()) throw ConfigError("key 'sweep_param' is not set");
  if (c.sweep_grid.empty()) throw ConfigError("key 'sweep_grid' is not set");
  SweepSpec spec;
  spec.parameter = sweep_parameter_from_string(c.sweep_param);
  spec.values = parse_grid(c.sweep_grid);
  spec.base = to_scenario(c);
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("key 'sweep_grid': ") + e.what());
  }
  return spec;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  if (!c.preset.empty()) j["preset"] = c.preset;
  for (const auto& [key, spec] : config_keys()) j[key] = spec.get(c);
  return j;
}

/// Inverse of config_to_json. Every key present is applied after the preset.
inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  std::vector<KeyValue> items;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer()) {
      text = std::to_string(value.get<long long>());
    } else if (value.is_number()) {
      char buf[64];
      const auto r = std::to_chars(buf, buf + sizeof buf, value.get<double>());
      text.assign(buf, r.ptr);
    } else {
      throw ConfigError("JSON key '" + key + "': unsupported value type");
    }
    items.push_back({key, text, "json"});
  }
  return build_config(items);
}

}  // namespace mwconv
