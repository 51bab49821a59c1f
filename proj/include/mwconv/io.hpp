#pragma once
// CSV tables and the JSON metadata sidecar. Numbers are written with
// std::to_chars, which ignores the locale.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mwconv/config.hpp"

#ifndef MWCONV_VERSION
#define MWCONV_VERSION "0.0.0"
#endif

namespace mwconv {

inline constexpr const char* kTraceHeader =
    "zeta,I31_rel,I32_rel,Phi_wrapped,Phi_unwrapped,g0sq,rho33_avg,motion_const";
inline constexpr const char* kSweepHeader =
    "value,I32_rel,I31_rel,g0sq,rho33_avg,Phi_wrapped,motion_const,I32_peak,status";

/// 17 significant digits, scientific notation.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v,
                               std::chars_format::scientific, 16);
  return std::string(buf, r.ptr);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

namespace detail {
inline void write_trace_row(std::ostream& os, const TraceSample& s) {
  os << format_number(s.zeta) << ',' << format_number(s.I31_rel) << ','
     << format_number(s.I32_rel) << ',' << format_number(s.Phi_wrapped) << ','
     << format_number(s.Phi_unwrapped) << ',' << format_number(s.g0sq) << ','
     << format_number(s.rho33_avg) << ',' << format_number(s.motion_const);
}
}  // namespace detail

inline void write_trace_csv(std::ostream& os, const PropagationTrace& trace) {
  os << kTraceHeader << '\n';
  for (const TraceSample& s : trace.samples) {
    detail::write_trace_row(os, s);
    os << '\n';
  }
}

inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << kSweepHeader << '\n';
  const double nan = std::nan("");
  for (const SweepRow& r : table.rows) {
    os << format_number(r.value);
    for (double v : {r.I32_rel, r.I31_rel, r.g0sq, r.rho33_avg, r.Phi_wrapped,
                     r.motion_const, r.I32_peak})
      os << ',' << format_number(r.ok ? v : nan);
    os << ',' << csv_quote(r.status) << '\n';
  }
}

/// Long format for trace-valued sweeps: the swept value, then a trace row.
inline void write_sweep_traces_csv(std::ostream& os, const SweepTable& table) {
  os << "value," << kTraceHeader << '\n';
  for (const SweepRow& r : table.rows) {
    if (!r.trace) continue;
    for (const TraceSample& s : r.trace->samples) {
      os << format_number(r.value) << ',';
      detail::write_trace_row(os, s);
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Sidecar

inline nlohmann::json derived_json(const Scenario& s) {
  const AtomMedium& m = s.medium;
  nlohmann::json j;
  j["gamma31_per_s"] = m.gamma31;
  j["omega31_rad_s"] = m.omega31;
  j["k31_rad_m"] = m.k31;
  j["k32_rad_m"] = m.k32;
  j["vp_m_s"] = m.vp;
  j["doppler_width"] = m.doppler_width();
  j["intensity_scale"] = m.intensity_scale;
  j["I31_in_W_m2"] =
      rabi_to_intensity(s.fields.g1(), m.omega31, m.gamma31, m.intensity_scale);
  j["length_m"] = zeta_to_length(s.zeta_end, m.N, m.omega31);
  j["quadrature"] = {{"kind", to_string(s.quadrature.kind)},
                     {"nodes", s.quadrature.nodes}};
  j["rel_tol"] = s.rel_tol;
  j["abs_tol"] = s.abs_tol;
  return j;
}

/// Everything needed to repeat a run: the command and the full configuration.
/// Derived quantities are informational.
inline nlohmann::json make_sidecar(const std::string& command,
                                   const RunConfig& config) {
  nlohmann::json j;
  j["tool"] = "mwconv";
  j["version"] = MWCONV_VERSION;
  j["command"] = command;
  j["config"] = config_to_json(config);
  const Scenario s = to_scenario(config);
  j["derived"] = derived_json(s);
  if (command == "sweep") {
    const SweepSpec spec = to_sweep_spec(config);
    j["sweep"] = {{"parameter", to_string(spec.parameter)},
                  {"values", spec.values}};
  }
  return j;
}

struct SidecarRun {
  std::string command;
  RunConfig config;
};

inline SidecarRun read_sidecar(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("command") || !j.contains("config"))
    throw ConfigError("sidecar must contain 'command' and 'config'");
  return {j.at("command").get<std::string>(), config_from_json(j.at("config"))};
}

/// fig2.csv -> fig2.json; any other name gets ".json" appended.
inline std::string sidecar_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() > ext.size() &&
      csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".json";
  return csv_path + ".json";
}

// ---------------------------------------------------------------------------
// Plotting contract: what a figure script may rely on.

/// Columns each figure reads. fig2 takes a propagate trace, the others a sweep table.
inline std::vector<std::string> figure_columns(const std::string& figure) {
  if (figure == "fig2") return {"zeta", "I31_rel", "I32_rel", "Phi_wrapped", "Phi_unwrapped"};
  if (figure == "fig3" || figure == "fig4" || figure == "fig5")
    return {"value", "I32_rel", "I31_rel", "status"};
  throw ConfigError("unknown figure '" + figure + "' (expected fig2, fig3, fig4 or fig5)");
}

/// Throws naming the first required column absent from a CSV header line.
inline void check_figure_header(const std::string& figure, std::string_view header) {
  std::vector<std::string> have;
  for (std::size_t p = 0;;) {
    const std::size_t q = header.find(',', p);
    have.emplace_back(detail::trim(header.substr(p, q == std::string_view::npos ? q : q - p)));
    if (q == std::string_view::npos) break;
    p = q + 1;
  }
  for (const std::string& col : figure_columns(figure))
    if (std::find(have.begin(), have.end(), col) == have.end())
      throw ConfigError(figure + ": missing column '" + col + "'");
}

/// Sidecar fields a figure script reads for axis labels and captions.
inline void check_figure_sidecar(const std::string& figure, const nlohmann::json& j) {
  const std::string want = figure == "fig2" ? "propagate" : "sweep";
  figure_columns(figure);
  if (!j.contains("command") || j["command"] != want)
    throw ConfigError(figure + ": sidecar must record a '" + want + "' run");
  for (const char* key : {"config", "derived"})
    if (!j.contains(key)) throw ConfigError(figure + ": sidecar lacks '" + key + "'");
  if (want == "sweep" && !(j.contains("sweep") && j["sweep"].contains("parameter")))
    throw ConfigError(figure + ": sidecar lacks 'sweep.parameter'");
}

}  // namespace mwconv
