#pragma once
// One-dimensional parameter sweeps over full propagation runs.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mwconv/propagate.hpp"

namespace mwconv {

/// A complete, self-contained propagation problem. The velocity quadrature is
/// kept as a recipe because the resonance rule depends on the pump detuning.
struct Scenario {
  AtomMedium medium;
  DriveFields fields;
  QuadratureRule quadrature;
  double zeta_end = 340.0;
  int samples = 2;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  bool equal_wavevectors = false;

  PropagationConfig propagation_config() const {
    PropagationConfig cfg;
    cfg.zeta_end = zeta_end;
    cfg.sample_count = samples;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.quad = build_quadrature(quadrature, medium, fields);
    cfg.initial = fields;
    cfg.equal_wavevectors = equal_wavevectors;
    return cfg;
  }

  PropagationTrace run() const {
    return integrate_propagation(propagation_config(), medium);
  }
};

enum class SweepParameter { mw_detuning, optical_detuning, mw_rabi };

inline const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::mw_detuning: return "mw_detuning";
    case SweepParameter::optical_detuning: return "optical_detuning";
    case SweepParameter::mw_rabi: return "mw_rabi";
  }
  return "?";
}

inline SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "mw_detuning") return SweepParameter::mw_detuning;
  if (s == "optical_detuning") return SweepParameter::optical_detuning;
  if (s == "mw_rabi") return SweepParameter::mw_rabi;
  throw DomainError("unknown sweep parameter '" + s +
                    "' (expected mw_detuning, optical_detuning or mw_rabi)");
}

enum class SweepObservable { endpoint, trace };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::mw_rabi;
  std::vector<double> values;
  Scenario base;
  SweepObservable observable = SweepObservable::endpoint;

  void validate() const {
    if (values.empty()) throw DomainError("sweep needs at least one value");
    for (double v : values)
      if (!std::isfinite(v)) throw DomainError("sweep values must be finite");
    if (values.size() > 1) {
      const bool up = values[1] > values[0];
      for (std::size_t i = 1; i < values.size(); ++i) {
        const bool ok = up ? values[i] > values[i - 1] : values[i] < values[i - 1];
        if (!ok) throw DomainError("sweep values must be strictly monotone");
      }
    }
    if (parameter == SweepParameter::mw_rabi) {
      for (double v : values)
        if (v < 0.0) throw DomainError("mw_rabi sweep values must be >= 0");
    }
  }

  Scenario at(double value) const {
    Scenario s = base;
    switch (parameter) {
      case SweepParameter::mw_detuning: s.fields.delta_m = value; break;
      case SweepParameter::optical_detuning: s.fields.delta31 = value; break;
      case SweepParameter::mw_rabi: s.fields.gm = value; break;
    }
    return s;
  }
};

struct SweepRow {
  double value = 0.0;
  double I32_rel = 0.0;
  double I31_rel = 0.0;
  double g0sq = 0.0;
  double rho33_avg = 0.0;
  double Phi_wrapped = 0.0;
  double motion_const = 0.0;
  double I32_peak = 0.0;  // largest sampled I32_rel on [0, zeta_end]
  bool ok = false;
  std::string status;     // "ok" or the failure message
  std::optional<PropagationTrace> trace;
};

struct SweepTable {
  SweepSpec spec;
  std::vector<SweepRow> rows;
};

/// Worker count: MWCONV_THREADS if set to a positive integer, else the
/// hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("MWCONV_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

inline SweepRow evaluate_point(const SweepSpec& spec, double value) {
  SweepRow row;
  row.value = value;
  try {
    const PropagationTrace tr = spec.at(value).run();
    const TraceSample& end = tr.samples.back();
    row.I32_rel = end.I32_rel;
    row.I31_rel = end.I31_rel;
    row.g0sq = end.g0sq;
    row.rho33_avg = end.rho33_avg;
    row.Phi_wrapped = end.Phi_wrapped;
    row.motion_const = end.motion_const;
    for (const TraceSample& s : tr.samples)
      row.I32_peak = std::max(row.I32_peak, s.I32_rel);
    row.ok = true;
    row.status = "ok";
    if (spec.observable == SweepObservable::trace) row.trace = tr;
  } catch (const Error& e) {
    row.ok = false;
    row.status = e.what();
  }
  return row;
}

/// One propagation per value. Rows are written into fixed slots, so the table
/// is identical for any thread count or scheduling.
inline SweepTable run_sweep(const SweepSpec& spec, unsigned threads = 0) {
  spec.validate();
  spec.base.medium.validate();
  if (threads == 0) threads = default_thread_count();
  SweepTable table{spec, std::vector<SweepRow>(spec.values.size())};
  const std::size_t n = spec.values.size();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++)
      table.rows[i] = evaluate_point(spec, spec.values[i]);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Grids

/// n points from a to b inclusive.
inline std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw DomainError("grid needs at least one point");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  if (n > 1) v.back() = b;
  return v;
}

/// n log-spaced points from a to b inclusive (a, b > 0).
inline std::vector<double> geomspace(double a, double b, int n) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("log grid bounds must be positive");
  std::vector<double> v = linspace(std::log10(a), std::log10(b), n);
  for (double& x : v) x = std::pow(10.0, x);
  v.front() = a;
  if (n > 1) v.back() = b;
  return v;
}

/// 0 together with +-geomspace(a, b, n): 2n + 1 points, ascending.
inline std::vector<double> symmetric_geomspace(double a, double b, int n) {
  const std::vector<double> pos = geomspace(a, b, n);
  std::vector<double> v;
  v.reserve(2 * pos.size() + 1);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) v.push_back(-*it);
  v.push_back(0.0);
  v.insert(v.end(), pos.begin(), pos.end());
  return v;
}

/// Merges grids into one ascending list; coincident values are an error.
inline std::vector<double> merge_grids(std::vector<std::vector<double>> parts) {
  std::vector<double> v;
  for (auto& p : parts) v.insert(v.end(), p.begin(), p.end());
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end())
    throw DomainError("merged sweep grid contains duplicate values");
  return v;
}

}  // namespace mwconv
