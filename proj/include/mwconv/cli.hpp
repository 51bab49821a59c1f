#pragma once
// Command-line front end: mwconv {steady|propagate|sweep|predict}.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mwconv/io.hpp"
#include "mwconv/regimes.hpp"

namespace mwconv {

namespace detail {

struct ConfigOptions {
  std::string preset;
  std::string config_path;
  std::vector<std::string> sets;
};

inline void add_config_options(CLI::App* cmd, ConfigOptions& o) {
  cmd->add_option("--preset", o.preset, "Named parameter set (fig2..fig5, ideal-weak, ideal-strong)");
  cmd->add_option("--config", o.config_path, "key=value configuration file");
  cmd->add_option("--set", o.sets, "Override one key, e.g. --set gm=0.04")
      ->allow_extra_args(false);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Precedence: --preset, then the config file, then --set.
inline RunConfig load_config(const ConfigOptions& o) {
  std::vector<KeyValue> items;
  if (!o.preset.empty()) items.push_back({"preset", o.preset, "--preset"});
  if (!o.config_path.empty()) {
    for (auto& kv : parse_assignments(read_file(o.config_path))) {
      kv.origin = o.config_path + " " + kv.origin;
      if (kv.key == "preset" && !o.preset.empty())
        throw ConfigError(kv.origin + ": preset given both here and by --preset");
      items.push_back(std::move(kv));
    }
  }
  // --set keys override earlier ones instead of clashing with them.
  std::vector<KeyValue> sets;
  for (const auto& s : o.sets) sets.push_back(split_assignment(s, "--set"));
  for (const auto& kv : sets) {
    if (kv.key == "preset") throw ConfigError("--set: use --preset to pick a preset");
    std::erase_if(items, [&](const KeyValue& x) { return x.key == kv.key; });
  }
  items.insert(items.end(), sets.begin(), sets.end());
  return build_config(items);
}

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fmt17(double v) { return format_number(v); }

inline void print_state(std::ostream& out, const SteadyState& s,
                        const std::string& prefix = "") {
  out << prefix << "rho11=" << fmt17(s.rho11) << '\n'
      << prefix << "rho22=" << fmt17(s.rho22) << '\n'
      << prefix << "rho33=" << fmt17(s.rho33) << '\n';
  auto c = [&](const char* name, cplx z) {
    out << prefix << "re_" << name << '=' << fmt17(z.real()) << '\n'
        << prefix << "im_" << name << '=' << fmt17(z.imag()) << '\n';
  };
  c("sigma21", s.sigma21);
  c("sigma31", s.sigma31);
  c("sigma32", s.sigma32);
}

inline void write_outputs(const std::string& out_path, const std::string& command,
                          const RunConfig& config, nlohmann::json sidecar_extra,
                          const std::function<void(std::ostream&)>& write_csv,
                          std::ostream& out, std::ostream& err) {
  if (out_path.empty() || out_path == "-") {
    write_csv(out);
    return;
  }
  {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + out_path + "'");
    write_csv(f);
  }
  nlohmann::json side = make_sidecar(command, config);
  for (auto& [k, v] : sidecar_extra.items()) side[k] = v;
  const std::string side_path = sidecar_path(out_path);
  std::ofstream f(side_path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + side_path + "'");
  f << side.dump(2) << '\n';
  err << "wrote " << out_path << " and " << side_path << '\n';
}

}  // namespace detail

inline int run_command(int argc, const char* const* argv, std::ostream& out,
                       std::ostream& err) {
  CLI::App app{"Microwave-driven optical frequency conversion in a closed-loop "
               "Lambda medium"};
  app.set_version_flag("--version", MWCONV_VERSION);
  app.require_subcommand(1);

  detail::ConfigOptions steady_opts, prop_opts, sweep_opts, pred_opts;
  std::string prop_out, sweep_out, prop_sidecar, sweep_sidecar;
  bool per_class = false;
  std::string observable = "endpoint";
  unsigned threads = 0;
  std::string regime_name;
  double g0sq = 0.0, gm = 0.0, delta_m = 0.0;

  auto* steady = app.add_subcommand("steady", "Velocity-averaged steady state at the input fields");
  detail::add_config_options(steady, steady_opts);
  steady->add_flag("--per-class", per_class, "Also print every velocity class");

  auto* prop = app.add_subcommand("propagate", "Integrate the field equations along zeta");
  detail::add_config_options(prop, prop_opts);
  prop->add_option("--out", prop_out, "Trace CSV path (sidecar written next to it); stdout if omitted");
  prop->add_option("--from-sidecar", prop_sidecar, "Repeat the run recorded in a sidecar");

  auto* sweep = app.add_subcommand("sweep", "One propagation per value of a swept parameter");
  detail::add_config_options(sweep, sweep_opts);
  sweep->add_option("--out", sweep_out, "Table CSV path (sidecar written next to it); stdout if omitted");
  sweep->add_option("--from-sidecar", sweep_sidecar, "Repeat the run recorded in a sidecar");
  sweep->add_option("--observable", observable, "endpoint or trace")
      ->check(CLI::IsMember({"endpoint", "trace"}));
  sweep->add_option("--threads", threads, "Worker threads (0: MWCONV_THREADS or all cores)");

  auto* pred = app.add_subcommand("predict", "Closed-form regime predictions");
  detail::add_config_options(pred, pred_opts);
  pred->add_option("--regime", regime_name, "weak or strong")->required();
  pred->add_option("--g0sq", g0sq, "Input optical power g0^2 (default from config)");
  pred->add_option("--gm", gm, "Microwave Rabi frequency (default from config)");
  pred->add_option("--delta-m", delta_m, "Microwave detuning (two-photon flag)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*steady) {
      const RunConfig cfg = detail::load_config(steady_opts);
      const Scenario s = to_scenario(cfg);
      const VelocityQuadrature q = build_quadrature(s.quadrature, s.medium, s.fields);
      out << "# velocity-averaged, " << q.size() << " classes\n";
      detail::print_state(out, averaged_steady_state(s.medium, s.fields, q,
                                                     s.equal_wavevectors));
      if (per_class) {
        for (std::size_t i = 0; i < q.size(); ++i) {
          BlochContext ctx{s.medium, s.fields, q.nodes[i], s.equal_wavevectors};
          out << "# class " << i << " vz=" << detail::fmt17(q.nodes[i])
              << " weight=" << detail::fmt17(q.weights[i]) << '\n';
          detail::print_state(out, solve_steady(ctx), "  ");
        }
      }
      return 0;
    }

    if (*prop) {
      RunConfig cfg;
      if (!prop_sidecar.empty()) {
        const SidecarRun run = read_sidecar(nlohmann::json::parse(detail::read_file(prop_sidecar)));
        if (run.command != "propagate")
          throw ConfigError("sidecar records a '" + run.command + "' run");
        cfg = run.config;
      } else {
        cfg = detail::load_config(prop_opts);
      }
      const PropagationTrace trace = to_scenario(cfg).run();
      detail::write_outputs(prop_out, "propagate", cfg, nlohmann::json::object(),
                            [&](std::ostream& os) { write_trace_csv(os, trace); },
                            out, err);
      if (const auto pk = first_I32_maximum(trace))
        err << "first I32 maximum " << detail::fmt6(pk->value) << " at zeta "
            << detail::fmt6(pk->zeta) << '\n';
      return 0;
    }

    if (*sweep) {
      RunConfig cfg;
      if (!sweep_sidecar.empty()) {
        const auto j = nlohmann::json::parse(detail::read_file(sweep_sidecar));
        const SidecarRun run = read_sidecar(j);
        if (run.command != "sweep")
          throw ConfigError("sidecar records a '" + run.command + "' run");
        cfg = run.config;
        if (j.contains("sweep") && j["sweep"].contains("observable"))
          observable = j["sweep"]["observable"].get<std::string>();
      } else {
        cfg = detail::load_config(sweep_opts);
      }
      SweepSpec spec = to_sweep_spec(cfg);
      spec.observable = observable == "trace" ? SweepObservable::trace
                                              : SweepObservable::endpoint;
      const SweepTable table = run_sweep(spec, threads);
      std::size_t failed = 0;
      for (const auto& r : table.rows) failed += !r.ok;
      nlohmann::json extra;
      extra["sweep"] = {{"parameter", to_string(spec.parameter)},
                        {"values", spec.values},
                        {"observable", observable}};
      detail::write_outputs(
          sweep_out, "sweep", cfg, extra,
          [&](std::ostream& os) {
            if (spec.observable == SweepObservable::trace)
              write_sweep_traces_csv(os, table);
            else
              write_sweep_csv(os, table);
          },
          out, err);
      err << table.rows.size() << " points, " << failed << " failed\n";
      return 0;
    }

    if (*pred) {
      const RunConfig cfg = detail::load_config(pred_opts);
      const Regime regime = regime_from_string(regime_name);
      const AtomMedium medium = to_medium(cfg);
      if (pred->count("--g0sq") == 0) g0sq = cfg.g31_in * cfg.g31_in + cfg.g32_in * cfg.g32_in;
      if (pred->count("--gm") == 0) gm = cfg.gm;
      if (pred->count("--delta-m") == 0) delta_m = cfg.delta_m;
      const bool with_medium = !pred_opts.preset.empty() || !pred_opts.config_path.empty();
      const RegimePrediction p =
          predict(regime, g0sq, gm, delta_m, with_medium ? &medium : nullptr);
      out << "regime=" << to_string(p.regime) << '\n'
          << "zeta_period=" << detail::fmt6(p.zeta_period) << '\n'
          << "zeta_max=" << detail::fmt6(p.zeta_max) << '\n'
          << "loss_at_max=" << detail::fmt6(p.loss_at_max) << '\n'
          << "validity_margin=" << detail::fmt6(p.validity_margin) << '\n'
          << "separation_ok=" << (p.separation_ok ? "true" : "false") << '\n'
          << "two_photon_ok=" << (p.two_photon_ok ? "true" : "false") << '\n';
      if (with_medium) {
        out << "cpt_condition_margin="
            << detail::fmt6(cpt_condition_margin(medium, g0sq, cfg.delta31)) << '\n'
            << "cpt_condition_ok=" << (p.cpt_condition_ok ? "true" : "false") << '\n'
            << "length_at_max_m="
            << detail::fmt6(zeta_to_length(p.zeta_max, medium.N, medium.omega31)) << '\n';
        if (medium.doppler_width() >= 1.0)
          out << "black_line_width=" << detail::fmt6(black_line_width(medium, g0sq)) << '\n';
      }
      if (!p.separation_ok)
        err << "warning: oscillation period is not well separated from the "
               "dissipation length\n";
      if (!p.two_photon_ok)
        err << "warning: microwave detuning breaks two-photon resonance; the "
               "closed forms assume it\n";
      return 0;
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed sidecar: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace mwconv
