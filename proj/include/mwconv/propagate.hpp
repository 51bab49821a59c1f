#pragma once
// Steady-state Maxwell propagation of the two optical fields along zeta.
//
// With a_n = g_n e^{i phi_n} the pair dg_n/dzeta = -Im sigma~_3n,
// g_n dphi_n/dzeta = -Re sigma~_3n collapses to da_n/dzeta = -i rho~_n3
// (raw frame), which stays regular where g_n passes through zero.

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "mwconv/doppler.hpp"

namespace mwconv {

struct PropagationConfig {
  double zeta_end = 1.0;
  int sample_count = 2;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  VelocityQuadrature quad = single_class();
  DriveFields initial;  // microwave amplitude/phase held fixed along zeta
  bool equal_wavevectors = false;

  void validate() const {
    if (!(zeta_end > 0.0) || !std::isfinite(zeta_end))
      throw DomainError("zeta_end must be positive");
    if (sample_count < 2)
      throw DomainError("sample_count must be at least 2 (both endpoints)");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
      throw DomainError("rel_tol must lie in (0, 1e-2]");
    if (!(abs_tol > 0.0 && abs_tol <= 1e-2))
      throw DomainError("abs_tol must lie in (0, 1e-2]");
    if (quad.nodes.empty() || quad.nodes.size() != quad.weights.size())
      throw DomainError("invalid velocity quadrature");
    initial.validate();
    if (!(initial.g0sq() > 0.0))
      throw DomainError("input optical intensity must be positive");
  }
};

struct FieldDerivative {
  cplx da1;
  cplx da2;
};

/// Medium response as a function of the local optical amplitudes.
struct PropagationModel {
  AtomMedium medium;
  DriveFields drive;  // gm, chi_m and detunings; amplitudes are overwritten
  VelocityQuadrature quad;
  bool equal_wavevectors = false;

  AveragedPolarization polarization(cplx a1, cplx a2) const {
    DriveFields f = drive;
    f.a1 = a1;
    f.a2 = a2;
    return averaged_polarization(medium, f, quad, equal_wavevectors);
  }
};

inline FieldDerivative propagation_rhs(double /*zeta*/, cplx a1, cplx a2,
                                       const PropagationModel& model) {
  const AveragedPolarization p = model.polarization(a1, a2);
  const cplx minus_i(0.0, -1.0);
  return {minus_i * p.rho13, minus_i * p.rho23};
}

/// g1 g2 cos(Phi), conserved on resonant lossless runs.
inline double motion_constant(cplx a1, cplx a2, double chi_m) {
  return (a1 * std::conj(a2) * std::polar(1.0, -chi_m)).real();
}

namespace detail {

using OdeState = std::array<double, 4>;

struct FieldSystem {
  const PropagationModel* model;
  double* last_good;

  void operator()(const OdeState& y, OdeState& dydz, double zeta) const {
    for (double v : y) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite field amplitude at zeta = " << zeta;
        throw IntegrationError(os.str(), *last_good);
      }
    }
    const FieldDerivative d =
        propagation_rhs(zeta, {y[0], y[1]}, {y[2], y[3]}, *model);
    dydz = {d.da1.real(), d.da1.imag(), d.da2.real(), d.da2.imag()};
    for (double v : dydz) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite field derivative at zeta = " << zeta;
        throw IntegrationError(os.str(), *last_good);
      }
    }
    if (zeta > *last_good) *last_good = zeta;
  }
};

}  // namespace detail

inline PropagationModel make_model(const PropagationConfig& cfg,
                                   const AtomMedium& medium) {
  return {medium, cfg.initial, cfg.quad, cfg.equal_wavevectors};
}

/// Integrates the field equations from 0 to zeta_end, sampling at
/// sample_count equally spaced points including both ends.
inline PropagationTrace integrate_propagation(const PropagationConfig& cfg,
                                              const AtomMedium& medium) {
  namespace odeint = boost::numeric::odeint;
  cfg.validate();
  medium.validate();
  const PropagationModel model = make_model(cfg, medium);
  const double I0 = std::norm(cfg.initial.a1) > 0.0 ? std::norm(cfg.initial.a1)
                                                    : cfg.initial.g0sq();

  std::vector<double> zetas(cfg.sample_count);
  for (int i = 0; i < cfg.sample_count; ++i)
    zetas[i] = cfg.zeta_end * i / (cfg.sample_count - 1);
  zetas.back() = cfg.zeta_end;

  PropagationTrace trace;
  trace.samples.reserve(zetas.size());
  auto observer = [&](const detail::OdeState& y, double zeta) {
    TraceSample s;
    s.zeta = zeta;
    s.a1 = {y[0], y[1]};
    s.a2 = {y[2], y[3]};
    const AveragedPolarization p = model.polarization(s.a1, s.a2);
    const double phi1 = sigma_frame_phase(s.a1, p.rho13);
    const double phi2 = sigma_frame_phase(s.a2, p.rho23);
    s.I31_rel = std::norm(s.a1) / I0;
    s.I32_rel = std::norm(s.a2) / I0;
    s.Phi_wrapped = wrap_phase(phi1 - phi2 - cfg.initial.chi_m);
    if (trace.samples.empty()) {
      s.Phi_unwrapped = s.Phi_wrapped;
    } else {
      const TraceSample& prev = trace.samples.back();
      s.Phi_unwrapped =
          prev.Phi_unwrapped + wrap_phase(s.Phi_wrapped - prev.Phi_wrapped);
    }
    s.g0sq = std::norm(s.a1) + std::norm(s.a2);
    s.rho33_avg = p.rho33;
    s.motion_const = motion_constant(s.a1, s.a2, cfg.initial.chi_m);
    trace.samples.push_back(s);
  };

  double last_good = 0.0;
  detail::FieldSystem system{&model, &last_good};
  detail::OdeState y{cfg.initial.a1.real(), cfg.initial.a1.imag(),
                     cfg.initial.a2.real(), cfg.initial.a2.imag()};
  auto stepper = odeint::make_dense_output(
      cfg.abs_tol, cfg.rel_tol, odeint::runge_kutta_dopri5<detail::OdeState>());
  const double dt0 = std::min(1e-2, cfg.zeta_end / 100.0);
  try {
    odeint::integrate_times(stepper, system, y, zetas.begin(), zetas.end(),
                            dt0, observer, odeint::max_step_checker(1000000));
  } catch (const odeint::odeint_error& e) {
    std::ostringstream os;
    os << "integration failed after zeta = " << last_good << ": " << e.what();
    throw IntegrationError(os.str(), last_good);
  }
  return trace;
}

struct Peak {
  double zeta;
  double value;
  std::size_t index;
};

/// First interior local maximum of a trace column, refined by a parabola
/// through the neighbouring samples.
template <typename Getter>
std::optional<Peak> first_maximum(const PropagationTrace& trace, Getter get) {
  const auto& s = trace.samples;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double y0 = get(s[i - 1]), y1 = get(s[i]), y2 = get(s[i + 1]);
    if (y1 > y0 && y1 >= y2) {
      const double h = s[i + 1].zeta - s[i].zeta;
      const double denom = y0 - 2.0 * y1 + y2;
      double offset = 0.0, value = y1;
      if (denom < 0.0) {
        offset = 0.5 * (y0 - y2) / denom;
        value = y1 - 0.25 * (y0 - y2) * offset;
      }
      return Peak{s[i].zeta + offset * h, value, i};
    }
  }
  return std::nullopt;
}

inline std::optional<Peak> first_I32_maximum(const PropagationTrace& trace) {
  return first_maximum(trace, [](const TraceSample& s) { return s.I32_rel; });
}

}  // namespace mwconv
