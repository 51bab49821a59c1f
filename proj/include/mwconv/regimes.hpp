#pragma once
// Closed-form predictors for the weak-microwave (CPT) and strong-microwave
// (Autler-Townes) transparency regimes, plus the validity conditions.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mwconv/core.hpp"

namespace mwconv {

enum class Regime { weak_cpt, strong_at };

inline const char* to_string(Regime r) {
  return r == Regime::weak_cpt ? "weak" : "strong";
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "weak" || s == "weak-CPT" || s == "cpt") return Regime::weak_cpt;
  if (s == "strong" || s == "strong-AT" || s == "at") return Regime::strong_at;
  throw DomainError("unknown regime '" + s + "' (expected weak or strong)");
}

/// Eq. (12) runs out: the predicted g0^4 would turn negative.
class DissipationExhausted : public RegimeError {
 public:
  using RegimeError::RegimeError;
};

struct FieldProfile {
  double g1sq;
  double g2sq;
  double g0sq;
};

struct RegimePrediction {
  Regime regime;
  double zeta_period;
  double zeta_max;
  double loss_at_max;
  /// zeta_diss / zeta_period; the oscillation is only meaningful when >> 1.
  double validity_margin;
  bool separation_ok;       // validity_margin >= kMinSeparation
  bool two_photon_ok;       // delta32 == delta31
  bool cpt_condition_ok;    // weak regime only; true for strong
};

inline constexpr double kMinSeparation = 10.0;

namespace detail {

inline void check_inputs(double g0sq_in, double gm) {
  if (!(g0sq_in > 0.0) || !std::isfinite(g0sq_in))
    throw DomainError("g0sq must be positive");
  if (!(gm > 0.0) || !std::isfinite(gm))
    throw DomainError("gm must be positive");
}

inline void weak_guard(double g0sq_in, double gm) {
  check_inputs(g0sq_in, gm);
  if (!(gm < 0.2 * std::sqrt(g0sq_in))) {
    throw RegimeError("weak-field predictor needs gm < 0.2 g0 (gm = " +
                      std::to_string(gm) + ", g0 = " +
                      std::to_string(std::sqrt(g0sq_in)) + ")");
  }
}

inline void strong_guard(double g0sq_in, double gm) {
  check_inputs(g0sq_in, gm);
  const double g0 = std::sqrt(g0sq_in);
  if (!(gm > 5.0 * std::max(1.0, g0))) {
    throw RegimeError("strong-field predictor needs gm > 5 max(1, g0) (gm = " +
                      std::to_string(gm) + ", g0 = " + std::to_string(g0) + ")");
  }
}

}  // namespace detail

/// Total optical power g0^2 along zeta from g0^4 = g0^4(0) - 8 gm^2 zeta.
inline double weak_total_power(double g0sq_in, double gm, double zeta) {
  detail::check_inputs(g0sq_in, gm);
  const double g0q = g0sq_in * g0sq_in - 8.0 * gm * gm * zeta;
  if (g0q < 0.0) {
    throw DissipationExhausted(
        "weak-field dissipation exhausts the optical power before zeta = " +
        std::to_string(zeta) + " (limit " +
        std::to_string(g0sq_in * g0sq_in / (8.0 * gm * gm)) + ")");
  }
  return std::sqrt(g0q);
}

/// Weak regime: g1^2 = g0^2 cos^2(gm zeta / g0^2), g2^2 = g0^2 sin^2(...)
/// with g0^2 the input power; g0sq carries the dissipated total separately.
inline FieldProfile weak_field_profile(double g0sq_in, double gm, double zeta) {
  detail::weak_guard(g0sq_in, gm);
  if (!(zeta >= 0.0)) throw DomainError("zeta must be non-negative");
  const double g0sq = weak_total_power(g0sq_in, gm, zeta);
  const double theta = gm * zeta / g0sq_in;
  const double c = std::cos(theta), s = std::sin(theta);
  return {g0sq_in * c * c, g0sq_in * s * s, g0sq};
}

/// Weak regime with the exchange angle and amplitude both following the
/// dissipated power: d theta/dzeta = gm/g0^2(zeta).
inline FieldProfile weak_field_profile_dissipative(double g0sq_in, double gm,
                                                   double zeta) {
  detail::weak_guard(g0sq_in, gm);
  if (!(zeta >= 0.0)) throw DomainError("zeta must be non-negative");
  const double g0sq = weak_total_power(g0sq_in, gm, zeta);
  const double theta = (g0sq_in - g0sq) / (4.0 * gm);
  const double c = std::cos(theta), s = std::sin(theta);
  return {g0sq * c * c, g0sq * s * s, g0sq};
}

/// Strong regime: g1^2 = g0^2 cos^2(zeta / 2gm) with g0^2 = g0^2(0) e^{-zeta/gm^2}.
inline FieldProfile strong_field_profile(double g0sq_in, double gm,
                                         double zeta) {
  detail::strong_guard(g0sq_in, gm);
  if (!(zeta >= 0.0)) throw DomainError("zeta must be non-negative");
  const double g0sq = g0sq_in * std::exp(-zeta / (gm * gm));
  const double theta = zeta / (2.0 * gm);
  const double c = std::cos(theta), s = std::sin(theta);
  return {g0sq * c * c, g0sq * s * s, g0sq};
}

inline double optimal_length(Regime regime, double g0sq_in, double gm) {
  if (regime == Regime::weak_cpt) {
    detail::weak_guard(g0sq_in, gm);
    return std::numbers::pi * g0sq_in / (2.0 * gm);
  }
  detail::strong_guard(g0sq_in, gm);
  return std::numbers::pi * gm;
}

/// Ratio of the optical pumping rate into the dark state to Gamma. Inside a
/// Doppler contour wider than gamma the resonant class sets the condition,
/// g0^2 / [Gamma (k31 vp/gamma)^2]; otherwise g0^2 / [Gamma (1 + delta^2)].
inline double cpt_condition_margin(const AtomMedium& medium, double g0sq,
                                   double delta) {
  medium.validate();
  if (!(g0sq >= 0.0)) throw DomainError("g0sq must be non-negative");
  if (medium.Gamma == 0.0) return std::numeric_limits<double>::infinity();
  const double D = medium.doppler_width();
  if (D > 1.0) return g0sq / (medium.Gamma * D * D);
  return g0sq / (medium.Gamma * (1.0 + delta * delta));
}

/// Width of the two-photon window in microwave detuning, g0^2 / (k31 vp/gamma)^2.
inline double black_line_width(const AtomMedium& medium, double g0sq) {
  medium.validate();
  if (!(g0sq > 0.0)) throw DomainError("g0sq must be positive");
  const double D = medium.doppler_width();
  if (D < 1.0) {
    throw RegimeError("black-line width needs a Doppler-broadened medium "
                      "(k31 vp / gamma31 = " + std::to_string(D) + " < 1)");
  }
  return g0sq / (D * D);
}

struct Absorption {
  double im_sigma31;
  double im_sigma32;
};

/// Second-order expansions of the absorption: in gm for the weak regime, in
/// 1/gm for the strong one. Resonant ideal medium.
inline Absorption perturbative_absorption(Regime regime,
                                          const DriveFields& f) {
  f.validate();
  const double g1 = f.g1(), g2 = f.g2(), gm = f.gm;
  const double g1s = g1 * g1, g2s = g2 * g2, g0s = g1s + g2s;
  if (!(g0s > 0.0)) throw DomainError("absorption expansion needs g0 > 0");
  const double s = std::sin(f.loop_phase());
  const double s2 = s * s;
  const double b31 = g1 * (g1s - g2s + 2.0 * g2s * s2);
  const double b32 = g2 * (g1s - g2s - 2.0 * g1s * s2);
  if (regime == Regime::weak_cpt) {
    const double g06 = g0s * g0s * g0s;
    return {-g2 * gm / g0s * s + 2.0 * gm * gm * b31 / g06,
            g1 * gm / g0s * s - 2.0 * gm * gm * b32 / g06};
  }
  if (!(gm > 0.0)) throw DomainError("strong-field expansion needs gm > 0");
  const double q = 2.0 * gm * gm * g0s;
  return {g2 / (2.0 * gm) * s + b31 / q, -g1 / (2.0 * gm) * s - b32 / q};
}

/// Fraction of optical power lost when the conversion peaks.
inline double loss_at_max(Regime regime, double g0sq_in, double gm) {
  if (regime == Regime::weak_cpt) {
    const double zmax = optimal_length(regime, g0sq_in, gm);
    return 1.0 - weak_total_power(g0sq_in, gm, zmax) / g0sq_in;
  }
  detail::strong_guard(g0sq_in, gm);
  return 1.0 - std::exp(-std::numbers::pi / gm);
}

/// Full prediction. A nonzero microwave detuning breaks the two-photon
/// condition, which only sets a flag: the closed forms assume resonance.
inline RegimePrediction predict(Regime regime, double g0sq_in, double gm,
                                double delta_m = 0.0,
                                const AtomMedium* medium = nullptr) {
  RegimePrediction p;
  p.regime = regime;
  p.zeta_max = optimal_length(regime, g0sq_in, gm);
  p.zeta_period = 2.0 * p.zeta_max;
  p.loss_at_max = loss_at_max(regime, g0sq_in, gm);
  if (regime == Regime::weak_cpt) {
    // Characteristic dissipation length g0^2(0)/(4 gm^2).
    p.validity_margin = (g0sq_in / (4.0 * gm * gm)) / p.zeta_period;
  } else {
    p.validity_margin = (gm * gm) / p.zeta_period;
  }
  p.separation_ok = p.validity_margin >= kMinSeparation;
  p.two_photon_ok = delta_m == 0.0;
  p.cpt_condition_ok = true;
  if (regime == Regime::weak_cpt && medium != nullptr)
    p.cpt_condition_ok = cpt_condition_margin(*medium, g0sq_in, 0.0) > 1.0;
  return p;
}

}  // namespace mwconv
