#pragma once
// Domain types shared across the simulator and conversions between laboratory
// units and the dimensionless variables used everywhere else. All rates and
// detunings inside the library are in units of gamma31.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "mwconv/error.hpp"

namespace mwconv {

using cplx = std::complex<double>;

namespace constants {
inline constexpr double c = 299792458.0;            // m/s
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double k_boltzmann = 1.380649e-23; // J/K
inline constexpr double amu = 1.66053906660e-27;    // kg
}  // namespace constants

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(phi, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

/// Static atomic and medium parameters.
struct AtomMedium {
  double gamma31 = 1.0;   // s^-1, normalization unit
  double gamma32 = 1.0;   // units of gamma31
  double Gamma = 0.0;     // ground-coherence dephasing, units of gamma31
  double omega31 = 1.0;   // rad/s
  double omega21 = 0.0;   // rad/s
  double k31 = 1.0;       // rad/m
  double k32 = 1.0;       // rad/m
  double N = 1.0;         // m^-3
  double vp = 0.0;        // m/s
  double intensity_scale = 1.0;  // calibration for rabi_to_intensity

  /// Builds a medium from a vacuum wavelength, deriving omega31, k31 and k32.
  static AtomMedium from_wavelength(double gamma31, double gamma32_rel,
                                    double Gamma_rel, double lambda31,
                                    double omega21, double density,
                                    double vp) {
    if (!(lambda31 > 0.0)) throw DomainError("lambda31 must be positive");
    AtomMedium m;
    m.gamma31 = gamma31;
    m.gamma32 = gamma32_rel;
    m.Gamma = Gamma_rel;
    m.omega31 = 2.0 * std::numbers::pi * constants::c / lambda31;
    m.omega21 = omega21;
    m.k31 = m.omega31 / constants::c;
    m.k32 = (m.omega31 - omega21) / constants::c;
    m.N = density;
    m.vp = vp;
    m.validate();
    return m;
  }

  /// Doppler width k31*vp in units of gamma31.
  double doppler_width() const { return k31 * vp / gamma31; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(name) + " must be positive and finite");
    };
    positive(gamma31, "gamma31");
    positive(gamma32, "gamma32");
    positive(omega31, "omega31");
    positive(k31, "k31");
    positive(k32, "k32");
    positive(N, "N");
    positive(intensity_scale, "intensity_scale");
    if (!(Gamma >= 0.0) || !std::isfinite(Gamma))
      throw DomainError("Gamma must be non-negative");
    if (!(vp >= 0.0) || !std::isfinite(vp))
      throw DomainError("vp must be non-negative");
    if (!(omega21 >= 0.0) || !std::isfinite(omega21))
      throw DomainError("omega21 must be non-negative");
    if (omega21 > 0.0 && k32 > k31)
      throw DomainError("k32 must not exceed k31 when omega21 > 0");
  }
};

/// Drive parameters at one point of the medium. Optical amplitudes are
/// complex Rabi frequencies a_n = g_n exp(i phi_n).
struct DriveFields {
  cplx a1{0.0, 0.0};
  cplx a2{0.0, 0.0};
  double gm = 0.0;       // microwave Rabi frequency
  double chi_m = 0.0;    // microwave transition phase chi_12
  double delta31 = 0.0;  // pump detuning
  double delta_m = 0.0;  // microwave detuning omega_m - omega_21

  /// Real amplitudes with loop phase Phi carried by the microwave phase.
  static DriveFields resonant(double g1, double g2, double gm, double Phi) {
    DriveFields f;
    f.a1 = g1;
    f.a2 = g2;
    f.gm = gm;
    f.chi_m = -Phi;
    return f;
  }

  double g1() const { return std::abs(a1); }
  double g2() const { return std::abs(a2); }
  double g0sq() const { return std::norm(a1) + std::norm(a2); }
  /// Frequency matching omega32 = omega31 - omega_m.
  double delta32() const { return delta31 - delta_m; }
  /// Phi = (chi31 - chi32) - chi12, in (-pi, pi]. A zero amplitude has phase 0.
  double loop_phase() const {
    return wrap_phase(std::arg(a1) - std::arg(a2) - chi_m);
  }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(a1.real()) || !finite(a1.imag()) || !finite(a2.real()) ||
        !finite(a2.imag()))
      throw DomainError("optical amplitudes must be finite");
    if (!(gm >= 0.0) || !finite(gm))
      throw DomainError("gm must be non-negative and finite");
    if (!finite(chi_m) || !finite(delta31) || !finite(delta_m))
      throw DomainError("phases and detunings must be finite");
  }
};

/// Steady-state density matrix of one velocity class in the sigma frame
/// (optical phases removed from sigma_3n).
struct SteadyState {
  double rho11 = 0.0;
  double rho22 = 0.0;
  double rho33 = 0.0;
  cplx sigma21{0.0, 0.0};
  cplx sigma31{0.0, 0.0};
  cplx sigma32{0.0, 0.0};

  double trace() const { return rho11 + rho22 + rho33; }
};

struct TraceSample {
  double zeta = 0.0;
  cplx a1{0.0, 0.0};
  cplx a2{0.0, 0.0};
  double I31_rel = 0.0;
  double I32_rel = 0.0;
  double Phi_wrapped = 0.0;
  double Phi_unwrapped = 0.0;
  double g0sq = 0.0;
  double rho33_avg = 0.0;
  double motion_const = 0.0;
};

/// Sampled record of a propagation run, ordered by strictly increasing zeta.
struct PropagationTrace {
  std::vector<TraceSample> samples;
};

// ---------------------------------------------------------------------------
// Unit conversions

namespace detail {
inline double intensity_prefactor(double omega, double gamma) {
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return 2.0 * constants::hbar * omega * omega * omega /
         (3.0 * std::numbers::pi * constants::c * constants::c) * gamma;
}

inline double cross_section_factor(double N, double omega31) {
  if (!(N > 0.0)) throw DomainError("density N must be positive");
  if (!(omega31 > 0.0)) throw DomainError("omega31 must be positive");
  return 3.0 * std::numbers::pi * constants::c * constants::c /
         (2.0 * omega31 * omega31) * N;
}
}  // namespace detail

/// I = (2 hbar omega^3 / 3 pi c^2) g^2 gamma, times a calibration scale. W/m^2.
inline double rabi_to_intensity(double g, double omega, double gamma,
                                double calibration = 1.0) {
  if (!(g >= 0.0)) throw DomainError("Rabi frequency must be non-negative");
  if (!(calibration > 0.0)) throw DomainError("calibration must be positive");
  return detail::intensity_prefactor(omega, gamma) * g * g * calibration;
}

inline double intensity_to_rabi(double intensity, double omega, double gamma,
                                double calibration = 1.0) {
  if (!(intensity >= 0.0)) throw DomainError("intensity must be non-negative");
  if (!(calibration > 0.0)) throw DomainError("calibration must be positive");
  return std::sqrt(intensity /
                   (detail::intensity_prefactor(omega, gamma) * calibration));
}

/// Physical length (m) of a dimensionless optical depth zeta.
inline double zeta_to_length(double zeta, double N, double omega31) {
  return zeta / detail::cross_section_factor(N, omega31);
}

inline double length_to_zeta(double z, double N, double omega31) {
  return z * detail::cross_section_factor(N, omega31);
}

/// Most probable speed sqrt(2 kB T / m) of the thermal distribution.
inline double most_probable_speed(double temperature, double mass) {
  if (!(mass > 0.0)) throw DomainError("mass must be positive");
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  return std::sqrt(2.0 * constants::k_boltzmann * temperature / mass);
}

// ---------------------------------------------------------------------------
// Sodium D1 constants used by the figure presets.

namespace sodium_d1 {
inline constexpr double lambda31 = 589.6e-9;           // m
inline constexpr double gamma31 = 6.1354e7;            // s^-1 (1/16.299 ns)
inline constexpr double ground_splitting_hz = 1.7716261288e9;
inline constexpr double mass_amu = 22.98976928;
inline constexpr double temperature = 440.0;           // K
inline constexpr double density = 4.42e17;             // m^-3 (4.42e11 cm^-3)
inline constexpr double Gamma_rel = 1e-4;
/// Reference point for the intensity calibration: g = 2.0 <-> 12.6 mW/cm^2.
inline constexpr double calib_rabi = 2.0;
inline constexpr double calib_intensity = 126.0;       // W/m^2

inline double omega31() {
  return 2.0 * std::numbers::pi * constants::c / lambda31;
}

inline double intensity_calibration() {
  return calib_intensity /
         rabi_to_intensity(calib_rabi, omega31(), gamma31, 1.0);
}

inline AtomMedium medium() {
  AtomMedium m = AtomMedium::from_wavelength(
      gamma31, 1.0, Gamma_rel, lambda31,
      2.0 * std::numbers::pi * ground_splitting_hz, density,
      most_probable_speed(temperature, mass_amu * constants::amu));
  m.intensity_scale = intensity_calibration();
  return m;
}
}  // namespace sodium_d1

}  // namespace mwconv
