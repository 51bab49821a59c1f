#pragma once
// Steady state of the closed-loop Lambda atom for one velocity class.
//
// Levels |1>,|2> (ground) and |3> (excited). In the frame rotating with the
// optical fields the Hamiltonian, in units of gamma31, is
//
//   H = -conj(a1)|3><1| - conj(a2)|3><2| - gm e^{i chi_m} |1><2| + h.c.
//       - d31 |3><3| - (d31 - d32) |2><2|
//
// with d3n the Doppler-shifted optical detunings. |3> decays to |1> at rate 1
// and to |2> at gamma32; the ground coherence dephases at Gamma. Moving to the
// sigma frame (sigma_3n = rho_3n e^{i phi_n}) leaves real optical couplings and
// puts the loop phase Phi on the microwave coupling, -gm e^{-i Phi}.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <sstream>

#include "mwconv/core.hpp"

namespace mwconv {

/// Everything needed to solve one velocity class.
struct BlochContext {
  AtomMedium medium;
  DriveFields fields;
  double vz = 0.0;                 // m/s
  bool equal_wavevectors = false;  // use k32 = k31 in the Doppler shift

  double delta31_eff() const {
    return fields.delta31 - medium.k31 * vz / medium.gamma31;
  }
  double delta32_eff() const {
    const double k = equal_wavevectors ? medium.k31 : medium.k32;
    return fields.delta32() - k * vz / medium.gamma31;
  }
};

using DensityMatrix = Eigen::Matrix3cd;

struct DensitySolution {
  DensityMatrix rho;   // raw rotating frame, rho(i,j) = <i|rho|j> (0-based)
  double condition;    // 1 / reciprocal-condition estimate of the solve
};

/// Solves above this condition estimate are rejected.
inline constexpr double kMaxCondition = 1e13;

namespace detail {

using Liouvillian = Eigen::Matrix<cplx, 9, 9>;

inline int vec_index(int i, int j) { return 3 * i + j; }

inline Liouvillian build_liouvillian(const DriveFields& f, double gamma32,
                                     double Gamma, double d31, double d32) {
  Eigen::Matrix3cd H = Eigen::Matrix3cd::Zero();
  H(2, 0) = -std::conj(f.a1);
  H(0, 2) = -f.a1;
  H(2, 1) = -std::conj(f.a2);
  H(1, 2) = -f.a2;
  H(0, 1) = -f.gm * std::polar(1.0, f.chi_m);
  H(1, 0) = std::conj(H(0, 1));
  H(2, 2) = -d31;
  H(1, 1) = -(d31 - d32);

  const cplx I(0.0, 1.0);
  const double decay_total = 1.0 + gamma32;
  Liouvillian L = Liouvillian::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r = vec_index(i, j);
      for (int m = 0; m < 3; ++m) {
        L(r, vec_index(m, j)) += -I * H(i, m);
        L(r, vec_index(i, m)) += I * H(m, j);
      }
      L(r, r) -= 0.5 * decay_total * ((i == 2) + (j == 2));
    }
  }
  L(vec_index(0, 0), vec_index(2, 2)) += 1.0;
  L(vec_index(1, 1), vec_index(2, 2)) += gamma32;
  L(vec_index(0, 1), vec_index(0, 1)) -= Gamma;
  L(vec_index(1, 0), vec_index(1, 0)) -= Gamma;
  return L;
}

}  // namespace detail

/// Steady-state density matrix in the raw rotating frame.
inline DensitySolution solve_density_matrix(const BlochContext& ctx) {
  const DriveFields& f = ctx.fields;
  f.validate();
  if (std::abs(f.a1) == 0.0 && std::abs(f.a2) == 0.0 && f.gm == 0.0) {
    throw DegenerateSteadyState(
        "degenerate steady state: no field couples the ground states");
  }
  detail::Liouvillian L = detail::build_liouvillian(
      f, ctx.medium.gamma32, ctx.medium.Gamma, ctx.delta31_eff(),
      ctx.delta32_eff());

  // The rho11 equation is redundant with the others; replace it by the trace.
  L.row(0).setZero();
  L(0, detail::vec_index(0, 0)) = 1.0;
  L(0, detail::vec_index(1, 1)) = 1.0;
  L(0, detail::vec_index(2, 2)) = 1.0;
  Eigen::Matrix<cplx, 9, 1> rhs = Eigen::Matrix<cplx, 9, 1>::Zero();
  rhs(0) = 1.0;

  Eigen::PartialPivLU<detail::Liouvillian> lu(L);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : HUGE_VAL;
  if (!(condition <= kMaxCondition)) {
    std::ostringstream os;
    os << "ill-conditioned steady-state solve (condition estimate "
       << condition << ", vz = " << ctx.vz << " m/s)";
    throw ConditioningError(os.str(), condition);
  }
  const Eigen::Matrix<cplx, 9, 1> x = lu.solve(rhs);

  DensitySolution out{DensityMatrix::Zero(), condition};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.rho(i, j) = x(detail::vec_index(i, j));
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(out.rho(i, i).real()))
      throw ConditioningError("non-finite steady-state solution", condition);
  }
  return out;
}

/// Phase of field n (1 or 2) used for the sigma frame: the field's own phase,
/// or for a vanishing field the phase it is generated with, arg(-i rho_n3).
inline double sigma_frame_phase(const cplx& a, const cplx& rho_n3) {
  if (std::abs(a) > 0.0) return std::arg(a);
  return std::arg(cplx(0.0, -1.0) * rho_n3);
}

/// Converts a raw density matrix into the sigma frame. sigma21 is referred to
/// the loop phase so that the dark state reads g2|1> - e^{i Phi} g1|2>.
inline SteadyState to_sigma_frame(const DensityMatrix& rho,
                                  const DriveFields& f) {
  const double phi1 = sigma_frame_phase(f.a1, rho(0, 2));
  const double phi2 = sigma_frame_phase(f.a2, rho(1, 2));
  const double Phi = phi1 - phi2 - f.chi_m;
  SteadyState s;
  s.rho11 = rho(0, 0).real();
  s.rho22 = rho(1, 1).real();
  s.rho33 = rho(2, 2).real();
  s.sigma31 = rho(2, 0) * std::polar(1.0, phi1);
  s.sigma32 = rho(2, 1) * std::polar(1.0, phi2);
  s.sigma21 = rho(1, 0) * std::polar(1.0, Phi + phi1 - phi2);
  return s;
}

/// Unique steady state of the closed-Lambda master equation for one class.
inline SteadyState solve_steady(const BlochContext& ctx) {
  return to_sigma_frame(solve_density_matrix(ctx).rho, ctx.fields);
}

// ---------------------------------------------------------------------------
// Closed-form resonant solution (all detunings zero, Gamma = 0, vz = 0,
// gamma31 = gamma32).

/// Which bracket enters the denominator L. The squared form is the one that
/// matches the master equation; the other reproduces the printed expression.
enum class LBracket { corrected, as_printed };

struct ResonantPartial {
  cplx sigma31;
  cplx sigma32;
  double rho33;
};

inline double resonant_denominator(double g1, double g2, double gm, double Phi,
                                   LBracket bracket = LBracket::corrected) {
  const double g1s = g1 * g1, g2s = g2 * g2, g0s = g1s + g2s;
  const double diff = g1s - g2s;
  const double s = std::sin(Phi);
  const double b = bracket == LBracket::corrected ? 3.0 * diff * diff : 3.0 * diff;
  const double gms = gm * gm;
  return 0.5 * g0s * g0s * g0s +
         gms * (b - 2.0 * g0s * g0s + 2.0 * g0s + 12.0 * g1s * g2s * s * s) +
         2.0 * g0s * gms * gms;
}

inline ResonantPartial closed_form_resonant(
    const DriveFields& f, LBracket bracket = LBracket::corrected) {
  f.validate();
  const double g1 = f.g1(), g2 = f.g2(), gm = f.gm;
  const double g1s = g1 * g1, g2s = g2 * g2, g0s = g1s + g2s;
  if (!(g0s > 0.0)) {
    throw DomainError(
        "closed form needs g0 > 0 (degenerate input: no optical field)");
  }
  const double Phi = f.loop_phase();
  const double s = std::sin(Phi), c = std::cos(Phi), s2 = std::sin(2.0 * Phi);
  const double L = resonant_denominator(g1, g2, gm, Phi, bracket);
  const double gms = gm * gm;
  const double lin = gm * g0s * (g0s - 2.0 * gms) / (2.0 * L);
  const double diff = g1s - g2s;

  ResonantPartial r;
  const double im31 = -g2 * lin * s + gms * g1 * (diff + 2.0 * g2s * s * s) / L;
  const double im32 = g1 * lin * s - gms * g2 * (diff - 2.0 * g1s * s * s) / L;
  const double lin_re = gm * diff * (g0s - 2.0 * gms) / (2.0 * L);
  const double re31 = g2 * lin_re * c + gms * g1 * g2s / L * s2;
  const double re32 = -g1 * lin_re * c - gms * g1s * g2 / L * s2;
  r.sigma31 = {re31, im31};
  r.sigma32 = {re32, im32};
  r.rho33 = gms * (diff * diff + 4.0 * g1s * g2s * s * s) / L;
  return r;
}

/// Population of the dark superposition g2/g0|1> - e^{i Phi} g1/g0|2>.
inline double dark_state_population(const DriveFields& f,
                                    const SteadyState& st) {
  const double g1 = f.g1(), g2 = f.g2(), g0s = f.g0sq();
  if (!(g0s > 0.0)) throw DomainError("dark state undefined for g0 = 0");
  const double Phi = f.loop_phase();
  return (g2 * g2 * st.rho11 + g1 * g1 * st.rho22 -
          2.0 * g1 * g2 * (st.sigma21 * std::polar(1.0, -Phi)).real()) /
         g0s;
}

struct GroundState {
  double rho11;
  double rho22;
  cplx sigma21;
};

/// Ground-state elements to first order in gm around the dark state, in the
/// same sigma21 frame as SteadyState.
inline GroundState weak_field_ground_state(const DriveFields& f) {
  const double g1 = f.g1(), g2 = f.g2(), g0s = f.g0sq(), gm = f.gm;
  if (!(g0s > 0.0)) throw DomainError("weak-field expansion needs g0 > 0");
  const double Phi = f.loop_phase();
  const double g0q = g0s * g0s;
  const double shift = 2.0 * gm * g1 * g2 * std::sin(Phi) / g0q;
  GroundState gs;
  gs.rho11 = g2 * g2 / g0s - shift;
  gs.rho22 = g1 * g1 / g0s + shift;
  gs.sigma21 = -(g1 * g2 / g0s) * std::polar(1.0, Phi) -
               cplx(0.0, gm * (g1 * g1 - g2 * g2) / g0q) *
                   std::polar(1.0, 2.0 * Phi);
  return gs;
}

}  // namespace mwconv
