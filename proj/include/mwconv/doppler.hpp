#pragma once
// Averaging of the medium polarization over the 1-D thermal distribution
// w(vz) = exp(-vz^2/vp^2) / (sqrt(pi) vp).

#include <Eigen/Eigenvalues>
#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mwconv/bloch.hpp"

namespace mwconv {

/// Velocity nodes (m/s) with normalized nonnegative weights.
struct VelocityQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

enum class QuadratureKind { resonance, hermite, trapezoid };

inline const char* to_string(QuadratureKind k) {
  switch (k) {
    case QuadratureKind::resonance: return "resonance";
    case QuadratureKind::hermite: return "hermite";
    case QuadratureKind::trapezoid: return "trapezoid";
  }
  return "?";
}

inline QuadratureKind quadrature_kind_from_string(const std::string& s) {
  if (s == "resonance") return QuadratureKind::resonance;
  if (s == "hermite") return QuadratureKind::hermite;
  if (s == "trapezoid") return QuadratureKind::trapezoid;
  throw DomainError("unknown quadrature kind '" + s +
                    "' (expected resonance, hermite or trapezoid)");
}

/// Recipe for a quadrature; the node set itself may depend on the fields.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::resonance;
  int nodes = 64;
};

inline double velocity_weight(double vz, double vp) {
  if (!(vp > 0.0)) {
    throw DomainError(
        "velocity_weight needs vp > 0; use a single-class quadrature for vp = 0");
  }
  const double x = vz / vp;
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * vp);
}

namespace detail {

inline void normalize(VelocityQuadrature& q) {
  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double& w : q.weights) w /= total;
}

inline void require_nodes(int n) {
  if (n < 1) throw DomainError("quadrature needs at least one node");
}

}  // namespace detail

/// Delta distribution: every atom in one velocity class.
inline VelocityQuadrature single_class(double vz = 0.0) {
  return {{vz}, {1.0}};
}

/// Gauss-Hermite nodes for the exp(-x^2) weight (Golub-Welsch).
inline VelocityQuadrature gauss_hermite(int n, double vp) {
  detail::require_nodes(n);
  if (vp == 0.0 || n == 1) return single_class(0.0);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    J(k, k - 1) = J(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  VelocityQuadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    q.nodes[i] = es.eigenvalues()(i);
    q.weights[i] = v0 * v0;
  }
  // Enforce exact mirror symmetry of the rule.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (q.nodes[j] - q.nodes[i]);
    const double w = 0.5 * (q.weights[i] + q.weights[j]);
    q.nodes[i] = -x;
    q.nodes[j] = x;
    q.weights[i] = q.weights[j] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  for (double& x : q.nodes) x *= vp;
  detail::normalize(q);
  return q;
}

/// Plain trapezoid over [-span vp, span vp]; diagnostics only.
inline VelocityQuadrature trapezoid(int n, double vp, double span = 4.0) {
  detail::require_nodes(n);
  if (vp == 0.0 || n == 1) return single_class(0.0);
  VelocityQuadrature q;
  for (int i = 0; i < n; ++i) {
    const double x = -span + 2.0 * span * i / (n - 1);
    const double edge = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    q.nodes.push_back(x * vp);
    q.weights.push_back(edge * std::exp(-x * x));
  }
  detail::normalize(q);
  return q;
}

/// Trapezoid rule in u after xi = width * sinh(u), where xi = delta31 -
/// k31 vz / gamma31 is the one-photon detuning seen by the class. Nodes
/// crowd around the resonant class on the scale of the homogeneous width and
/// spread geometrically over the Doppler contour (|vz| <= 7 vp). The mapped
/// integrand is analytic in a strip, so convergence is exponential.
inline VelocityQuadrature resonance_adapted(int n, double vp, double k31,
                                            double gamma31, double delta31,
                                            double width = 1.0) {
  detail::require_nodes(n);
  if (vp == 0.0) return single_class(0.0);
  if (!(k31 > 0.0) || !(gamma31 > 0.0) || !(width > 0.0))
    throw DomainError("resonance quadrature needs positive k31, gamma31, width");
  const double scale = gamma31 / k31;  // m/s per unit of detuning
  if (n == 1) return single_class(delta31 * scale);
  const double doppler = vp / scale;
  const double U = std::asinh((std::abs(delta31) + 7.0 * doppler) / width);
  const double h = 2.0 * U / (n - 1);
  VelocityQuadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Walk u downward so that vz comes out ascending.
    const double u = U - h * i;
    const double xi = width * std::sinh(u);
    const double vz = (delta31 - xi) * scale;
    const double edge = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double x = vz / vp;
    q.nodes[i] = vz;
    q.weights[i] = edge * std::exp(-x * x) * std::cosh(u);
  }
  detail::normalize(q);
  return q;
}

inline VelocityQuadrature build_quadrature(const QuadratureRule& rule,
                                           const AtomMedium& medium,
                                           const DriveFields& fields) {
  switch (rule.kind) {
    case QuadratureKind::resonance:
      return resonance_adapted(rule.nodes, medium.vp, medium.k31,
                               medium.gamma31, fields.delta31);
    case QuadratureKind::hermite:
      return gauss_hermite(rule.nodes, medium.vp);
    case QuadratureKind::trapezoid:
      return trapezoid(rule.nodes, medium.vp);
  }
  throw DomainError("unknown quadrature kind");
}

/// Neumaier-compensated accumulator; order of addition is the caller's.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct AveragedPolarization {
  cplx rho13{0.0, 0.0};  // raw-frame averages that drive the field equations
  cplx rho23{0.0, 0.0};
  cplx sigma31{0.0, 0.0};  // sigma-frame averages
  cplx sigma32{0.0, 0.0};
  double rho33 = 0.0;
};

/// Velocity-averaged polarization. Classes are summed in node order with
/// compensated summation so the result does not depend on evaluation order.
inline AveragedPolarization averaged_polarization(
    const AtomMedium& medium, const DriveFields& fields,
    const VelocityQuadrature& quad, bool equal_wavevectors = false) {
  if (quad.nodes.empty() || quad.nodes.size() != quad.weights.size())
    throw DomainError("invalid velocity quadrature");
  CompensatedSum r13re, r13im, r23re, r23im, r33;
  BlochContext ctx{medium, fields, 0.0, equal_wavevectors};
  for (std::size_t i = 0; i < quad.size(); ++i) {
    ctx.vz = quad.nodes[i];
    DensityMatrix rho;
    try {
      rho = solve_density_matrix(ctx).rho;
    } catch (const DegenerateSteadyState& e) {
      throw DegenerateSteadyState(std::string(e.what()) + " (vz = " +
                                  std::to_string(ctx.vz) + " m/s)");
    }
    const double w = quad.weights[i];
    r13re.add(w * rho(0, 2).real());
    r13im.add(w * rho(0, 2).imag());
    r23re.add(w * rho(1, 2).real());
    r23im.add(w * rho(1, 2).imag());
    r33.add(w * rho(2, 2).real());
  }
  AveragedPolarization p;
  p.rho13 = {r13re.value(), r13im.value()};
  p.rho23 = {r23re.value(), r23im.value()};
  p.rho33 = r33.value();
  const double phi1 = sigma_frame_phase(fields.a1, p.rho13);
  const double phi2 = sigma_frame_phase(fields.a2, p.rho23);
  p.sigma31 = std::conj(p.rho13) * std::polar(1.0, phi1);
  p.sigma32 = std::conj(p.rho23) * std::polar(1.0, phi2);
  return p;
}

/// Velocity average of the full density matrix, returned in the sigma frame.
inline SteadyState averaged_steady_state(const AtomMedium& medium,
                                         const DriveFields& fields,
                                         const VelocityQuadrature& quad,
                                         bool equal_wavevectors = false) {
  if (quad.nodes.empty() || quad.nodes.size() != quad.weights.size())
    throw DomainError("invalid velocity quadrature");
  std::array<CompensatedSum, 18> acc;
  BlochContext ctx{medium, fields, 0.0, equal_wavevectors};
  for (std::size_t i = 0; i < quad.size(); ++i) {
    ctx.vz = quad.nodes[i];
    const DensityMatrix rho = solve_density_matrix(ctx).rho;
    for (int k = 0; k < 9; ++k) {
      acc[2 * k].add(quad.weights[i] * rho(k / 3, k % 3).real());
      acc[2 * k + 1].add(quad.weights[i] * rho(k / 3, k % 3).imag());
    }
  }
  DensityMatrix avg;
  for (int k = 0; k < 9; ++k)
    avg(k / 3, k % 3) = {acc[2 * k].value(), acc[2 * k + 1].value()};
  return to_sigma_frame(avg, fields);
}

}  // namespace mwconv
