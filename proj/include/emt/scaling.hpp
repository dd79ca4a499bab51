#pragma once

// Momentum scaling degree: zoom a test function onto a submanifold of
// momentum space and read the degree off the log-log slope of the response.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "emt/toy_model.hpp"

namespace emt {

using ChartPoint = std::array<double, 4>;  // (rho^1..rho^m, sigma^1..sigma^{4-m})

/// Quadratic local coordinates around q: c_i = sum_j L_ij d_j + sum_jk Q_ijk d_j d_k
/// with d = p - q. The surface is c_0 = .. = c_{m-1} = 0.
struct Chart {
  FourVector origin;
  std::array<std::array<double, 4>, 4> linear{};
  std::array<std::array<std::array<double, 4>, 4>, 4> quadratic{};
  double domain_radius = 1.0;  // U: Euclidean ball around the origin

  ChartPoint coordinates(const FourVector& p) const;
  /// Inverse by Newton iteration from the linear guess; throws HypothesisError
  /// if it does not converge.
  FourVector momentum(const ChartPoint& c) const;
  /// det of d(coordinates)/dp.
  double jacobian(const FourVector& p) const;

  /// c = d in the standard basis.
  static Chart affine(const FourVector& q, double domain_radius = 1.0);
  /// c_0 = p.p - mass^2 (Minkowski), c_{1,2,3} = spatial components of d.
  /// q must lie on the shell.
  static Chart mass_shell(const FourVector& q, double mass, double domain_radius = 1.0);
};

/// phi^_gamma(p) = gamma^m psi(gamma rho) chi(sigma), psi a tilted bump of
/// radius rho_radius, chi a bump of radius sigma_radius normalised to
/// integral 1.
struct ScalingFamily {
  Chart chart;
  int m = 1;
  double rho_radius = 0.25;
  double sigma_radius = 0.5;
  double tilt = 0.5;  // psi = bump(|rho| / r) (1 + tilt rho^1 / r)

  double psi(std::span<const double> rho) const;
  double chi(std::span<const double> sigma) const;
  double operator()(const FourVector& p, double gamma) const;
  /// Checks m and that the gamma = 1 support stays inside the chart domain.
  void validate() const;
};

/// Matrix of phi^_gamma(p_m - p_n) over the model's transfers.
Matrix scaled_test(const ScalingFamily& family, const QuantumModel& model, double gamma);

/// Integral of |phi^_gamma| in chart coordinates by a tensor trapezoid rule
/// with `points` nodes per axis on the support box.
double chart_integral(const ScalingFamily& family, double gamma, int points = 41);

struct DegreeEstimate {
  std::vector<double> gamma;
  std::vector<double> value;
  double degree = 0.0;  // -slope over the last half, +inf on underflow
  double slope_last_half = 0.0;
  double slope_full = 0.0;
  bool stable = false;  // |slope_last_half - slope_full| < 0.1
  bool underflow = false;
};

/// Values below this count as zero response.
inline constexpr double underflow_floor = 1e-13;

/// Fits log value against log gamma; needs a geometric grid of at least 6 points.
DegreeEstimate estimate_degree(const std::function<double(double)>& evaluator, std::span<const double> gammas);

/// sum_l c_l d^l delta along rho^1, supported at rho = 0 in m variables.
struct DeltaCombination {
  int m = 1;
  std::vector<std::pair<int, double>> terms;  // (derivative order l, coefficient)
  int max_order() const;
  double analytic_degree() const { return -m - max_order(); }
};

/// gamma -> |T(psi_gamma)| with psi_gamma(rho) = gamma^m psi(gamma rho), derivatives of
/// psi at 0 by central differences.
std::function<double(double)> delta_evaluator(const DeltaCombination& t, const ScalingFamily& family);

/// gamma -> |integral |rho|^a psi_gamma(rho) d^m rho| by adaptive radial quadrature.
std::function<double(double)> homogeneous_evaluator(double a, const ScalingFamily& family);

/// gamma -> ||(B o phi^_gamma) G(P0)||, or without weight when g is empty.
std::function<double(double)> model_evaluator(const OperatorField& b, const ScalingFamily& family,
                                              std::optional<EnergyWeight> g = std::nullopt);

/// Bare bound -(m+4)/2 without kappa; with kappa the bound for BG_t(P0),
/// which requires q != 0.
double degree_lower_bounds(int m, std::optional<double> kappa, bool q_is_zero);

struct AllowedSingularity {
  int m = 0;
  int l = 0;
  bool at_origin = false;  // only the point delta at q = 0
  friend bool operator==(const AllowedSingularity&, const AllowedSingularity&) = default;
};

/// Derivatives of delta concentrated on a codimension-m surface that the
/// bounds do not exclude, sorted by (m, l). Boundary cases are allowed.
std::vector<AllowedSingularity> classify_allowed_singularities(double kappa);

struct MonotonicityResult {
  DegreeEstimate base;
  DegreeEstimate smeared;
  bool pass = false;  // smeared.degree >= base.degree - 0.2
};

MonotonicityResult remark_monotonicity_check(const OperatorField& b, const DiscreteMeasure& nu,
                                             const ScalingFamily& family, std::span<const double> gammas);

/// Entries B_{m0} = 1 for every state m != 0 on the shell p.p = mass^2, so the
/// transfers p_m - p_0 sit on the shell (requires p_0 = 0).
OperatorField shell_field(std::shared_ptr<const QuantumModel> model, double mass);

}  // namespace emt
