#pragma once

// Numerical checks of the operator bounds. Most bounds hold "up to a
// constant", so a report records lhs / rhs per instance and compares the sup
// over a calibration half of each family with the sup over the holdout half.

#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "emt/toy_model.hpp"

namespace emt {

enum class BoundMode {
  Exact,     // ratio <= 1 + exact_slack for every instance
  Protocol,  // holdout sup <= margin * calibration sup, per family
  Custom,    // pass decided by the check itself (custom_pass)
};

struct BoundInstance {
  std::string family;
  std::size_t index = 0;  // position within the family
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool calibration = false;
};

struct FamilySummary {
  std::string family;
  std::size_t count = 0;
  std::size_t calibration_count = 0;
  double sup_ratio = 0.0;
  double calibration_sup = 0.0;
  double holdout_sup = 0.0;
  std::size_t violations = 0;
  bool pass = false;
};

struct BoundReport {
  std::string id;
  std::string description;
  BoundMode mode = BoundMode::Protocol;
  double margin = 2.0;
  double exact_slack = 1e-12;
  double zero_tolerance = 1e-12;  // lhs treated as 0 where the rhs vanishes

  std::vector<BoundInstance> instances;
  std::vector<FamilySummary> families;  // filled by finalize, sorted by name
  double sup_ratio = 0.0;
  std::size_t violations = 0;
  std::size_t invariant_failures = 0;
  bool custom_pass = true;
  bool pass = false;
  std::vector<std::string> notes;
  std::map<std::string, std::size_t> family_counts;

  /// Ratio rule: lhs / rhs; 0/0 counts as 0; lhs > zero_tolerance over
  /// rhs = 0 is +inf and a violation.
  void add(const std::string& family, double lhs, double rhs);
  /// Appends instances (re-indexed within their family), invariant failures
  /// and notes. Call finalize afterwards.
  void merge(const BoundReport& other);
  void finalize();
};

/// Throws HypothesisError unless k > (kappa + 1)/2.
void require_bound_order(double k, double kappa);

/// Hash split of a family into calibration and holdout halves.
bool calibration_member(const std::string& family, std::size_t index);

/// Which filtered part of B a check uses.
enum class PartKind { Plus, Minus, Momentum };

/// B^k_+, B^k_- or B^k_t.
OperatorField bound_part(const OperatorField& b, double k, PartKind part,
                         BohrConvention c = BohrConvention::MinusLowersEnergy);

/// Points (t, r e) with t = extent i / steps, |i| <= steps, r = extent j / steps,
/// 0 <= j <= 2 steps, along the three axes and the (1,1,1) diagonal.
std::vector<FourVector> envelope_grid(double extent, int steps);

struct MeasurePair {
  DiscreteMeasure first;
  DiscreteMeasure second;
};

/// ||[B1(nu1), B2(nu2)]|| <= c sum |w_i||v_j| D(x_i - y_j), with c fitted
/// over every atom difference y_j - x_i of the family, so the bound is exact.
BoundReport commutator_envelope_check(const OperatorField& b1, const OperatorField& b2,
                                      std::span<const MeasurePair> measures, const EnvelopeParams& params,
                                      const std::string& family = "default");

struct BkCheckParams {
  double k = 1.5;
  EnvelopeParams envelope;
  FrequencySign sign = FrequencySign::Plus;
  std::vector<double> energies;
  BohrConvention convention = BohrConvention::MinusLowersEnergy;
};

/// ||B^k_+-(nu) P(E)|| against sqrt(c_+-(E) J(nu)), c_+ = 1 + lambda E,
/// c_- = lambda E, J = sum |w_i||w_j| D(x_i - x_j). Also asserts that the lhs
/// is nondecreasing in E (invariant_failures). With a nonempty grid the
/// kappa fit of B is recorded in the notes and must be finite.
BoundReport theorem_Bk_check(const OperatorField& b, const BkCheckParams& params,
                             std::span<const DiscreteMeasure> measures, const std::string& family,
                             std::span<const FourVector> kappa_grid = {});

struct GBCheckParams {
  double k = 1.5;
  EnvelopeParams envelope;
  PartKind part = PartKind::Plus;
  EnergyWeight weight = EnergyWeight::plus(1.0, 1.0);
  BohrConvention convention = BohrConvention::MinusLowersEnergy;
};

/// ||B^k_e(nu) G_e(P0)|| against sqrt(J(nu)); the momentum part uses G_+.
BoundReport theorem_GB_check(const OperatorField& b, const GBCheckParams& params,
                             std::span<const DiscreteMeasure> measures, const std::string& family);

/// Admissible smearing functions: Gaussian, or (lambda + |x|)^{-r} with r at
/// least 4 + kappa on spacetime (1 + kappa on the time axis).
struct SmearingProfile {
  enum class Decay { Gaussian, Power };
  Decay decay = Decay::Gaussian;
  bool time_only = false;
  double scale = 1.0;     // Gaussian width or lambda
  double exponent = 0.0;  // r for Power
  int points = 7;         // per axis
  double half_width = 3.0;

  double operator()(const FourVector& x) const;
  void validate(double kappa) const;
  /// Grid atoms with quadrature weights.
  DiscreteMeasure sampled() const;
};

struct StabilityParams {
  EnvelopeParams envelope;
  double extent = 4.0;
  int steps = 6;
  double growth_tolerance = 0.2;
};

/// kappa fits of B(chi) and B on the grid and on the grid widened twice at
/// the same spacing. Instances are (c(B(chi)), c(B)) per grid; passes when
/// both are finite and the ratio moves by less than growth_tolerance.
BoundReport stability_check(const OperatorField& b, const SmearingProfile& chi, const StabilityParams& params,
                            const std::string& family = "default");

/// Sobolev exponent p for the fixed-time bound; throws at kappa = 3.
double sobolev_exponent(double kappa);
/// Smallest admissible k is exclusive: k > (kappa + 1)/2 below 3, k > 2 above.
void check_sobolev_order(double k, double kappa);

struct SpatialGaussian {
  std::array<double, 3> centre{};
  double width = 1.0;
  std::array<double, 3> wave{};
  cd amplitude = 1.0;

  cd operator()(const std::array<double, 3>& x) const;
};

/// Centred cube of points^3 nodes.
struct SpatialGrid {
  int points = 12;
  double spacing = 0.5;
};

/// delta(x0 - tau) f(x/R) dx as grid atoms at R x_i with weights f(x_i) (R h)^3.
DiscreteMeasure fixed_time_measure(const SpatialGaussian& f, double tau, const SpatialGrid& grid, double R = 1.0);
/// ||f(./R)||_p by the same quadrature.
double grid_lp_norm(const SpatialGaussian& f, const SpatialGrid& grid, double p, double R = 1.0);

struct SobolevParams {
  double k = 2.5;
  EnvelopeParams envelope;
  PartKind part = PartKind::Plus;
  EnergyWeight weight = EnergyWeight::plus(1.0, 1.0);
  double tau = 0.0;
  SpatialGrid grid;
  BohrConvention convention = BohrConvention::MinusLowersEnergy;
};

BoundReport sobolev_bound_check(const OperatorField& b, const SobolevParams& params,
                                std::span<const SpatialGaussian> profiles, const std::string& family);

/// lhs / ||f_R||_p for each R.
std::vector<double> sobolev_rescaling_sweep(const OperatorField& b, const SobolevParams& params,
                                            const SpatialGaussian& f, std::span<const double> radii);

/// phi(x) = a exp(-sum (x^mu - c^mu)^2 / (2 s_mu^2)) exp(-i q.x).
struct GaussianPacket {
  FourVector centre;
  std::array<double, 4> widths{1.0, 1.0, 1.0, 1.0};
  FourVector wave;
  cd amplitude = 1.0;

  cd operator()(const FourVector& x) const;
  /// Integral of phi(x) exp(i p.x) d^4x, the factor multiplying B_mn in B(phi).
  cd transform(const FourVector& p) const;
};

enum class WeightedForm {
  TimeWeight,          // ||(lambda + |X0|)^sigma phi||_p
  SpectralDerivative,  // sqrt(lambda^{2 sigma} ||phi^||_2^2 + ||d_0^sigma phi^||_2^2), kappa > 3
  SpaceTimeWeight,     // ||(lambda + |X0|)^tau (lambda + |X|)^beta phi||_2, kappa < 3
};

struct WeightedParams {
  double k = 2.5;
  EnvelopeParams envelope;
  PartKind part = PartKind::Plus;
  EnergyWeight weight = EnergyWeight::plus(1.0, 1.0);
  WeightedForm form = WeightedForm::TimeWeight;
  double sigma = 0.6;
  double beta = 0.6;
  double tau = 0.6;
  BohrConvention convention = BohrConvention::MinusLowersEnergy;

  /// Exponent ranges of each form; throws HypothesisError.
  void validate() const;
};

/// The rhs norm of the chosen form (quadrature; the spectral form filters
/// the time factor of phi^ with the fractional parts).
double weighted_norm(const GaussianPacket& phi, const WeightedParams& params);

BoundReport weighted_bound_check(const OperatorField& b, const WeightedParams& params,
                                 std::span<const GaussianPacket> packets, const std::string& family);

/// Gaussian probe in momentum space: exp(-width^2 |v|^2 / 2), Euclidean |v|.
struct ProbeProfile {
  double width = 1.0;
  double operator()(const FourVector& v) const;
};

struct DecayCurve {
  std::vector<double> gamma;
  std::vector<double> value;
  double final_ratio = 0.0;       // value.back() / value.front(), 0 for an all-zero curve
  bool sustained_growth = false;  // two consecutive rises within the last decade of gamma
  bool decays(double fraction = 0.1) const { return final_ratio < fraction && !sustained_growth; }
};

/// first, ..., last with a constant ratio.
std::vector<double> geometric_schedule(double first, double last, int count);

struct CorollaryParams {
  double k = 1.0;
  double kappa = 1.0;
  double delta = 0.5;  // time squeeze exponent (point probe)
  ProbeProfile probe;
  EnergyWeight weight = EnergyWeight::plus(1.0, 1.0);
};

/// Throws HypothesisError unless k > 1/2, kappa > 0, 0 < delta < 1 and G is admissible.
void validate_corollary(const CorollaryParams& params);

/// ||B^k_t(phi_{q,gamma}) G(P0)|| with phi^_{q,gamma}(p) = probe(gamma^delta (p0 - q0), gamma (p - q)).
DecayCurve corollary_point_limit(const OperatorField& b, const CorollaryParams& params, const FourVector& q,
                                 std::span<const double> gammas);

/// Same with probe(gamma (p^n - r) n + p_perp), n unit spacelike, p^n = -n.p.
DecayCurve corollary_plane_limit(const OperatorField& b, const CorollaryParams& params, const FourVector& n,
                                 double r, std::span<const double> gammas);

/// Smallest probe argument norm over the transfers of the model at gamma,
/// times the probe width: how far the probe sits from the transfer set.
double point_probe_margin(const QuantumModel& model, const CorollaryParams& params, const FourVector& q,
                          double gamma);
double plane_probe_margin(const QuantumModel& model, const CorollaryParams& params, const FourVector& n, double r,
                          double gamma);

}  // namespace emt
