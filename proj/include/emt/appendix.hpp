#pragma once

// Checks of three auxiliary lemmas: polynomial decay of an inverse Fourier
// transform, an interpolation inequality for weighted L^s norms, and the
// comparison of integrals of nonincreasing functions under ordered
// distribution functions.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "emt/spacetime.hpp"

namespace emt {

/// Tensor grid p_j = (j - points/2) spacing per axis, in n = 1, 2 or 3 dimensions.
struct DecayGrid {
  int n = 1;
  std::size_t points = 4096;
  double spacing = 0.05;

  double period() const;  // 2 pi / spacing, the period of the x grid
  DecayGrid doubled() const;  // twice the points at half the spacing
};

struct DecayResult {
  double c = 0.0;           // sup |F^v(x)| (lambda + |x|)^{n + gamma} over |x| <= period / 64
  double argmax = 0.0;      // |x| at the sup
  double edge_mass = 0.0;   // max |F| on the outermost grid shell relative to max |F|
  bool aliased = false;     // edge_mass > 1e-10
  double hypothesis_ratio = 0.0;  // max |D^a F(p)| / |p|^{gamma - |a|} at the spot-check points
  bool hypothesis_ok = false;     // spot-check ratios finite
};

/// F^v(x) = \int F(p) e^{-i p.x} d^n p by FFT on the grid. F is evaluated off
/// the origin only; the origin sample is 0. Derivatives along the axes up to
/// order floor(gamma + n + 1) are spot-checked by central differences at
/// `spot_checks` random points with |p| < 1 / lambda.
DecayResult fourier_decay_check(const std::function<double(std::span<const double>)>& f, double gamma,
                                double lambda, const DecayGrid& grid, std::uint64_t seed = 0,
                                int spot_checks = 10);

struct DecayRefinement {
  std::vector<DecayResult> results;  // base grid, then each doubling
  double max_drift = 0.0;            // max |c_i / c_0 - 1|
};

DecayRefinement decay_refinement(const std::function<double(std::span<const double>)>& f, double gamma,
                                 double lambda, const DecayGrid& grid, int doublings = 2, std::uint64_t seed = 0);

/// |p|^{1/2} exp(-lambda^2 |p|^2).
std::function<double(std::span<const double>)> root_gaussian_family(double lambda);

struct InequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;  // lhs <= rhs + slack
};

inline constexpr double appendix_slack = 1e-12;

/// ||h^eps f||_s <= ||f||_s^{1 - eps} ||h f||_s^eps on a discrete space with
/// weights mu. h^0 = 1 also where h = 0.
InequalityResult interpolation_check(std::span<const cd> f, std::span<const double> h,
                                     std::span<const double> mu, double s, double eps);

/// Atoms (position, weight >= 0) on the real line.
struct LineMeasure {
  std::vector<std::pair<double, double>> atoms;

  double total() const;
  double integrate(const std::function<double(double)>& f) const;
};

struct DominancePair {
  LineMeasure first;
  LineMeasure second;
  bool dominated = false;  // first((-inf, a]) <= second((-inf, a]) for all a
};

/// Sets the dominance flag, comparing the distribution functions at every
/// atom position and at the midpoints between them (tolerance `slack`).
DominancePair make_dominance_pair(LineMeasure first, LineMeasure second, double slack = appendix_slack);

struct DominanceResult {
  InequalityResult integrals;
  bool step_oracle_ok = false;  // step approximations rise to the integrals and keep the order
};

/// \int f dmu1 <= \int f dmu2 for f >= 0 nonincreasing (checked on the
/// sorted atom positions). Throws HypothesisError without dominance.
/// The diagnostic step functions f_N = min(floor(2^N f), 4^N) / 2^N are
/// integrated for N = 1..step_levels.
DominanceResult dominance_integral_check(const DominancePair& pair, const std::function<double(double)>& f,
                                         int step_levels = 12);

/// Random instances for batch runs.
struct InterpolationInstance {
  std::vector<cd> f;
  std::vector<double> h;
  std::vector<double> mu;
  double s = 2.0;
  double eps = 0.5;
};

InterpolationInstance random_interpolation_instance(std::mt19937_64& rng);

/// Nonincreasing step function: values[i] on [breaks[i-1], breaks[i]).
struct StepFunction {
  std::vector<double> breaks;  // increasing
  std::vector<double> values;  // breaks.size() + 1 entries, nonincreasing, >= 0
  double operator()(double x) const;
};

struct DominanceInstance {
  DominancePair pair;
  StepFunction f;
};

/// second random; first obtained by moving parts of its atoms to the right.
DominanceInstance random_dominance_instance(std::mt19937_64& rng);

}  // namespace emt
