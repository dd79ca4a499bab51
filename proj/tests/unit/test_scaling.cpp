#include <cmath>
#include <random>

#include "doctest.h"
#include "emt/bounds.hpp"
#include "emt/scaling.hpp"

using namespace emt;

namespace {

std::shared_ptr<const QuantumModel> share(QuantumModel m) { return std::make_shared<const QuantumModel>(std::move(m)); }

std::size_t state_with(const QuantumModel& model, const FourVector& spatial) {
  for (std::size_t i = 0; i < model.dim(); ++i) {
    const auto& p = model.spectrum()[i];
    if (p[1] == spatial[1] && p[2] == spatial[2] && p[3] == spatial[3] && p[0] > 0) return i;
  }
  throw std::runtime_error("state not found");
}

// Independent mass of exp(-1/(1-r^2)) over the unit ball of R^k by a midpoint rule.
double ball_mass(int k) {
  const double area[] = {2.0, 2.0 * M_PI, 4.0 * M_PI, 2.0 * M_PI * M_PI};
  const int n = 200000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) / n;
    s += std::pow(r, k - 1) * std::exp(-1.0 / (1.0 - r * r));
  }
  return area[k - 1] * s / n;
}

const std::vector<double> grid = geometric_schedule(1.0, 1024.0, 11);

}  // namespace

TEST_CASE("charts") {
  const FourVector q(std::sqrt(1.25), 0.5, 0.0, 0.0);
  const Chart a = Chart::affine(q);
  const FourVector p(1.0, 0.2, -0.3, 0.4);
  const auto c = a.coordinates(p);
  for (std::size_t i = 0; i < 4; ++i) CHECK(c[i] == doctest::Approx(p[i] - q[i]));
  CHECK(a.jacobian(p) == doctest::Approx(1.0));

  const Chart s = Chart::mass_shell(q, 1.0);
  const FourVector on(std::sqrt(1.0 + 0.09 + 0.16), 0.3, 0.4, 0.0);
  CHECK(std::abs(s.coordinates(on)[0]) < 1e-14);
  CHECK(s.jacobian(q) == doctest::Approx(2.0 * q[0]));
  const ChartPoint target{0.1, -0.2, 0.05, 0.3};
  const auto back = s.coordinates(s.momentum(target));
  for (std::size_t i = 0; i < 4; ++i) CHECK(back[i] == doctest::Approx(target[i]).epsilon(1e-12));
  CHECK_THROWS_AS(Chart::mass_shell(FourVector(1, 1, 0, 0), 1.0), HypothesisError);
}

TEST_CASE("scaled test functions") {
  const FourVector q(std::sqrt(1.25), 0.5, 0.0, 0.0);
  ScalingFamily f;
  f.chart = Chart::mass_shell(q, 1.0);
  f.m = 1;
  CHECK_NOTHROW(f.validate());

  // gamma = 1 gives psi chi itself
  const FourVector p = q + FourVector(0.02, 0.1, -0.1, 0.05);
  const auto c = f.chart.coordinates(p);
  const std::vector<double> rho{c[0]}, sigma{c[1], c[2], c[3]};
  CHECK(f(p, 1.0) == doctest::Approx(f.psi(rho) * f.chi(sigma)));

  // the chart integral is gamma-independent and equals the psi mass
  const double base = chart_integral(f, 1.0, 21);
  for (double g : {3.0, 17.0, 250.0}) CHECK(chart_integral(f, g, 21) == doctest::Approx(base).epsilon(1e-12));
  CHECK(base == doctest::Approx(f.rho_radius * ball_mass(1)).epsilon(2e-3));
  ScalingFamily point = f;
  point.chart = Chart::affine(q);
  point.m = 4;
  CHECK(chart_integral(point, 5.0, 21) == doctest::Approx(std::pow(f.rho_radius, 4) * ball_mass(4)).epsilon(5e-3));

  // support in rho shrinks like 1/gamma
  ScalingFamily flat = f;
  flat.chart = Chart::affine(q);
  for (double g : {1.0, 8.0, 64.0}) {
    CHECK(flat(q + FourVector(0.99 * flat.rho_radius / g, 0, 0, 0), g) > 0.0);
    CHECK(flat(q + FourVector(1.01 * flat.rho_radius / g, 0, 0, 0), g) == 0.0);
  }

  ScalingFamily wide = f;
  wide.sigma_radius = 2.0;
  CHECK_THROWS_AS(wide.validate(), HypothesisError);
  ScalingFamily bad = f;
  bad.m = 5;
  CHECK_THROWS_AS(bad.validate(), HypothesisError);
  const auto model = QuantumModel::mass_shell(8);
  CHECK_THROWS_AS(scaled_test(f, model, 0.5), std::invalid_argument);
}

TEST_CASE("degree estimator") {
  auto power = [](double c, double s) { return [c, s](double g) { return c * std::pow(g, s); }; };
  const auto e = estimate_degree(power(3.0, 2.5), grid);
  CHECK(e.degree == doctest::Approx(-2.5));
  CHECK(e.stable);
  CHECK(estimate_degree(power(1e6, 2.5), grid).degree == doctest::Approx(e.degree));
  CHECK(estimate_degree(power(1.0, 0.0), grid).degree == doctest::Approx(0.0));

  const auto under = estimate_degree([](double g) { return std::exp(-g); }, grid);
  CHECK(under.underflow);
  CHECK(std::isinf(under.degree));

  // a curve bending at the end is flagged
  const auto bend = estimate_degree([](double g) { return g < 30 ? 1.0 : std::pow(g / 30, 2); }, grid);
  CHECK_FALSE(bend.stable);

  const std::vector<double> short_grid{1, 2, 4, 8, 16};
  CHECK_THROWS(estimate_degree(power(1, 1), short_grid));
  const std::vector<double> uneven{1, 2, 4, 8, 16, 33};
  CHECK_THROWS(estimate_degree(power(1, 1), uneven));
}

TEST_CASE("delta combinations and homogeneous distributions") {
  const FourVector q(1.0, 0.0, 0.0, 0.0);
  for (int m = 1; m <= 4; ++m) {
    ScalingFamily f;
    f.chart = Chart::affine(q);
    f.m = m;
    const DeltaCombination delta{m, {{0, 1.0}}};
    CHECK(delta.analytic_degree() == -m);
    const auto e = estimate_degree(delta_evaluator(delta, f), grid);
    CHECK(std::abs(e.degree + m) < 0.1);
  }
  ScalingFamily f;
  f.chart = Chart::affine(q);
  f.m = 1;
  const DeltaCombination first{1, {{1, 2.0}}};
  CHECK(estimate_degree(delta_evaluator(first, f), grid).degree == doctest::Approx(-2.0).epsilon(1e-6));
  const DeltaCombination mixed{1, {{0, 5.0}, {2, -0.3}}};
  CHECK(std::abs(estimate_degree(delta_evaluator(mixed, f), grid).degree - mixed.analytic_degree()) < 0.1);
  const DeltaCombination third{2, {{3, 1.0}}};
  ScalingFamily f2 = f;
  f2.m = 2;
  CHECK(std::abs(estimate_degree(delta_evaluator(third, f2), grid).degree + 5.0) < 0.1);

  for (double a : {-0.5, 0.0, 0.5}) {
    const auto e = estimate_degree(homogeneous_evaluator(a, f), grid);
    CHECK(std::abs(e.degree - a) < 0.1);
    CHECK(e.stable);
  }
  CHECK(std::abs(estimate_degree(homogeneous_evaluator(-1.5, f2), grid).degree + 1.5) < 0.1);
  CHECK_THROWS_AS(homogeneous_evaluator(-1.0, f), HypothesisError);
}

TEST_CASE("lower bounds and classifier") {
  CHECK(degree_lower_bounds(4, std::nullopt, true) == -4.0);
  CHECK(degree_lower_bounds(1, 3.5, false) == -1.0);
  CHECK(degree_lower_bounds(2, 2.0, false) == -2.0);
  CHECK_THROWS_AS(degree_lower_bounds(2, 2.0, true), HypothesisError);
  CHECK_THROWS_AS(degree_lower_bounds(0, std::nullopt, false), HypothesisError);

  using S = AllowedSingularity;
  CHECK(classify_allowed_singularities(3.5) == std::vector<S>{{1, 0, false}, {4, 0, true}});
  CHECK(classify_allowed_singularities(1.8) == std::vector<S>{{1, 0, false}, {2, 0, false}, {4, 0, true}});
  CHECK(classify_allowed_singularities(0.9) ==
        std::vector<S>{{1, 0, false}, {1, 1, false}, {2, 0, false}, {3, 0, false}, {4, 0, true}});

  // every returned pair meets -m - l >= bound, every other pair misses it
  for (double kappa = 0.05; kappa < 6.0; kappa += 0.05) {
    const auto allowed = classify_allowed_singularities(kappa);
    for (int m = 1; m <= 4; ++m)
      for (int l = 0; l <= 3; ++l) {
        const bool listed = std::find(allowed.begin(), allowed.end(), S{m, l, false}) != allowed.end();
        CHECK(listed == (-m - l >= degree_lower_bounds(m, kappa, false) - 1e-12));
      }
  }
}

TEST_CASE("engineered models: shell and point transfers") {
  const auto model = share(QuantumModel::mass_shell(32));
  const auto b = shell_field(model, 1.0);
  const std::size_t s = state_with(*model, FourVector(0, 0.5, 0, 0));
  const FourVector q = model->spectrum()[s];

  ScalingFamily shell;
  shell.chart = Chart::mass_shell(q, 1.0);
  shell.m = 1;
  const auto e = estimate_degree(model_evaluator(b, shell), grid);
  CHECK(std::abs(e.degree + 1.0) < 0.1);
  CHECK(e.degree >= degree_lower_bounds(1, std::nullopt, false));

  // a second chart of the same surface: rho scaled, sigma mixed
  ScalingFamily other = shell;
  for (auto& v : other.chart.linear[0]) v *= 3.0;
  for (auto& a : other.chart.quadratic[0])
    for (auto& v : a) v *= 3.0;
  other.chart.linear[1] = {0.0, 1.0, 0.3, 0.0};
  const auto e2 = estimate_degree(model_evaluator(b, other), grid);
  CHECK(std::abs(e2.degree - e.degree) < 0.2);

  // the same field seen at a point: a single transfer gives -4
  ScalingFamily point;
  point.chart = Chart::affine(q);
  point.m = 4;
  const auto ep = estimate_degree(model_evaluator(b, point, EnergyWeight::plus(1.0, 1.0)), grid);
  CHECK(std::abs(ep.degree + 4.0) < 0.1);

  // off every transfer: zero response
  ScalingFamily off = point;
  off.chart = Chart::affine(q + FourVector(0.1, 0.1, 0.0, 0.0));
  CHECK(std::isinf(estimate_degree(model_evaluator(b, off), grid).degree));
}

TEST_CASE("smearing does not lower the degree") {
  const auto model = share(QuantumModel::mass_shell(32));
  const auto b = shell_field(model, 1.0);
  const FourVector q = model->spectrum()[state_with(*model, FourVector(0, 0.5, 0, 0))];
  ScalingFamily point;
  point.chart = Chart::affine(q);
  point.m = 4;

  const auto same = remark_monotonicity_check(b, DiscreteMeasure::dirac({}), point, grid);
  CHECK(same.pass);
  CHECK(same.smeared.degree == doctest::Approx(same.base.degree).epsilon(1e-12));

  std::vector<Atom> atoms;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j) atoms.push_back({FourVector(0.5 * i, 0.5 * j, 0, 0), std::exp(-0.1 * (i * i + j * j))});
  const auto smooth = remark_monotonicity_check(b, DiscreteMeasure(atoms), point, grid);
  CHECK(smooth.pass);

  // a.q = 0 exactly, so the two atoms cancel at the probed transfer
  const DiscreteMeasure cancel({{FourVector{}, 1.0}, {FourVector(q[1], q[0], 0, 0), -1.0}});
  const auto up = remark_monotonicity_check(b, cancel, point, grid);
  CHECK(up.pass);
  CHECK(up.smeared.degree > up.base.degree);

  ScalingFamily shell;
  shell.chart = Chart::mass_shell(q, 1.0);
  CHECK(remark_monotonicity_check(b, DiscreteMeasure(atoms), shell, grid).pass);
}
