#include <cmath>
#include <random>

#include "doctest.h"
#include "emt/spacetime.hpp"

using namespace emt;

namespace {

FourVector random_vector(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng), u(rng)};
}

DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g;
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < n; ++i) atoms.push_back({random_vector(rng, scale), {g(rng), g(rng)}});
  return DiscreteMeasure(std::move(atoms));
}

// Written out from the case formula, independent of d_kappa.
double envelope_oracle(const DiscreteMeasure& a, const DiscreteMeasure& b, double lambda, double kappa) {
  double s = 0.0;
  for (const auto& x : a.atoms())
    for (const auto& y : b.atoms()) {
      const double t = std::abs(x.x[0] - y.x[0]);
      const double r = std::hypot(x.x[1] - y.x[1], x.x[2] - y.x[2], x.x[3] - y.x[3]);
      const double d = (t * t - r * r >= 0.0) ? 1.0 : std::pow(lambda / (lambda + r - t), kappa);
      s += std::abs(x.w) * std::abs(y.w) * d;
    }
  return s;
}

}  // namespace

TEST_CASE("minkowski product") {
  CHECK(minkowski_dot({1, 0, 0, 0}, {1, 0, 0, 0}) == 1.0);
  CHECK(minkowski_dot({1, 1, 0, 0}, {1, 1, 0, 0}) == 0.0);
  CHECK(minkowski_dot({0, 1, 2, 3}, {0, 1, 2, 3}) == -14.0);
  CHECK(FourVector(1, 2, 2, 4).euclidean_norm() == doctest::Approx(5.0));
}

TEST_CASE("d_kappa cases") {
  const double lambda = 0.7;
  CHECK(d_kappa({1, 0, 0, 0}, {lambda, 0.3}) == 1.0);
  CHECK(d_kappa({1, 0, 0, 0}, {lambda, 5.0}) == 1.0);
  CHECK(d_kappa({0, lambda, 0, 0}, {lambda, 1.0}) == doctest::Approx(0.5));
  CHECK(d_kappa({0, 3 * lambda, 0, 0}, {lambda, 2.0}) == doctest::Approx(1.0 / 16.0));
  // lightlike vectors sit in the constant branch
  CHECK(d_kappa({2, 0, 2, 0}, {lambda, 2.0}) == 1.0);
  CHECK_THROWS_AS(EnvelopeParams({1.0, -1.0}).validate(), HypothesisError);
}

TEST_CASE("d_kappa is monotone and continuous across the lightcone") {
  const EnvelopeParams p{1.3, 1.7};
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    const double r = 2.0 + 0.05 * i;
    const double d = d_kappa({2.0, r, 0, 0}, p);
    CHECK(d <= prev);
    CHECK(d > 0.0);
    CHECK(d <= 1.0);
    prev = d;
  }
  CHECK(d_kappa({2.0, 2.0 + 1e-12, 0, 0}, p) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("envelope integral") {
  const EnvelopeParams p{1.0, 2.0};
  const auto origin = DiscreteMeasure::dirac({0, 0, 0, 0});
  CHECK(envelope_integral(origin, origin, p) == 1.0);
  CHECK(envelope_integral(origin, DiscreteMeasure::dirac({0, 3, 0, 0}), p) == doctest::Approx(1.0 / 16.0));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_measure(rng, 10, 5.0);
    const auto b = random_measure(rng, 10, 5.0);
    const double kappa = 0.5 + trial * 0.2;
    const EnvelopeParams q{0.8, kappa};
    CHECK(envelope_integral(a, b, q) == doctest::Approx(envelope_oracle(a, b, 0.8, kappa)).epsilon(1e-13));
    CHECK(envelope_integral(a, b, q) == doctest::Approx(envelope_integral(b, a, q)).epsilon(1e-13));
    const double tv = a.total_variation();
    CHECK(envelope_integral(a, a, q) <= tv * tv * (1 + 1e-14));
  }
}

TEST_CASE("envelope integral saturates total variation iff all separations are non-spacelike") {
  const EnvelopeParams p{1.0, 1.5};
  // atoms along the time axis: every separation timelike
  DiscreteMeasure timelike({{{0, 0, 0, 0}, {1, 0}}, {{2, 0.5, 0, 0}, {0, -2}}, {{5, 1, 1, 0}, {0.5, 0.5}}});
  const double tv = timelike.total_variation();
  CHECK(envelope_integral(timelike, timelike, p) == doctest::Approx(tv * tv));
  DiscreteMeasure spread({{{0, 0, 0, 0}, {1, 0}}, {{0, 4, 0, 0}, {1, 0}}});
  CHECK(envelope_integral(spread, spread, p) < 4.0);
}

TEST_CASE("measure fourier transform of a single atom") {
  const FourVector x{0.3, -1.0, 0.2, 2.0};
  const FourVector pvec{1.5, 0.1, -0.7, 0.4};
  const cd w{0.3, -0.8};
  const auto nu = DiscreteMeasure::dirac(x, w);
  const cd expected = w * std::exp(cd(0, minkowski_dot(pvec, x))) / (4 * M_PI * M_PI);
  CHECK(std::abs(nu.fourier(pvec) - expected) < 1e-15);
  // collapsing atoms to one point sums the weights
  DiscreteMeasure split({{x, w * 0.25}, {x, w * 0.75}});
  CHECK(std::abs(split.fourier(pvec) - expected) < 1e-15);
  CHECK(std::abs(nu.conjugate().fourier(-1.0 * pvec) - std::conj(expected)) < 1e-15);
}

TEST_CASE("boosts") {
  const FourVector x{0.3, -1.0, 0.2, 2.0};
  CHECK(boost(x, 0.0, 2) == x);
  const auto b = boost({1, 0, 0, 0}, 0.4, 1);
  CHECK(b[0] == doctest::Approx(std::cosh(0.4)));
  CHECK(b[1] == doctest::Approx(std::sinh(0.4)));
  CHECK(b[2] == 0.0);
  CHECK_THROWS(boost(x, 0.1, 0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xi(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const auto u = random_vector(rng, 3.0);
    const auto v = random_vector(rng, 3.0);
    const double r = xi(rng);
    const int axis = 1 + i % 3;
    const double before = u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3];
    const auto bu = boost(u, r, axis);
    const auto bv = boost(v, r, axis);
    const double after = bu[0] * bv[0] - bu[1] * bv[1] - bu[2] * bv[2] - bu[3] * bv[3];
    CHECK(std::abs(after - before) <= 1e-12 * std::max(1.0, std::abs(before)) * std::cosh(r) * std::cosh(r));
  }
}

TEST_CASE("covariance ratio is finite on a finite grid") {
  std::vector<FourVector> grid;
  for (int t = -4; t <= 4; ++t)
    for (int r = 0; r <= 12; ++r) grid.push_back({0.5 * t, 0.75 * r, 0.2 * r, 0});
  const EnvelopeParams p{1.0, 2.0};
  const double ratio = covariance_ratio(grid, p, 0.7, 1);
  CHECK(std::isfinite(ratio));
  CHECK(ratio >= 1.0);
  CHECK(covariance_ratio(grid, p, 0.0, 1) == doctest::Approx(1.0));
}
