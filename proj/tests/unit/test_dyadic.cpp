#include <cmath>
#include <random>

#include "doctest.h"
#include "emt/dyadic.hpp"

using namespace emt;

TEST_CASE("cutoff profile") {
  const Mollifier m{0.8};
  CHECK(m.eta(0.0) == 1.0);
  CHECK(m.eta(0.5 / 0.8) == 1.0);
  CHECK(m.eta(1.0 / 0.8) == 0.0);
  CHECK(m.eta(3.0) == 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const double w = u(rng);
    CHECK(m.eta(w) == m.eta(-w));
    CHECK(m.eta(w) >= 0.0);
    CHECK(m.eta(w) <= 1.0);
  }
  // nonincreasing in |w|
  double prev = 1.0;
  for (double w = 0.0; w < 1.5; w += 1e-3) {
    CHECK(m.eta(w) <= prev);
    prev = m.eta(w);
  }
  CHECK(Mollifier{1.0, false}.eta(0.0) == 0.0);
}

TEST_CASE("dyadic pieces: support and partial sums") {
  const double lambda = 1.3;
  const Mollifier m{lambda};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logw(-9.0, 1.0);
  for (int n = 0; n < 8; ++n) {
    CHECK(m.j(0.0, n) == 0.0);
    CHECK(m.j(-0.1, n) == 0.0);
    const double lo = 1.0 / (std::ldexp(1.0, n + 2) * lambda);
    const double hi = 1.0 / (std::ldexp(1.0, n) * lambda);
    for (int i = 0; i < 500; ++i) {
      const double w = std::pow(10.0, logw(rng));
      const double v = m.j(w, n);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (w < lo || w > hi) CHECK(v == 0.0);
    }
  }
  // sum_{n<N} j_n(w) = theta(w) [eta(w) - eta(2^N w)], summed term by term
  for (int N = 1; N <= 8; ++N) {
    for (int i = 0; i < 500; ++i) {
      const double w = (i % 2 ? 1.0 : -1.0) * std::pow(10.0, logw(rng));
      double sum = 0.0;
      for (int n = 0; n < N; ++n) sum += m.j(w, n);
      const double closed = w > 0 ? m.eta(w) - m.eta(std::ldexp(w, N)) : 0.0;
      CHECK(std::abs(sum - closed) < 1e-12);
    }
  }
}

TEST_CASE("filtered pieces have positive-frequency support") {
  const Mollifier m;
  const DyadicGrid grid{1 << 14, 0.5};
  const auto piece = filtered_piece(m, 1.5, 2, grid);
  const auto spec = fourier_transform(piece);
  double neg = 0.0, pos = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i)
    (spec.omega(i) < 0 ? neg : pos) = std::max(spec.omega(i) < 0 ? neg : pos, std::abs(spec.values[i]));
  CHECK(neg <= 1e-14 * pos);
}

TEST_CASE("telescoping identity") {
  const Mollifier m;
  SUBCASE("k = 1, N = 1 .. 8") {
    const auto rows = telescoping_sweep(m, 1.0, 8);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0].ratio == doctest::Approx(0.5).epsilon(2e-4));
    for (const auto& r : rows) {
      INFO("N=" << r.N << " ratio=" << r.ratio);
      CHECK(r.pass);
      CHECK(std::abs(r.ratio - std::pow(2.0, -r.N)) < 1e-4);
      CHECK(r.rescale_error < 1e-8);
    }
  }
  SUBCASE("k = 2, N = 3") {
    const auto r = telescoping_check(m, 2.0, 3);
    CHECK(std::abs(r.ratio - 1.0 / 64) < 1e-4);
    CHECK(r.rescale_error < 1e-8);
  }
  SUBCASE("window too short") {
    CHECK_THROWS_AS(telescoping_check(m, 1.0, 2, DyadicGrid{64, 0.5}), GridTooSmall);
  }
  SUBCASE("rejects k <= 0") { CHECK_THROWS_AS(telescoping_check(m, 0.0, 1), HypothesisError); }
}

TEST_CASE("tail of the filtered cutoff") {
  const Mollifier m;
  const DyadicGrid grid{1 << 16, 0.5};
  for (double k : {1.0, 1.5, 2.0}) {
    const auto eta = filtered_cutoff(m, k, grid);
    // far from the origin the sample is the pure power law, down to rounding
    for (std::size_t j : {std::size_t{100}, eta.size() / 2 - 4000, eta.size() / 2 + 4000, eta.size() - 100}) {
      const cd tail = filtered_cutoff_tail(k, eta.time(j));
      CHECK(std::abs(eta.samples[j] - tail) < 1e-6 * std::abs(tail) + 1e-15);
    }
  }
}

TEST_CASE("decay constant of the filtered cutoff") {
  const DyadicGrid grid{1 << 15, 0.5};
  const auto report = eta_k_decay_stability(Mollifier{1.0}, 1.0, 2, grid);
  REQUIRE(report.constants.size() == 3);
  CHECK(std::isfinite(report.constants[0]));
  CHECK(report.constants[0] > 0.0);
  CHECK(report.stable);
  CHECK(report.max_drift < 0.1);
  // eta' for 2 lambda is 2^{-(k+1)} eta(s/2), so sup |eta'| (2 lambda + |s|)^{k+1} is unchanged
  for (double k : {1.0, 1.7}) {
    const double c1 = eta_k_decay_fit(Mollifier{1.0}, k, grid);
    const double c2 = eta_k_decay_fit(Mollifier{2.0}, k, grid);
    CHECK(c2 == doctest::Approx(c1).epsilon(1e-9));
  }
  CHECK(eta_k_decay_fit(Mollifier{1.0, false}, 1.0, grid) == 0.0);
}
