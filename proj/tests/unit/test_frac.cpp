#include <cmath>
#include <random>

#include "doctest.h"
#include "emt/frac.hpp"

using namespace emt;

namespace {

Signal sampled(double t0, double dt, std::size_t n, auto&& fn) {
  Signal s{t0, dt, std::vector<cd>(n)};
  for (std::size_t j = 0; j < n; ++j) s.samples[j] = fn(s.time(j));
  return s;
}

double max_abs(const std::vector<cd>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("round trip on a band-limited signal") {
  const auto f = sampled(-20.0, 40.0 / 1024, 1024, [](double t) { return cd(std::exp(-t * t / 2), std::sin(t) * std::exp(-t * t / 4)); });
  const auto back = inverse_transform(fourier_transform(f));
  CHECK(relative_l2(back.samples, f.samples) < 1e-10);
  CHECK(back.t0 == f.t0);
}

TEST_CASE("transform of a Gaussian matches the continuum convention") {
  // f(t) = exp(-t^2/2) -> f~(w) = exp(-w^2/2) / sqrt(2 pi)
  const auto f = sampled(-20.0, 40.0 / 512, 512, [](double t) { return cd(std::exp(-t * t / 2)); });
  const auto s = fourier_transform(f);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double w = s.omega(k);
    CHECK(std::abs(s.values[k] - std::exp(-w * w / 2) / std::sqrt(2 * M_PI)) < 1e-13);
  }
}

TEST_CASE("pure exponential lands in the minus part") {
  const std::size_t n = 256;
  const double period = 2 * M_PI;
  const double dt = period / n;
  const double w0 = 5.0;  // integer multiple of 2 pi / period
  const auto f = sampled(0.0, dt, n, [&](double t) { return std::polar(1.0, w0 * t); });
  const auto plus = fractional_part(f, 1.0, FrequencySign::Plus);
  const auto minus = fractional_part(f, 1.0, FrequencySign::Minus);
  CHECK(max_abs(plus.samples) < 1e-12);
  for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(minus.samples[j] - cd(0, w0) * f.samples[j]) < 1e-11);

  const auto [p0, m0] = half_split(f);
  CHECK(max_abs(p0.samples) < 1e-12);
  CHECK(relative_l2(m0.samples, f.samples) < 1e-12);
}

TEST_CASE("integer orders reproduce derivatives") {
  const double dt = 40.0 / 2048;
  const auto f = sampled(-20.0, dt, 2048, [](double t) { return cd(std::exp(-t * t / 2)); });
  const auto d1 = sampled(-20.0, dt, 2048, [](double t) { return cd(-t * std::exp(-t * t / 2)); });
  const auto d2 = sampled(-20.0, dt, 2048, [](double t) { return cd((t * t - 1) * std::exp(-t * t / 2)); });
  for (int order = 1; order <= 2; ++order) {
    const auto plus = fractional_part(f, order, FrequencySign::Plus);
    const auto minus = fractional_part(f, order, FrequencySign::Minus);
    std::vector<cd> sum(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) sum[j] = plus.samples[j] + minus.samples[j];
    CHECK(relative_l2(sum, (order == 1 ? d1 : d2).samples) < 1e-8);
  }
}

TEST_CASE("filter properties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const std::size_t n = 512;
  const double dt = 30.0 / n;
  // smooth random combination of shifted Gaussians
  std::vector<std::pair<double, cd>> bumps;
  for (int i = 0; i < 6; ++i) bumps.push_back({2.0 * g(rng), {g(rng), g(rng)}});
  const auto f = sampled(-15.0, dt, n, [&](double t) {
    cd v = 0.0;
    for (const auto& [c, a] : bumps) v += a * std::exp(-(t - c) * (t - c));
    return v;
  });
  const auto spec = fourier_transform(f);

  SUBCASE("support stays on the kept half-line") {
    for (double k : {0.3, 1.0, 2.5}) {
      const auto plus = fractional_filter(spec, k, FrequencySign::Plus);
      const auto minus = fractional_filter(spec, k, FrequencySign::Minus);
      for (std::size_t i = 0; i < spec.size(); ++i) {
        const double w = spec.omega(i);
        if (w <= 0) CHECK(plus.values[i] == 0.0);
        if (w >= 0) CHECK(minus.values[i] == 0.0);
        if (w > 0) CHECK(std::abs(plus.values[i]) == doctest::Approx(std::pow(w, k) * std::abs(spec.values[i])));
      }
    }
  }
  SUBCASE("composition adds orders") {
    for (auto sign : {FrequencySign::Plus, FrequencySign::Minus}) {
      const auto twice = fractional_filter(fractional_filter(spec, 0.7, sign), 1.1, sign);
      const auto once = fractional_filter(spec, 1.8, sign);
      double err = 0, ref = 0;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        err = std::max(err, std::abs(twice.values[i] - once.values[i]));
        ref = std::max(ref, std::abs(once.values[i]));
      }
      CHECK(err <= 1e-10 * ref);
    }
  }
  SUBCASE("filtering commutes with grid translation") {
    const std::size_t shift = 37;
    Signal moved = f;
    for (std::size_t j = 0; j < n; ++j) moved.samples[(j + shift) % n] = f.samples[j];
    const auto a = fractional_part(moved, 1.3, FrequencySign::Plus);
    const auto b = fractional_part(f, 1.3, FrequencySign::Plus);
    std::vector<cd> b_moved(n);
    for (std::size_t j = 0; j < n; ++j) b_moved[(j + shift) % n] = b.samples[j];
    CHECK(relative_l2(a.samples, b_moved) < 1e-12);
  }
  SUBCASE("zero signal") {
    Signal zero{0.0, 0.1, std::vector<cd>(64, 0.0)};
    CHECK(max_abs(fractional_part(zero, 0.4, FrequencySign::Minus).samples) == 0.0);
  }
  SUBCASE("k must be positive") {
    CHECK_THROWS_AS(fractional_filter(spec, 0.0, FrequencySign::Plus), HypothesisError);
    CHECK_THROWS_AS(fractional_filter(spec, -1.0, FrequencySign::Minus), HypothesisError);
  }
  SUBCASE("half split reconstructs up to the mean") {
    const auto [plus, minus] = half_split(f);
    cd mean = 0.0;
    for (const auto& v : f.samples) mean += v;
    mean /= static_cast<double>(n);
    std::vector<cd> sum(n), target(n);
    for (std::size_t j = 0; j < n; ++j) {
      sum[j] = plus.samples[j] + minus.samples[j];
      target[j] = f.samples[j] - mean;
    }
    CHECK(relative_l2(sum, target) < 1e-10);
  }
}

TEST_CASE("half split of a real even signal") {
  const std::size_t n = 256;
  const double dt = 24.0 / n;
  const auto f = sampled(-12.0, dt, n, [](double t) { return cd(std::exp(-t * t / 3) * std::cos(t)); });
  const auto [plus, minus] = half_split(f);
  for (std::size_t j = 1; j < n; ++j) {
    const std::size_t r = n - j;  // reflection t -> -t on the symmetric grid
    CHECK(std::abs(minus.samples[j] - std::conj(plus.samples[j])) < 1e-12);
    CHECK(std::abs(minus.samples[j] - plus.samples[r]) < 1e-12);
  }
}

TEST_CASE("kernel T^k") {
  for (double k : {0.5, 1.0, 2.3}) {
    for (auto sign : {FrequencySign::Plus, FrequencySign::Minus}) {
      for (double s : {0.01, 0.3, 4.0, 100.0})
        CHECK(std::abs(kernel_tk(k, sign, s, 0.05)) == doctest::Approx(std::abs(kernel_tk(k, sign, -s, 0.05))));
    }
  }
  // k = 1 tail falls off like |s|^-2: fit the log-log slope far from the regulator
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (double s = 1e2; s <= 1e5; s *= 1.5) {
    const double x = std::log(s), y = std::log(std::abs(kernel_tk(1.0, FrequencySign::Plus, s, 1e-3)));
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK_THROWS_AS(kernel_tk(1.0, FrequencySign::Plus, 1.0, 0.0), HypothesisError);
}

TEST_CASE("direct kernel convolution converges to the frequency filter") {
  // Gaussian truncated to [-9, 9] on a 256-wide grid; the filtered signal
  // only decays like |t|^{-1-k}, so the transform route is compared away from
  // the period edges where its periodic images are negligible.
  const std::size_t n = 1 << 20;
  const double width = 256.0;
  const double dt = width / n;
  const auto f = sampled(-width / 2, dt, n, [](double t) { return std::abs(t) <= 9.0 ? cd(std::exp(-t * t / 2)) : cd(0.0); });
  std::vector<std::size_t> at;
  for (std::size_t j = 0; j < n; j += 1024)
    if (std::abs(f.time(j)) <= 32.0) at.push_back(j);
  for (auto sign : {FrequencySign::Plus, FrequencySign::Minus}) {
    for (double k : {1.0, 1.5}) {
      const auto direct = convolve_kernel_at(f, k, sign, dt, at);
      const auto filtered = fractional_part(f, k, sign);
      std::vector<cd> reference;
      for (auto j : at) reference.push_back(filtered.samples[j]);
      const double err = relative_l2(direct, reference);
      INFO("k=" << k << " err=" << err);
      CHECK(err < 1e-3);
    }
  }
}
