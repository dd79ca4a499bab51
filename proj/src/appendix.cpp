#include "emt/appendix.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "emt/rng.hpp"

namespace emt {

namespace {

long signed_index(std::size_t k, std::size_t n) {
  return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

double binomial(int a, int j) {
  double r = 1.0;
  for (int i = 1; i <= j; ++i) r = r * (a - j + i) / i;
  return r;
}

double norm_s(std::span<const double> magnitudes, std::span<const double> mu, double s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < magnitudes.size(); ++i) sum += mu[i] * std::pow(magnitudes[i], s);
  return std::pow(sum, 1.0 / s);
}

}  // namespace

double DecayGrid::period() const { return 2.0 * std::numbers::pi / spacing; }

DecayGrid DecayGrid::doubled() const { return {n, 2 * points, spacing / 2.0}; }

DecayResult fourier_decay_check(const std::function<double(std::span<const double>)>& f, double gamma,
                                double lambda, const DecayGrid& grid, std::uint64_t seed, int spot_checks) {
  if (grid.n < 1 || grid.n > 3) throw HypothesisError("decay check supports n = 1, 2, 3");
  if (grid.points < 8 || grid.points % 2 != 0) throw HypothesisError("decay grid needs an even number of points >= 8");
  if (!(grid.spacing > 0.0)) throw HypothesisError("decay grid spacing must be positive");
  if (!(lambda > 0.0)) throw HypothesisError("lambda must be positive");
  if (!(gamma > -grid.n)) throw HypothesisError("gamma must exceed -n");

  const int n = grid.n;
  const std::size_t N = grid.points;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= N;

  std::vector<cd> data(total);
  std::vector<std::size_t> idx(n);
  std::vector<double> p(n);
  double peak = 0.0, edge = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    bool origin = true, shell = false;
    for (int i = n - 1; i >= 0; --i) {
      idx[i] = rest % N;
      rest /= N;
      p[i] = (static_cast<double>(idx[i]) - static_cast<double>(N / 2)) * grid.spacing;
      origin = origin && idx[i] == N / 2;
      shell = shell || idx[i] == 0 || idx[i] == N - 1;
    }
    double v = origin ? 0.0 : f(p);
    if (!std::isfinite(v)) throw HypothesisError("F is not finite on the grid");
    data[flat] = v;
    peak = std::max(peak, std::abs(v));
    if (shell) edge = std::max(edge, std::abs(v));
  }

  std::vector<int> dims(n, static_cast<int>(N));
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  DecayResult out;
  out.edge_mass = peak > 0.0 ? edge / peak : 0.0;
  out.aliased = out.edge_mass > 1e-10;

  const double dx = grid.period() / static_cast<double>(N);
  const double reach = grid.period() / 64.0;
  const double measure = std::pow(grid.spacing, n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double r2 = 0.0;
    for (int i = n - 1; i >= 0; --i) {
      long kk = signed_index(rest % N, N);
      rest /= N;
      r2 += static_cast<double>(kk * kk) * dx * dx;
    }
    double r = std::sqrt(r2);
    if (r > reach) continue;
    // The grid offset only contributes a sign (-1)^kk.
    double value = std::abs(data[flat]) * measure;
    double weighted = value * std::pow(lambda + r, n + gamma);
    if (weighted > out.c) {
      out.c = weighted;
      out.argmax = r;
    }
  }

  auto rng = stream(seed, "decay-spot");
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::uniform_int_distribution<int> axis(0, n - 1);
  const int top = static_cast<int>(std::floor(gamma + n + 1));
  out.hypothesis_ok = true;
  for (int s = 0; s < spot_checks; ++s) {
    std::vector<double> dir(n);
    double len = 0.0;
    while (len < 1e-6) {
      len = 0.0;
      for (auto& d : dir) {
        d = normal(rng);
        len += d * d;
      }
      len = std::sqrt(len);
    }
    double radius = std::exp(std::log(1e-2) * unit(rng)) / lambda;
    for (auto& d : dir) d *= radius / len;
    int ax = axis(rng);
    double h = 0.05 * radius;
    for (int a = 0; a <= std::max(top, 0); ++a) {
      double sum = 0.0;
      std::vector<double> q(dir);
      for (int j = 0; j <= a; ++j) {
        q[ax] = dir[ax] + (0.5 * a - j) * h;
        sum += ((j % 2) ? -1.0 : 1.0) * binomial(a, j) * f(q);
      }
      double derivative = std::abs(sum) / std::pow(h, a);
      double ratio = derivative / std::pow(radius, gamma - a);
      if (!std::isfinite(ratio)) out.hypothesis_ok = false;
      else out.hypothesis_ratio = std::max(out.hypothesis_ratio, ratio);
    }
  }
  return out;
}

DecayRefinement decay_refinement(const std::function<double(std::span<const double>)>& f, double gamma,
                                 double lambda, const DecayGrid& grid, int doublings, std::uint64_t seed) {
  DecayRefinement out;
  DecayGrid g = grid;
  for (int i = 0; i <= doublings; ++i) {
    out.results.push_back(fourier_decay_check(f, gamma, lambda, g, seed));
    g = g.doubled();
  }
  const double c0 = out.results.front().c;
  for (const auto& r : out.results) {
    double drift = c0 > 0.0 ? std::abs(r.c / c0 - 1.0) : (r.c > 0.0 ? INFINITY : 0.0);
    out.max_drift = std::max(out.max_drift, drift);
  }
  return out;
}

std::function<double(std::span<const double>)> root_gaussian_family(double lambda) {
  return [lambda](std::span<const double> p) {
    double r2 = 0.0;
    for (double v : p) r2 += v * v;
    return std::pow(r2, 0.25) * std::exp(-lambda * lambda * r2);
  };
}

InequalityResult interpolation_check(std::span<const cd> f, std::span<const double> h,
                                     std::span<const double> mu, double s, double eps) {
  if (f.size() != h.size() || f.size() != mu.size()) throw HypothesisError("f, h and mu must have equal length");
  if (!(s > 0.0) || !std::isfinite(s)) throw HypothesisError("s must lie in (0, inf)");
  if (!(eps >= 0.0 && eps <= 1.0)) throw HypothesisError("eps must lie in [0, 1]");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] >= 0.0)) throw HypothesisError("h must be nonnegative");
    if (!(mu[i] >= 0.0)) throw HypothesisError("weights must be nonnegative");
  }
  std::vector<double> af(f.size()), ahf(f.size()), aw(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    af[i] = std::abs(f[i]);
    ahf[i] = h[i] * af[i];
    aw[i] = (eps == 0.0 ? 1.0 : std::pow(h[i], eps)) * af[i];
  }
  InequalityResult out;
  out.lhs = norm_s(aw, mu, s);
  out.rhs = std::pow(norm_s(af, mu, s), 1.0 - eps) * std::pow(norm_s(ahf, mu, s), eps);
  out.holds = out.lhs <= out.rhs + appendix_slack;
  return out;
}

double LineMeasure::total() const {
  double t = 0.0;
  for (const auto& [x, w] : atoms) t += w;
  return t;
}

double LineMeasure::integrate(const std::function<double(double)>& f) const {
  double t = 0.0;
  for (const auto& [x, w] : atoms) t += w * f(x);
  return t;
}

DominancePair make_dominance_pair(LineMeasure first, LineMeasure second, double slack) {
  std::vector<double> xs;
  for (const auto* m : {&first, &second}) {
    for (const auto& [x, w] : m->atoms) {
      if (!(w >= 0.0)) throw HypothesisError("atom weights must be nonnegative");
      if (!std::isfinite(x)) throw HypothesisError("atom positions must be finite");
      xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> probes(xs);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) probes.push_back(0.5 * (xs[i] + xs[i + 1]));

  auto cdf = [](const LineMeasure& m, double a) {
    double t = 0.0;
    for (const auto& [x, w] : m.atoms)
      if (x <= a) t += w;
    return t;
  };
  DominancePair out{std::move(first), std::move(second), true};
  for (double a : probes)
    if (cdf(out.first, a) > cdf(out.second, a) + slack) out.dominated = false;
  return out;
}

DominanceResult dominance_integral_check(const DominancePair& pair, const std::function<double(double)>& f,
                                         int step_levels) {
  if (!pair.dominated) throw HypothesisError("first measure is not dominated by the second");
  std::vector<double> xs;
  for (const auto* m : {&pair.first, &pair.second})
    for (const auto& [x, w] : m->atoms) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  double top = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double v = f(xs[i]);
    if (!(v >= 0.0)) throw HypothesisError("f must be nonnegative");
    if (i > 0 && v > f(xs[i - 1])) throw HypothesisError("f must be nonincreasing");
    top = std::max(top, v);
  }

  DominanceResult out;
  out.integrals.lhs = pair.first.integrate(f);
  out.integrals.rhs = pair.second.integrate(f);
  out.integrals.holds = out.integrals.lhs <= out.integrals.rhs + appendix_slack;

  out.step_oracle_ok = true;
  double prev1 = 0.0, prev2 = 0.0;
  for (int level = 1; level <= step_levels; ++level) {
    const double scale = std::ldexp(1.0, level);
    auto step = [&](double x) { return std::min(std::floor(scale * f(x)), scale * scale) / scale; };
    double i1 = pair.first.integrate(step);
    double i2 = pair.second.integrate(step);
    if (i1 < prev1 || i2 < prev2) out.step_oracle_ok = false;
    if (i1 > out.integrals.lhs || i2 > out.integrals.rhs) out.step_oracle_ok = false;
    if (i1 > i2 + appendix_slack) out.step_oracle_ok = false;
    prev1 = i1;
    prev2 = i2;
  }
  const double resolution = std::ldexp(1.0, -step_levels);
  if (top < 1.0 / resolution) {
    if (out.integrals.lhs - prev1 > resolution * pair.first.total() + appendix_slack) out.step_oracle_ok = false;
    if (out.integrals.rhs - prev2 > resolution * pair.second.total() + appendix_slack) out.step_oracle_ok = false;
  }
  return out;
}

InterpolationInstance random_interpolation_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_real_distribution<double> unit;
  std::normal_distribution<double> normal;
  InterpolationInstance inst;
  int n = size(rng);
  for (int i = 0; i < n; ++i) {
    cd v(normal(rng), normal(rng));
    if (unit(rng) < 0.1) v = 0.0;
    inst.f.push_back(v);
    inst.h.push_back(unit(rng) < 0.1 ? 0.0 : std::exp(normal(rng)));
    inst.mu.push_back(1.0 - unit(rng));
  }
  inst.s = std::exp(std::log(0.25) + unit(rng) * std::log(32.0));
  double pick = unit(rng);
  inst.eps = pick < 0.05 ? 0.0 : pick < 0.1 ? 1.0 : unit(rng);
  return inst;
}

double StepFunction::operator()(double x) const {
  auto i = std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin();
  return values[static_cast<std::size_t>(i)];
}

DominanceInstance random_dominance_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> atoms(2, 12), pieces(1, 3), breaks(1, 8);
  std::uniform_real_distribution<double> unit;
  LineMeasure second, first;
  int k = atoms(rng);
  for (int i = 0; i < k; ++i) {
    double x = -5.0 + 10.0 * unit(rng);
    double w = 1.0 - unit(rng);
    second.atoms.emplace_back(x, w);
    // Split the atom; every piece but the first moves right.
    int parts = pieces(rng);
    double left = w;
    for (int j = 0; j < parts; ++j) {
      double share = j + 1 == parts ? left : left * unit(rng);
      left -= share;
      double shift = j == 0 && unit(rng) < 0.5 ? 0.0 : 3.0 * (1.0 - unit(rng));
      if (unit(rng) < 0.1) share *= unit(rng);  // occasionally drop mass
      first.atoms.emplace_back(x + shift, share);
    }
  }
  DominanceInstance inst;
  inst.pair = make_dominance_pair(std::move(first), std::move(second));

  int b = breaks(rng);
  for (int i = 0; i < b; ++i) inst.f.breaks.push_back(-6.0 + 14.0 * unit(rng));
  std::sort(inst.f.breaks.begin(), inst.f.breaks.end());
  double v = 5.0 * unit(rng);
  inst.f.values.push_back(v);
  for (int i = 0; i < b; ++i) {
    v = std::max(0.0, v - 2.0 * unit(rng));
    inst.f.values.push_back(v);
  }
  return inst;
}

}  // namespace emt
