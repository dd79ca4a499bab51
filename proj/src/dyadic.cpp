#include "emt/dyadic.hpp"

#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>

namespace emt {

namespace {

double h(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// 1 for u <= 0, 0 for u >= 1.
double smooth_step_down(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double a = h(1.0 - u);
  return a / (a + h(u));
}

void check_order(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw HypothesisError("dyadic: order k must be > 0");
}

Spectrum empty_spectrum(const Mollifier& m, const DyadicGrid& grid) {
  if (!(m.lambda > 0.0)) throw HypothesisError("dyadic: lambda must be > 0");
  if (grid.n < 16 || !(grid.spacing_over_lambda > 0.0)) throw std::invalid_argument("dyadic: bad grid");
  const double ds = grid.spacing_over_lambda * m.lambda;
  return Spectrum{-0.5 * static_cast<double>(grid.n) * ds, ds, std::vector<cd>(grid.n, 0.0)};
}

Signal filtered(const Mollifier& m, double k, const DyadicGrid& grid, auto&& profile) {
  check_order(k);
  Spectrum s = empty_spectrum(m, grid);
  for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = profile(s.omega(i));
  return inverse_transform(fractional_filter(s, k, FrequencySign::Plus));
}

std::size_t centre_index(const Signal& f) { return f.size() / 2; }

}  // namespace

double Mollifier::eta(double w) const {
  if (!enabled) return 0.0;
  const double a = std::abs(w) * lambda;  // plateau a <= 1/2, support a <= 1
  return smooth_step_down(2.0 * a - 1.0);
}

double Mollifier::j(double w, int n) const {
  if (n < 0) throw std::invalid_argument("dyadic piece index must be >= 0");
  if (!(w > 0.0)) return 0.0;
  const double s = std::ldexp(w, n);
  return eta(s) - eta(2.0 * s);
}

cd filtered_cutoff_tail(double k, double s) {
  return std::polar(1.0, -k * M_PI / 2) * std::tgamma(k + 1.0) * std::pow(cd(0.0, s), -(k + 1.0));
}

Signal filtered_cutoff(const Mollifier& m, double k, const DyadicGrid& grid) {
  Signal f = filtered(m, k, grid, [&](double w) { return m.eta(w); });
  if (!m.enabled) return f;
  const double period = static_cast<double>(f.size()) * f.dt;
  const cd g = std::tgamma(k + 1.0) * std::polar(1.0, -k * M_PI / 2) * std::pow(period, -(k + 1.0));
  const cd right = std::polar(1.0, -M_PI * (k + 1.0) / 2);  // images at s + mL > 0
  const cd left = std::polar(1.0, M_PI * (k + 1.0) / 2);    // images at s - mL < 0
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double u = f.time(j) / period;
    f.samples[j] -= g * (right * gsl_sf_hzeta(k + 1.0, 1.0 + u) + left * gsl_sf_hzeta(k + 1.0, 1.0 - u));
  }
  // Edge samples must match the tail to 1e-3, above the transform's rounding floor.
  double peak = 0.0;
  for (const auto& v : f.samples) peak = std::max(peak, std::abs(v));
  for (std::size_t j : {std::size_t{0}, f.size() - 1}) {
    const cd tail = filtered_cutoff_tail(k, f.time(j));
    if (std::abs(f.samples[j] - tail) > 1e-3 * std::abs(tail) + 1e-13 * peak)
      throw GridTooSmall("dyadic: window too short, filtered cutoff has not reached its asymptotic tail");
  }
  return f;
}

Signal filtered_piece(const Mollifier& m, double k, int n, const DyadicGrid& grid) {
  return filtered(m, k, grid, [&](double w) { return m.j(w, n); });
}

double l1_with_tail(const Signal& f, double k) {
  double s = 0.0;
  for (const auto& v : f.samples) s += std::abs(v);
  s *= f.dt;
  const double half = 0.5 * static_cast<double>(f.size()) * f.dt;
  return s + 2.0 * std::tgamma(k + 1.0) * std::pow(half, -k) / k;
}

double filtered_cutoff_l1(const Mollifier& m, double k, const DyadicGrid& grid) {
  if (!m.enabled) return 0.0;
  return l1_with_tail(filtered_cutoff(m, k, grid), k);
}

std::vector<TelescopingRow> telescoping_sweep(const Mollifier& m, double k, int n_max, const DyadicGrid& grid,
                                              double tolerance) {
  check_order(k);
  if (n_max < 1) throw std::invalid_argument("telescoping: N must be >= 1");
  if (!m.enabled) throw HypothesisError("telescoping: the cutoff profile is disabled");
  const Signal eta = filtered_cutoff(m, k, grid);
  const double eta_l1 = l1_with_tail(eta, k);
  const std::size_t c = centre_index(eta);

  Signal residual = eta;
  std::vector<TelescopingRow> rows;
  for (int n = 0; n < n_max; ++n) {
    const Signal piece = filtered_piece(m, k, n, grid);
    for (std::size_t j = 0; j < residual.size(); ++j) residual.samples[j] -= piece.samples[j];

    TelescopingRow row;
    row.k = k;
    row.N = n + 1;
    row.ratio = l1_with_tail(residual, k) / eta_l1;
    row.expected = std::pow(2.0, -row.N * k);
    row.tolerance = tolerance;
    row.pass = std::abs(row.ratio - row.expected) < tolerance;

    // residual(s) against the rescaled cutoff on the sub-grid s = 2^N i ds
    const std::size_t step = std::size_t{1} << row.N;
    const double scale = std::pow(2.0, -row.N * (k + 1.0));
    double peak = 0.0, err = 0.0;
    for (const auto& v : residual.samples) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; c + i * step < residual.size(); ++i) {
      err = std::max(err, std::abs(residual.samples[c + i * step] - scale * eta.samples[c + i]));
      err = std::max(err, std::abs(residual.samples[c - i * step] - scale * eta.samples[c - i]));
    }
    row.rescale_error = peak > 0.0 ? err / peak : err;
    rows.push_back(row);
  }
  return rows;
}

TelescopingRow telescoping_check(const Mollifier& m, double k, int N, const DyadicGrid& grid, double tolerance) {
  return telescoping_sweep(m, k, N, grid, tolerance).back();
}

double eta_k_decay_fit(const Mollifier& m, double k, const DyadicGrid& grid) {
  if (!m.enabled) return 0.0;
  const Signal eta = filtered_cutoff(m, k, grid);
  double c = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j)
    c = std::max(c, std::abs(eta.samples[j]) * std::pow(m.lambda + std::abs(eta.time(j)), 1.0 + k));
  return c;
}

DecayFitReport eta_k_decay_stability(const Mollifier& m, double k, int doublings, const DyadicGrid& grid) {
  DecayFitReport r;
  DyadicGrid g = grid;
  for (int i = 0; i <= doublings; ++i, g.n *= 2) r.constants.push_back(eta_k_decay_fit(m, k, g));
  for (std::size_t i = 1; i < r.constants.size(); ++i) {
    const double prev = r.constants[i - 1];
    const double drift = prev > 0.0 ? std::abs(r.constants[i] - prev) / prev : std::abs(r.constants[i]);
    r.max_drift = std::max(r.max_drift, drift);
  }
  r.stable = r.max_drift < 0.1;
  return r;
}

}  // namespace emt
