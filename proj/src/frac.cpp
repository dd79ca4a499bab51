#include "emt/frac.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emt {

namespace detail {

void dft_inplace(std::vector<cd>& data, int exponent_sign) {
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  // FFTW_ESTIMATE keeps plans (and hence rounding) independent of timing.
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf,
                                    exponent_sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

}  // namespace detail

void Signal::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("signal needs at least two samples");
  if (!(dt > 0.0)) throw std::invalid_argument("signal spacing must be positive");
}

long frequency_index(std::size_t k, std::size_t n) {
  const auto kk = static_cast<long>(k);
  const auto nn = static_cast<long>(n);
  return 2 * kk < nn ? kk : kk - nn;
}

double Spectrum::d_omega() const { return 2.0 * M_PI / (static_cast<double>(values.size()) * dt); }

double Spectrum::omega(std::size_t k) const { return d_omega() * static_cast<double>(frequency_index(k, values.size())); }

Spectrum fourier_transform(const Signal& f) {
  f.validate();
  Spectrum s{f.t0, f.dt, f.samples};
  detail::dft_inplace(s.values, +1);
  const double scale = f.dt / (2.0 * M_PI);
  for (std::size_t k = 0; k < s.size(); ++k) s.values[k] *= scale * std::polar(1.0, s.omega(k) * f.t0);
  return s;
}

Signal inverse_transform(const Spectrum& s) {
  if (s.values.size() < 2 || !(s.dt > 0.0)) throw std::invalid_argument("spectrum grid is invalid");
  Signal f{s.t0, s.dt, s.values};
  for (std::size_t k = 0; k < f.size(); ++k) f.samples[k] *= std::polar(1.0, -s.omega(k) * s.t0);
  detail::dft_inplace(f.samples, -1);
  const double dw = s.d_omega();
  for (auto& v : f.samples) v *= dw;
  return f;
}

Spectrum fractional_filter(const Spectrum& s, double k, FrequencySign sign) {
  if (!(k > 0.0)) throw HypothesisError("fractional filter: order k must be > 0");
  const double sg = sign_value(sign);
  const cd phase = std::polar(1.0, -sg * k * M_PI / 2.0);
  Spectrum out = s;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double w = out.omega(i);
    if (sg * w > 0.0)
      out.values[i] *= phase * std::pow(std::abs(w), k);
    else
      out.values[i] = 0.0;
  }
  return out;
}

Signal fractional_part(const Signal& f, double k, FrequencySign sign) {
  return inverse_transform(fractional_filter(fourier_transform(f), k, sign));
}

std::pair<Signal, Signal> half_split(const Signal& f) {
  const Spectrum s = fourier_transform(f);
  Spectrum plus = s;
  Spectrum minus = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = s.omega(i);
    if (w <= 0.0) plus.values[i] = 0.0;
    if (w >= 0.0) minus.values[i] = 0.0;
  }
  return {inverse_transform(plus), inverse_transform(minus)};
}

cd kernel_tk(double k, FrequencySign sign, double s, double eps) {
  if (!(eps > 0.0)) throw HypothesisError("kernel T^k: regulator eps must be > 0");
  const double sg = sign_value(sign);
  const cd pref = cd(0.0, -sg) * std::polar(1.0, -sg * k * M_PI) * std::tgamma(k + 1.0) / (2.0 * M_PI);
  return pref * std::pow(cd(s, -sg * eps), -(k + 1.0));
}

std::vector<cd> convolve_kernel(const Signal& f, double k, FrequencySign sign, double eps, std::size_t stride) {
  if (stride == 0) stride = 1;
  std::vector<std::size_t> at;
  for (std::size_t j = 0; j < f.size(); j += stride) at.push_back(j);
  return convolve_kernel_at(f, k, sign, eps, at);
}

std::vector<cd> convolve_kernel_at(const Signal& f, double k, FrequencySign sign, double eps,
                                   std::span<const std::size_t> at) {
  f.validate();
  if (!(k > 0.0)) throw HypothesisError("kernel convolution: order k must be > 0");
  if (!(eps > 0.0)) throw HypothesisError("kernel convolution: regulator eps must be > 0");
  const double sg = sign_value(sign);
  const cd pref = cd(0.0, -sg) * std::polar(1.0, -sg * k * M_PI) * std::tgamma(k + 1.0) / (2.0 * M_PI);
  const std::size_t n = f.size();
  const double h = f.dt;
  const bool unit_order = std::abs(k - 1.0) < 1e-14;

  // Only cells touching the nonzero samples contribute.
  std::size_t lo = 0, hi = n;
  while (lo < n && f.samples[lo] == 0.0) ++lo;
  while (hi > lo && f.samples[hi - 1] == 0.0) --hi;
  if (lo > 0) --lo;
  if (hi < n) ++hi;

  // u_j = tau - s_j - i sg eps keeps a fixed nonzero imaginary part, so the
  // principal-branch antiderivatives never cross the cut.
  std::vector<cd> pow_mk(n), prim(n);
  std::vector<cd> out;
  out.reserve(at.size());
  for (const std::size_t jt : at) {
    if (jt >= n) throw std::out_of_range("kernel convolution: output index outside the grid");
    const double tau = f.time(jt);
    for (std::size_t j = lo; j < hi; ++j) {
      const cd u(tau - f.time(j), -sg * eps);
      const cd logu = std::log(u);
      pow_mk[j] = std::exp(-k * logu);
      prim[j] = unit_order ? logu : u * pow_mk[j] / (1.0 - k);
    }
    cd acc = 0.0;
    for (std::size_t j = lo; j + 1 < hi; ++j) {
      const cd fj = f.samples[j];
      const cd slope = (f.samples[j + 1] - fj) / h;
      if (fj == 0.0 && slope == 0.0) continue;
      const cd uj(tau - f.time(j), -sg * eps);
      // \int (a - s)^{-k-1} ds and \int (a - s)^{-k-1} (s - s_j) ds over the cell.
      const cd e0 = (pow_mk[j + 1] - pow_mk[j]) / k;
      const cd e1 = uj * e0 - (prim[j] - prim[j + 1]);
      acc += fj * e0 + slope * e1;
    }
    out.push_back(pref * acc);
  }
  return out;
}

Signal zero_pad(const Signal& f, std::size_t factor) {
  f.validate();
  if (factor <= 1) return f;
  const std::size_t n = f.size();
  const std::size_t total = n * factor;
  const std::size_t offset = (total - n) / 2;
  Signal out{f.t0 - static_cast<double>(offset) * f.dt, f.dt, std::vector<cd>(total, 0.0)};
  std::copy(f.samples.begin(), f.samples.end(), out.samples.begin() + static_cast<long>(offset));
  return out;
}

double edge_ratio(const Signal& f, std::size_t count) {
  double peak = 0.0;
  for (const auto& v : f.samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  count = std::min(count, f.size() / 2);
  double edge = 0.0;
  for (std::size_t j = 0; j < count; ++j)
    edge = std::max({edge, std::abs(f.samples[j]), std::abs(f.samples[f.size() - 1 - j])});
  return edge / peak;
}

double relative_l2(const std::vector<cd>& a, const std::vector<cd>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_l2: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace emt
