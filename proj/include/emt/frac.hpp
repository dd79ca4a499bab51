#pragma once

// Fractional time derivatives split into positive and negative frequency
// parts, on uniformly sampled signals.
//
// Fourier convention:  f~(w) = (1/2pi) \int e^{i w t} f(t) dt,
//                      f(t)  = \int e^{-i w t} f~(w) dw.
// On a grid of N samples t_j = t0 + j dt the discrete pair is
//   f~_k = (dt / 2pi) sum_j e^{i w_k t_j} f_j,   f_j = dw sum_k e^{-i w_k t_j} f~_k,
// with w_k = 2pi kk / (N dt), kk = k for k < N/2 and kk = k - N otherwise
// (so the Nyquist bin of an even grid counts as a negative frequency).

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "emt/spacetime.hpp"

namespace emt {

enum class FrequencySign { Plus, Minus };

inline double sign_value(FrequencySign s) { return s == FrequencySign::Plus ? 1.0 : -1.0; }

struct Signal {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<cd> samples;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
  void validate() const;
};

struct Spectrum {
  double t0 = 0.0;  // time grid this spectrum pairs with
  double dt = 1.0;
  std::vector<cd> values;

  std::size_t size() const { return values.size(); }
  double omega(std::size_t k) const;
  double d_omega() const;
};

/// Signed integer frequency index of bin k on an n-point grid.
long frequency_index(std::size_t k, std::size_t n);

Spectrum fourier_transform(const Signal& f);
Signal inverse_transform(const Spectrum& s);

/// Multiplies by e^{-+ i k pi/2} theta(+-w) |w|^k. The w = 0 bin is zeroed.
Spectrum fractional_filter(const Spectrum& s, double k, FrequencySign sign);

/// f^k_+ or f^k_- computed through the transform.
Signal fractional_part(const Signal& f, double k, FrequencySign sign);

/// k -> 0 split: theta(w) f~ and theta(-w) f~; the w = 0 bin goes to neither.
std::pair<Signal, Signal> half_split(const Signal& f);

/// T^k_+-(s) = -+ i e^{-+ i k pi} Gamma(k+1) / (2 pi (s -+ i eps)^{k+1}),
/// principal branch.
cd kernel_tk(double k, FrequencySign sign, double s, double eps);

/// Direct evaluation of \int T^k_+-(tau - s) f(s) ds at the output samples
/// j = 0, stride, 2 stride, ... . The signal is treated as its piecewise
/// linear interpolant (zero outside the grid) and each cell is integrated
/// against the kernel in closed form, so the kernel needs no resolution.
std::vector<cd> convolve_kernel(const Signal& f, double k, FrequencySign sign, double eps, std::size_t stride = 1);

/// Same, at the listed output sample indices.
std::vector<cd> convolve_kernel_at(const Signal& f, double k, FrequencySign sign, double eps,
                                   std::span<const std::size_t> at);

/// Embeds the signal in a zero-padded grid `factor` times as long, centred
/// on the original support.
Signal zero_pad(const Signal& f, std::size_t factor);

/// Largest |f| among the `count` samples at each end of the grid, relative to max |f|.
double edge_ratio(const Signal& f, std::size_t count = 4);

/// Relative L2 distance ||a - b|| / ||b|| over aligned sample vectors.
double relative_l2(const std::vector<cd>& a, const std::vector<cd>& b);

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

namespace detail {
/// Unnormalised in-place DFT; `exponent_sign` is the sign of the exponent.
void dft_inplace(std::vector<cd>& data, int exponent_sign);
}  // namespace detail

}  // namespace emt
