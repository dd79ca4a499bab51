#include "emt/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace emt {

double FourVector::spatial_norm() const { return std::sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]); }

double FourVector::euclidean_norm() const { return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]); }

double minkowski_dot(const FourVector& x, const FourVector& y) {
  return x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
}

FourVector boost(const FourVector& x, double rapidity, int axis) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("boost axis must be 1, 2 or 3");
  const double ch = std::cosh(rapidity);
  const double sh = std::sinh(rapidity);
  FourVector y = x;
  y[0] = ch * x[0] + sh * x[axis];
  y[axis] = sh * x[0] + ch * x[axis];
  return y;
}

void EnvelopeParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw HypothesisError("envelope: lambda must be > 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw HypothesisError("envelope: kappa must be > 0");
}

double d_kappa(const FourVector& a, const EnvelopeParams& params) {
  // The lightcone itself belongs to the constant branch.
  if (minkowski_dot(a, a) >= 0.0) return 1.0;
  const double gap = a.spatial_norm() - std::abs(a[0]);
  return std::pow(params.lambda / (params.lambda + gap), params.kappa);
}

double DiscreteMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += std::abs(a.w);
  return s;
}

cd DiscreteMeasure::fourier(const FourVector& p) const {
  cd s = 0.0;
  for (const auto& a : atoms_) s += a.w * std::polar(1.0, minkowski_dot(p, a.x));
  return s / (4.0 * M_PI * M_PI);
}

DiscreteMeasure DiscreteMeasure::conjugate() const {
  auto out = atoms_;
  for (auto& a : out) a.w = std::conj(a.w);
  return DiscreteMeasure(std::move(out));
}

DiscreteMeasure DiscreteMeasure::translated(const FourVector& shift) const {
  auto out = atoms_;
  for (auto& a : out) a.x = a.x + shift;
  return DiscreteMeasure(std::move(out));
}

DiscreteMeasure DiscreteMeasure::dilated(double s) const {
  auto out = atoms_;
  for (auto& a : out) a.x = s * a.x;
  return DiscreteMeasure(std::move(out));
}

double envelope_integral(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2, const EnvelopeParams& params) {
  params.validate();
  double s = 0.0;
  for (const auto& a : nu1.atoms()) {
    const double wa = std::abs(a.w);
    if (wa == 0.0) continue;
    for (const auto& b : nu2.atoms()) s += wa * std::abs(b.w) * d_kappa(a.x - b.x, params);
  }
  return s;
}

double covariance_ratio(std::span<const FourVector> grid, const EnvelopeParams& params, double rapidity, int axis) {
  params.validate();
  double worst = 0.0;
  for (const auto& a : grid) worst = std::max(worst, d_kappa(boost(a, rapidity, axis), params) / d_kappa(a, params));
  return worst;
}

std::string to_string(const FourVector& x) {
  std::ostringstream os;
  os << '(' << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ')';
  return os.str();
}

}  // namespace emt
