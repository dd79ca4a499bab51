#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace emt {

using cd = std::complex<double>;

/// Raised when an operation is called outside the hypotheses it is valid for.
/// The message names the violated condition.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point of Minkowski space (or of momentum space). Index 0 is the time
/// component in the fixed global frame.
struct FourVector {
  std::array<double, 4> c{};

  constexpr FourVector() = default;
  constexpr FourVector(double x0, double x1, double x2, double x3) : c{x0, x1, x2, x3} {}

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  double spatial_norm() const;
  /// |x|^2 = |x^0|^2 + |x_vec|^2.
  double euclidean_norm() const;

  friend constexpr FourVector operator+(FourVector a, const FourVector& b) {
    for (std::size_t i = 0; i < 4; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend constexpr FourVector operator-(FourVector a, const FourVector& b) {
    for (std::size_t i = 0; i < 4; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr FourVector operator-(FourVector a) {
    for (auto& v : a.c) v = -v;
    return a;
  }
  friend constexpr FourVector operator*(double s, FourVector a) {
    for (auto& v : a.c) v *= s;
    return a;
  }
  friend constexpr bool operator==(const FourVector&, const FourVector&) = default;
};

/// Signature (+,-,-,-).
double minkowski_dot(const FourVector& x, const FourVector& y);

/// Lorentz boost with rapidity `rapidity` along spatial axis 1, 2 or 3.
FourVector boost(const FourVector& x, double rapidity, int axis);

struct EnvelopeParams {
  double lambda = 1.0;  // length scale
  double kappa = 1.0;   // spacelike decay exponent

  void validate() const;
};

/// Spacelike decay envelope: 1 on the closed lightcone (a.a >= 0),
/// lambda^kappa / (lambda + |a_vec| - |a^0|)^kappa outside.
double d_kappa(const FourVector& a, const EnvelopeParams& params);

struct Atom {
  FourVector x;
  cd w;
};

/// Finite complex measure represented by weighted atoms.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}

  static DiscreteMeasure dirac(const FourVector& x, cd w = 1.0) { return DiscreteMeasure({{x, w}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  /// |nu|(M) = sum |w_i|.
  double total_variation() const;

  /// (2 pi)^-2 sum_i w_i exp(i p.x_i), Minkowski pairing.
  cd fourier(const FourVector& p) const;

  /// Complex conjugate measure.
  DiscreteMeasure conjugate() const;
  DiscreteMeasure translated(const FourVector& a) const;
  /// Positions multiplied by `s`, weights untouched.
  DiscreteMeasure dilated(double s) const;

 private:
  std::vector<Atom> atoms_;
};

/// sum_{i,j} |w_i| |v_j| D_kappa(x_i - y_j).
double envelope_integral(const DiscreteMeasure& nu1, const DiscreteMeasure& nu2, const EnvelopeParams& params);

/// max over the grid of D(boost(a)) / D(a); a finite value is the numerical
/// counterpart of "the bound holds in every frame with another constant".
double covariance_ratio(std::span<const FourVector> grid, const EnvelopeParams& params, double rapidity, int axis);

std::string to_string(const FourVector& x);

}  // namespace emt
