#pragma once

// Finite-dimensional models: commuting diagonal momentum operators with
// joint spectrum in the closed forward cone, and bounded operators written
// in the joint eigenbasis, where every translation and frequency filter acts
// element-wise through the transfer p_m - p_n.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "emt/dyadic.hpp"
#include "emt/spacetime.hpp"

namespace emt {

using Matrix = Eigen::MatrixXcd;

class QuantumModel {
 public:
  /// Throws HypothesisError if some p_m lies outside the closed forward cone
  /// (relative tolerance 1e-12 on the cone inequality).
  explicit QuantumModel(std::vector<FourVector> spectrum);

  std::size_t dim() const { return spectrum_.size(); }
  const std::vector<FourVector>& spectrum() const { return spectrum_; }
  double energy(std::size_t m) const { return spectrum_[m][0]; }
  FourVector transfer(std::size_t m, std::size_t n) const { return spectrum_[m] - spectrum_[n]; }
  double min_energy() const;
  double max_energy() const;
  /// Largest Euclidean norm of a transfer p_m - p_n.
  double max_transfer() const;
  bool has_zero_energy() const { return min_energy() == 0.0; }

  /// Diagonal matrix of the mu-th momentum component.
  Matrix momentum(int mu) const;
  /// U(x) = exp(i x.P) with the Minkowski pairing.
  Matrix translation(const FourVector& x) const;

  /// p0 uniform in [0, energy_scale], |p| = p0 u^{1/3}, isotropic direction.
  static QuantumModel random_cone(std::size_t d, std::mt19937_64& rng, double energy_scale = 1.0,
                                  bool zero_state = true);
  /// The d integer points a (n0, n1, n2, n3) with n0 >= |n_vec| closest to the
  /// origin (ordered by n0, then |n_vec|^2, then lexicographically). All
  /// transfers are lattice vectors, so time series are exactly periodic with
  /// period 2 pi / a.
  static QuantumModel lattice(std::size_t d, double spacing = 1.0);
  /// p0 = sqrt(mass^2 + |p|^2) on the momentum grid dp Z^3, nearest points
  /// first; with `zero_state` the first basis state is p = 0.
  static QuantumModel mass_shell(std::size_t d, double mass = 1.0, double dp = 0.5, bool zero_state = true);

 private:
  std::vector<FourVector> spectrum_;
};

/// How theta(+-w) of the frequency filters is tied to the energy change of a
/// matrix element. The default makes the minus part lower the energy
/// (w_mn = p0_m - p0_n), so it annihilates minimum-energy states; the
/// alternative flips the sign of w_mn.
enum class BohrConvention { MinusLowersEnergy, MinusRaisesEnergy };

class OperatorField {
 public:
  OperatorField(std::shared_ptr<const QuantumModel> model, Matrix b);

  const QuantumModel& model() const { return *model_; }
  const std::shared_ptr<const QuantumModel>& model_ptr() const { return model_; }
  const Matrix& matrix() const { return b_; }
  std::size_t dim() const { return model_->dim(); }

  /// Entries i.i.d. complex Gaussian, rescaled to unit operator norm.
  static OperatorField random(std::shared_ptr<const QuantumModel> model, std::mt19937_64& rng);
  /// Zero matrix with the given entries set.
  static OperatorField sparse(std::shared_ptr<const QuantumModel> model,
                              const std::vector<std::tuple<std::size_t, std::size_t, cd>>& entries);

  /// B(x) = U(x) B U(-x): entries e^{i x.(p_m - p_n)} B_mn.
  OperatorField translate(const FourVector& x) const;
  /// B(nu) = sum_i w_i B(x_i).
  OperatorField smear(const DiscreteMeasure& nu) const;
  OperatorField adjoint() const;
  /// Largest singular value.
  double norm() const;

  /// Signed Bohr frequency of entry (m, n) under the convention.
  double bohr_frequency(std::size_t m, std::size_t n, BohrConvention c = BohrConvention::MinusLowersEnergy) const;

  /// B^k_+ or B^k_-: entries e^{-+ik pi/2} theta(+-w) |w|^k B_mn, w = 0 entries dropped.
  OperatorField frequency_part(double k, FrequencySign sign, BohrConvention c = BohrConvention::MinusLowersEnergy) const;
  std::pair<OperatorField, OperatorField> frequency_parts(double k,
                                                          BohrConvention c = BohrConvention::MinusLowersEnergy) const;
  /// d^n/dt^n B(t, 0)|_{t=0}: entries (i w_mn)^n B_mn with w_mn = p0_m - p0_n.
  OperatorField time_derivative(int n) const;
  /// B^k_t: entries |p_m - p_n|^k B_mn, Euclidean four-norm.
  OperatorField momentum_filter(double k) const;
  /// Entries multiplied by weight(transfer).
  OperatorField filter_transfers(const std::function<cd(const FourVector&)>& weight) const;

  OperatorField operator+(const OperatorField& o) const;
  OperatorField operator-(const OperatorField& o) const;
  OperatorField operator*(cd s) const;

 private:
  std::shared_ptr<const QuantumModel> model_;
  Matrix b_;
};

double operator_norm(const Matrix& a);

/// ||[B1, B2(x)]||.
double commutator_norm(const OperatorField& b1, const OperatorField& b2, const FourVector& x);

/// Least c with ||[B, B*(x)]|| <= c D_kappa(x) on the grid.
double kappa_fit(const OperatorField& b, const EnvelopeParams& params, std::span<const FourVector> grid);
/// Same for a pair [B1, B2(x)].
double kappa_fit(const OperatorField& b1, const OperatorField& b2, const EnvelopeParams& params,
                 std::span<const FourVector> grid);

/// Diagonal 0/1 matrix selecting p0_m <= E.
Matrix spectral_projector(const QuantumModel& model, double E);

/// Energy functions G of the bound theorems.
struct EnergyWeight {
  enum class Kind { Plus, Minus, Zero, Custom };
  Kind kind = Kind::Plus;
  double lambda = 1.0;
  double s = 1.0;  // Plus: (1 + lambda E)^{-s}
  double a = 0.0;  // Minus: (lambda E)^{-a} (1 + lambda E)^{-b}
  double b = 1.0;
  std::function<double(double)> custom;
  // Declared properties of a custom function.
  bool nonincreasing = true;
  bool square_integrable = true;
  bool bounded_at_zero = true;

  static EnergyWeight plus(double lambda, double s);
  static EnergyWeight minus(double lambda, double a, double b);
  static EnergyWeight zero();

  double operator()(double E) const;
  /// Checks the three conditions on G for the given variant (+ requires
  /// boundedness, - allows G(0) = +inf). Throws HypothesisError.
  void validate(FrequencySign variant) const;
};

/// Diagonal of G(P0). With `extended` false an infinite value throws.
std::vector<double> energy_weight(const QuantumModel& model, const EnergyWeight& g, bool extended = false);

/// A G(P0), column by column, with 0 * inf = 0. Throws HypothesisError when
/// an infinite weight meets a nonzero column.
Matrix apply_energy_weight(const Matrix& a, const QuantumModel& model, const EnergyWeight& g);

struct BuchholzResult {
  int n = 1;
  double lhs_c = 0.0;    // ||C P||^2
  double rhs_c = 0.0;    // (n - 1) ||[C, C*]||
  double lhs_adj = 0.0;  // ||C* P||^2
  double rhs_adj = 0.0;  // n ||[C, C*]||
  double scale = 0.0;    // ||C||^2, the unit for the slack
  std::size_t null_dim = 0;
  bool ambiguous = false;  // some singular value of C^n sits near the cutoff
  double slack_c() const { return scale > 0 ? (lhs_c - rhs_c) / scale : lhs_c - rhs_c; }
  double slack_adj() const { return scale > 0 ? (lhs_adj - rhs_adj) / scale : lhs_adj - rhs_adj; }
  bool holds(double tol = 1e-9) const { return slack_c() <= tol && slack_adj() <= tol; }
};

/// P is the orthogonal projector onto ker C^n: singular values of C^n below
/// 1e-10 sigma_max count as zero.
BuchholzResult buchholz_check(const Matrix& c, int n);

/// Random test matrix for the Buchholz check: a unitary conjugate of
/// (nilpotent Jordan blocks) + (a Gaussian block), so that ker C^n is
/// usually nontrivial and grows with n.
Matrix random_buchholz_matrix(std::size_t d, std::mt19937_64& rng);

/// Haar-distributed unitary (QR of a complex Gaussian matrix with phases fixed).
Matrix random_unitary(std::size_t d, std::mt19937_64& rng);

struct DyadicSplit {
  OperatorField high;                // (1 - eta(w)) B^k_+
  std::vector<OperatorField> bands;  // j_n(w) B^k_+, n < N
  OperatorField residual;            // B^k_+ - high - sum bands
  double residual_norm = 0.0;
  double eta_l1 = 0.0;       // ||eta^k_+||_1
  double stated_bound = 0.0;  // 2^{-Nk} ||eta^k_+||_1 ||B||
  double sharp_bound = 0.0;  // stated_bound / (2 pi), from the 1/(2 pi) of the time-side convolution
};

/// Split of B^k_+ into the high-frequency part and the dyadic bands below
/// 1/lambda. `eta_l1` may be passed to avoid recomputing ||eta^k_+||_1.
DyadicSplit dyadic_operator_split(const OperatorField& b, double k, int N, const Mollifier& m,
                                  double eta_l1 = -1.0);

/// B^k_+-(0) computed through sampled time series instead of the closed form:
/// each entry of B(-tau t) (time axis t) is sampled on [0, period) with
/// `samples` points, filtered with fractional_part, and read back at tau = 0.
/// Exact when every Bohr frequency is a multiple of 2 pi / period below the
/// grid's Nyquist frequency.
std::pair<OperatorField, OperatorField> frequency_parts_time_domain(const OperatorField& b, double k, double period,
                                                                    std::size_t samples,
                                                                    BohrConvention c = BohrConvention::MinusLowersEnergy);

}  // namespace emt
