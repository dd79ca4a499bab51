#include "emt/toy_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace emt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_forward_cone(const FourVector& p) {
  const double r = p.spatial_norm();
  return p[0] >= 0.0 && p[0] - r >= -1e-12 * std::max(1.0, p[0]);
}

std::vector<std::array<int, 3>> cube_points(int radius) {
  std::vector<std::array<int, 3>> pts;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j)
      for (int l = -radius; l <= radius; ++l) pts.push_back({i, j, l});
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    const int na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const int nb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    return na != nb ? na < nb : a < b;
  });
  return pts;
}

void require_same_model(const OperatorField& a, const OperatorField& b) {
  if (a.model_ptr() != b.model_ptr() && a.model().spectrum() != b.model().spectrum())
    throw std::invalid_argument("operator fields live on different models");
}

}  // namespace

QuantumModel::QuantumModel(std::vector<FourVector> spectrum) : spectrum_(std::move(spectrum)) {
  if (spectrum_.empty()) throw std::invalid_argument("model needs at least one state");
  for (const auto& p : spectrum_)
    if (!in_forward_cone(p)) throw HypothesisError("model: joint spectrum point " + to_string(p) + " outside the forward cone");
}

double QuantumModel::min_energy() const {
  double e = kInf;
  for (const auto& p : spectrum_) e = std::min(e, p[0]);
  return e;
}

double QuantumModel::max_energy() const {
  double e = 0.0;
  for (const auto& p : spectrum_) e = std::max(e, p[0]);
  return e;
}

double QuantumModel::max_transfer() const {
  double t = 0.0;
  for (std::size_t m = 0; m < dim(); ++m)
    for (std::size_t n = 0; n < dim(); ++n) t = std::max(t, transfer(m, n).euclidean_norm());
  return t;
}

Matrix QuantumModel::momentum(int mu) const {
  if (mu < 0 || mu > 3) throw std::invalid_argument("momentum component must be 0..3");
  Matrix p = Matrix::Zero(dim(), dim());
  for (std::size_t m = 0; m < dim(); ++m) p(m, m) = spectrum_[m][mu];
  return p;
}

Matrix QuantumModel::translation(const FourVector& x) const {
  Matrix u = Matrix::Zero(dim(), dim());
  for (std::size_t m = 0; m < dim(); ++m) u(m, m) = std::polar(1.0, minkowski_dot(x, spectrum_[m]));
  return u;
}

QuantumModel QuantumModel::random_cone(std::size_t d, std::mt19937_64& rng, double energy_scale, bool zero_state) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<FourVector> spec;
  if (zero_state && d > 0) spec.push_back({0, 0, 0, 0});
  while (spec.size() < d) {
    const double e = energy_scale * u(rng);
    const double r = e * std::cbrt(u(rng));
    double v[3] = {g(rng), g(rng), g(rng)};
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (len == 0.0) continue;
    spec.push_back({e, r * v[0] / len, r * v[1] / len, r * v[2] / len});
  }
  return QuantumModel(std::move(spec));
}

QuantumModel QuantumModel::lattice(std::size_t d, double spacing) {
  std::vector<std::pair<int, std::array<int, 3>>> pts;
  for (int n0 = 0; pts.size() < d; ++n0) {
    std::vector<std::pair<int, std::array<int, 3>>> shell;
    for (const auto& v : cube_points(n0))
      if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= n0 * n0) shell.push_back({n0, v});
    for (const auto& s : shell) {
      if (pts.size() == d) break;
      pts.push_back(s);
    }
  }
  std::vector<FourVector> spec;
  for (const auto& [n0, v] : pts) spec.push_back({spacing * n0, spacing * v[0], spacing * v[1], spacing * v[2]});
  return QuantumModel(std::move(spec));
}

QuantumModel QuantumModel::mass_shell(std::size_t d, double mass, double dp, bool zero_state) {
  if (!(mass >= 0.0) || !(dp > 0.0)) throw std::invalid_argument("mass shell: need mass >= 0 and dp > 0");
  std::vector<FourVector> spec;
  if (zero_state && d > 0) spec.push_back({0, 0, 0, 0});
  int radius = 1;
  while (std::pow(2 * radius + 1, 3) < static_cast<double>(d)) ++radius;
  for (const auto& v : cube_points(radius)) {
    if (spec.size() == d) break;
    const double px = dp * v[0], py = dp * v[1], pz = dp * v[2];
    spec.push_back({std::sqrt(mass * mass + px * px + py * py + pz * pz), px, py, pz});
  }
  return QuantumModel(std::move(spec));
}

OperatorField::OperatorField(std::shared_ptr<const QuantumModel> model, Matrix b)
    : model_(std::move(model)), b_(std::move(b)) {
  if (!model_) throw std::invalid_argument("operator field needs a model");
  if (static_cast<std::size_t>(b_.rows()) != model_->dim() || static_cast<std::size_t>(b_.cols()) != model_->dim())
    throw std::invalid_argument("operator matrix does not match the model dimension");
}

OperatorField OperatorField::random(std::shared_ptr<const QuantumModel> model, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const auto d = static_cast<Eigen::Index>(model->dim());
  Matrix b(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) b(i, j) = cd(g(rng), g(rng));
  const double nrm = operator_norm(b);
  if (nrm > 0.0) b /= nrm;
  return OperatorField(std::move(model), std::move(b));
}

OperatorField OperatorField::sparse(std::shared_ptr<const QuantumModel> model,
                                    const std::vector<std::tuple<std::size_t, std::size_t, cd>>& entries) {
  const auto d = static_cast<Eigen::Index>(model->dim());
  Matrix b = Matrix::Zero(d, d);
  for (const auto& [m, n, v] : entries) b(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = v;
  return OperatorField(std::move(model), std::move(b));
}

OperatorField OperatorField::filter_transfers(const std::function<cd(const FourVector&)>& weight) const {
  Matrix out = b_;
  for (std::size_t n = 0; n < dim(); ++n)
    for (std::size_t m = 0; m < dim(); ++m) {
      cd& v = out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      if (v != 0.0) v *= weight(model_->transfer(m, n));
    }
  return OperatorField(model_, std::move(out));
}

OperatorField OperatorField::translate(const FourVector& x) const {
  Eigen::VectorXcd u(static_cast<Eigen::Index>(dim()));
  for (std::size_t m = 0; m < dim(); ++m)
    u(static_cast<Eigen::Index>(m)) = std::polar(1.0, minkowski_dot(x, model_->spectrum()[m]));
  Matrix out = u.asDiagonal() * b_ * u.conjugate().asDiagonal();
  // zero transfers stay exactly untouched
  for (std::size_t m = 0; m < dim(); ++m)
    for (std::size_t n = 0; n < dim(); ++n)
      if (model_->spectrum()[m] == model_->spectrum()[n])
        out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = b_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  return OperatorField(model_, out);
}

OperatorField OperatorField::smear(const DiscreteMeasure& nu) const {
  // sum_a w_a e^{i x_a.p_m} e^{-i x_a.p_n} = (Phi W Phi^*)_mn, one phase per (state, atom)
  const auto d = static_cast<Eigen::Index>(dim());
  const auto count = static_cast<Eigen::Index>(nu.size());
  Matrix phase(d, count);
  Eigen::VectorXcd w(count);
  for (Eigen::Index a = 0; a < count; ++a) {
    const auto& atom = nu.atoms()[static_cast<std::size_t>(a)];
    w(a) = atom.w;
    for (Eigen::Index m = 0; m < d; ++m)
      phase(m, a) = std::polar(1.0, minkowski_dot(atom.x, model_->spectrum()[static_cast<std::size_t>(m)]));
  }
  const Matrix kernel = phase * w.asDiagonal() * phase.adjoint();
  return OperatorField(model_, b_.cwiseProduct(kernel));
}

OperatorField OperatorField::adjoint() const { return OperatorField(model_, b_.adjoint()); }

double OperatorField::norm() const { return operator_norm(b_); }

double OperatorField::bohr_frequency(std::size_t m, std::size_t n, BohrConvention c) const {
  const double w = model_->energy(m) - model_->energy(n);
  return c == BohrConvention::MinusLowersEnergy ? w : -w;
}

OperatorField OperatorField::frequency_part(double k, FrequencySign sign, BohrConvention c) const {
  if (!(k > 0.0)) throw HypothesisError("frequency parts: order k must be > 0");
  const double sg = sign_value(sign);
  const cd phase = std::polar(1.0, -sg * k * M_PI / 2);
  Matrix out = b_;
  for (std::size_t n = 0; n < dim(); ++n)
    for (std::size_t m = 0; m < dim(); ++m) {
      const double w = bohr_frequency(m, n, c);
      cd& v = out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      v = sg * w > 0.0 ? v * phase * std::pow(std::abs(w), k) : cd(0.0);
    }
  return OperatorField(model_, std::move(out));
}

std::pair<OperatorField, OperatorField> OperatorField::frequency_parts(double k, BohrConvention c) const {
  return {frequency_part(k, FrequencySign::Plus, c), frequency_part(k, FrequencySign::Minus, c)};
}

OperatorField OperatorField::time_derivative(int n) const {
  if (n < 0) throw std::invalid_argument("derivative order must be >= 0");
  return filter_transfers([&](const FourVector& p) { return std::pow(cd(0.0, p[0]), n); });
}

OperatorField OperatorField::momentum_filter(double k) const {
  if (!(k > 0.0)) throw HypothesisError("momentum filter: order k must be > 0");
  return filter_transfers([&](const FourVector& p) { return cd(std::pow(p.euclidean_norm(), k)); });
}

OperatorField OperatorField::operator+(const OperatorField& o) const {
  require_same_model(*this, o);
  return OperatorField(model_, b_ + o.b_);
}

OperatorField OperatorField::operator-(const OperatorField& o) const {
  require_same_model(*this, o);
  return OperatorField(model_, b_ - o.b_);
}

OperatorField OperatorField::operator*(cd s) const { return OperatorField(model_, b_ * s); }

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  // largest eigenvalue of the smaller Gram matrix; relative accuracy ~ machine epsilon
  const Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.adjoint()) : Matrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1)));
}

double commutator_norm(const OperatorField& b1, const OperatorField& b2, const FourVector& x) {
  require_same_model(b1, b2);
  const Matrix b2x = b2.translate(x).matrix();
  return operator_norm(b1.matrix() * b2x - b2x * b1.matrix());
}

double kappa_fit(const OperatorField& b1, const OperatorField& b2, const EnvelopeParams& params,
                 std::span<const FourVector> grid) {
  params.validate();
  if (grid.empty()) throw std::invalid_argument("kappa fit: empty grid");
  double c = 0.0;
  for (const auto& x : grid) c = std::max(c, commutator_norm(b1, b2, x) / d_kappa(x, params));
  return c;
}

double kappa_fit(const OperatorField& b, const EnvelopeParams& params, std::span<const FourVector> grid) {
  return kappa_fit(b, b.adjoint(), params, grid);
}

Matrix spectral_projector(const QuantumModel& model, double E) {
  Matrix p = Matrix::Zero(model.dim(), model.dim());
  for (std::size_t m = 0; m < model.dim(); ++m)
    if (model.energy(m) <= E) p(m, m) = 1.0;
  return p;
}

EnergyWeight EnergyWeight::plus(double lambda, double s) {
  EnergyWeight g;
  g.kind = Kind::Plus;
  g.lambda = lambda;
  g.s = s;
  return g;
}

EnergyWeight EnergyWeight::minus(double lambda, double a, double b) {
  EnergyWeight g;
  g.kind = Kind::Minus;
  g.lambda = lambda;
  g.a = a;
  g.b = b;
  g.bounded_at_zero = a == 0.0;
  return g;
}

EnergyWeight EnergyWeight::zero() {
  EnergyWeight g;
  g.kind = Kind::Zero;
  return g;
}

double EnergyWeight::operator()(double E) const {
  if (E < 0.0) E = 0.0;  // G extended by G(0) below the spectrum
  switch (kind) {
    case Kind::Plus:
      return std::pow(1.0 + lambda * E, -s);
    case Kind::Minus:
      if (E == 0.0) return a > 0.0 ? kInf : 1.0;
      return std::pow(lambda * E, -a) * std::pow(1.0 + lambda * E, -b);
    case Kind::Zero:
      return 0.0;
    case Kind::Custom:
      return custom ? custom(E) : 0.0;
  }
  return 0.0;
}

void EnergyWeight::validate(FrequencySign variant) const {
  switch (kind) {
    case Kind::Plus:
      if (!(lambda > 0.0)) throw HypothesisError("G: lambda must be > 0");
      if (!(s > 0.5)) throw HypothesisError("G_+ = (1 + lambda E)^-s is square integrable only for s > 1/2");
      return;
    case Kind::Minus:
      if (!(lambda > 0.0)) throw HypothesisError("G: lambda must be > 0");
      if (!(a >= 0.0 && a < 0.5)) throw HypothesisError("G_- needs 0 <= a < 1/2 (square integrability at E = 0)");
      if (!(b >= 0.0)) throw HypothesisError("G_- needs b >= 0 (non-increasing)");
      if (!(a + b > 0.5)) throw HypothesisError("G_- needs a + b > 1/2 (square integrability at infinity)");
      if (variant == FrequencySign::Plus && a > 0.0)
        throw HypothesisError("G for the plus part must be bounded, but G_-(0) = +inf");
      return;
    case Kind::Zero:
      return;
    case Kind::Custom:
      if (!custom) throw HypothesisError("G: custom weight has no function");
      if (!nonincreasing) throw HypothesisError("G must be non-increasing");
      if (!square_integrable) throw HypothesisError("G must be square integrable on [0, inf)");
      if (variant == FrequencySign::Plus && !bounded_at_zero) throw HypothesisError("G for the plus part must be bounded");
      return;
  }
}

std::vector<double> energy_weight(const QuantumModel& model, const EnergyWeight& g, bool extended) {
  std::vector<double> w(model.dim());
  for (std::size_t m = 0; m < model.dim(); ++m) {
    w[m] = g(model.energy(m));
    if (std::isinf(w[m]) && !extended)
      throw HypothesisError("G(P0): infinite weight at energy 0; extended values not enabled");
  }
  return w;
}

Matrix apply_energy_weight(const Matrix& a, const QuantumModel& model, const EnergyWeight& g) {
  const auto w = energy_weight(model, g, true);
  Matrix out = a;
  for (Eigen::Index n = 0; n < out.cols(); ++n) {
    const double wn = w[static_cast<std::size_t>(n)];
    if (std::isinf(wn)) {
      if (!out.col(n).isZero(0.0)) throw HypothesisError("G(P0): infinite weight meets a nonzero column");
      out.col(n).setZero();
    } else {
      out.col(n) *= wn;
    }
  }
  return out;
}

BuchholzResult buchholz_check(const Matrix& c, int n) {
  if (n < 1) throw HypothesisError("Buchholz check: n must be >= 1");
  if (c.rows() != c.cols()) throw std::invalid_argument("Buchholz check: matrix must be square");
  const auto d = c.rows();
  Matrix cn = Matrix::Identity(d, d);
  for (int i = 0; i < n; ++i) cn = cn * c;

  Eigen::JacobiSVD<Matrix> svd(cn, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  BuchholzResult r;
  r.n = n;
  Matrix p = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double rel = smax > 0.0 ? sv(i) / smax : 0.0;
    if (smax > 0.0 && rel >= 1e-12 && rel <= 1e-8) r.ambiguous = true;
    if (smax == 0.0 || rel < 1e-10) {
      const auto v = svd.matrixV().col(i);
      p += v * v.adjoint();
      ++r.null_dim;
    }
  }
  const Matrix comm = c * c.adjoint() - c.adjoint() * c;
  const double cn_norm = operator_norm(comm);
  const double cp = operator_norm(c * p);
  const double cadjp = operator_norm(c.adjoint() * p);
  r.lhs_c = cp * cp;
  r.rhs_c = (n - 1) * cn_norm;
  r.lhs_adj = cadjp * cadjp;
  r.rhs_adj = n * cn_norm;
  const double cnorm = operator_norm(c);
  r.scale = cnorm * cnorm;
  return r;
}

Matrix random_unitary(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const auto n = static_cast<Eigen::Index>(d);
  Matrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = cd(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(r(i, i));
    if (a > 0.0) q.col(i) *= r(i, i) / a;
  }
  return q;
}

Matrix random_buchholz_matrix(std::size_t d, std::mt19937_64& rng) {
  if (d == 0) throw std::invalid_argument("Buchholz matrix: dimension must be >= 1");
  std::uniform_int_distribution<std::size_t> split(0, d);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.2, 2.0);
  const auto n = static_cast<Eigen::Index>(d);
  Matrix c = Matrix::Zero(n, n);
  const auto nil = static_cast<Eigen::Index>(split(rng));
  // Jordan blocks of random sizes with random superdiagonal weights
  for (Eigen::Index i = 0; i < nil;) {
    const auto len = std::min<Eigen::Index>(nil - i, 1 + static_cast<Eigen::Index>(rng() % 4));
    for (Eigen::Index j = 0; j + 1 < len; ++j) c(i + j, i + j + 1) = u(rng) * std::polar(1.0, 2 * M_PI * u(rng));
    i += len;
  }
  for (Eigen::Index j = nil; j < n; ++j)
    for (Eigen::Index i = nil; i < n; ++i) c(i, j) = cd(g(rng), g(rng));
  const Matrix q = random_unitary(d, rng);
  return q * c * q.adjoint();
}

DyadicSplit dyadic_operator_split(const OperatorField& b, double k, int N, const Mollifier& m, double eta_l1) {
  if (N < 0) throw std::invalid_argument("dyadic split: N must be >= 0");
  const OperatorField plus = b.frequency_part(k, FrequencySign::Plus);
  auto weighted = [&](auto&& profile) {
    Matrix out = plus.matrix();
    for (std::size_t col = 0; col < b.dim(); ++col)
      for (std::size_t row = 0; row < b.dim(); ++row)
        out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) *= profile(b.bohr_frequency(row, col));
    return OperatorField(b.model_ptr(), std::move(out));
  };
  DyadicSplit s{weighted([&](double w) { return 1.0 - m.eta(w); }), {}, plus, 0.0, 0.0, 0.0, 0.0};
  s.residual = plus - s.high;
  for (int n = 0; n < N; ++n) {
    s.bands.push_back(weighted([&](double w) { return m.j(w, n); }));
    s.residual = s.residual - s.bands.back();
  }
  s.residual_norm = s.residual.norm();
  s.eta_l1 = eta_l1 >= 0.0 ? eta_l1 : filtered_cutoff_l1(m, k, DyadicGrid{std::size_t{1} << 16, 0.5});
  s.stated_bound = std::pow(2.0, -N * k) * s.eta_l1 * b.norm();
  s.sharp_bound = s.stated_bound / (2.0 * M_PI);
  return s;
}

std::pair<OperatorField, OperatorField> frequency_parts_time_domain(const OperatorField& b, double k, double period,
                                                                    std::size_t samples, BohrConvention c) {
  if (!(period > 0.0) || samples < 2) throw std::invalid_argument("time-domain parts: bad sampling grid");
  const double dt = period / static_cast<double>(samples);
  const double dir = c == BohrConvention::MinusLowersEnergy ? -1.0 : 1.0;  // sample B(dir * tau)
  Matrix plus = Matrix::Zero(b.dim(), b.dim()), minus = plus;
  Signal g{0.0, dt, std::vector<cd>(samples)};
  for (std::size_t n = 0; n < b.dim(); ++n)
    for (std::size_t m = 0; m < b.dim(); ++m) {
      const cd v = b.matrix()(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      if (v == 0.0) continue;
      const double w = b.model().energy(m) - b.model().energy(n);
      for (std::size_t j = 0; j < samples; ++j) g.samples[j] = v * std::polar(1.0, w * dir * g.time(j));
      plus(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = fractional_part(g, k, FrequencySign::Plus).samples[0];
      minus(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = fractional_part(g, k, FrequencySign::Minus).samples[0];
    }
  return {OperatorField(b.model_ptr(), std::move(plus)), OperatorField(b.model_ptr(), std::move(minus))};
}

}  // namespace emt
