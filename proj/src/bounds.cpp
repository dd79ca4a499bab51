#include "emt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "emt/rng.hpp"

namespace emt {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_bound_order(double k, double kappa) {
  if (!(k > (kappa + 1.0) / 2.0))
    throw HypothesisError("bound check: k must exceed (kappa + 1)/2, got k = " + std::to_string(k) +
                          ", kappa = " + std::to_string(kappa));
}

FrequencySign weight_variant(PartKind part) {
  return part == PartKind::Minus ? FrequencySign::Minus : FrequencySign::Plus;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double euclid(const FourVector& v) { return v.euclidean_norm(); }

// Trapezoid over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

bool calibration_member(const std::string& family, std::size_t index) {
  return (splitmix64(fnv1a(family) ^ splitmix64(index)) & 1U) == 0;
}

void BoundReport::add(const std::string& family, double lhs, double rhs) {
  const std::size_t index = family_counts[family]++;
  BoundInstance inst{family, index, lhs, rhs, 0.0, calibration_member(family, index)};
  if (rhs > 0.0)
    inst.ratio = lhs / rhs;
  else
    inst.ratio = lhs <= zero_tolerance ? 0.0 : inf;
  instances.push_back(std::move(inst));
}

void BoundReport::merge(const BoundReport& other) {
  for (const auto& i : other.instances) add(i.family, i.lhs, i.rhs);
  invariant_failures += other.invariant_failures;
  custom_pass = custom_pass && other.custom_pass;
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

void BoundReport::finalize() {
  std::map<std::string, FamilySummary> by_family;
  sup_ratio = 0.0;
  violations = 0;
  for (const auto& i : instances) {
    auto& f = by_family[i.family];
    f.family = i.family;
    ++f.count;
    f.sup_ratio = std::max(f.sup_ratio, i.ratio);
    if (i.calibration) {
      ++f.calibration_count;
      f.calibration_sup = std::max(f.calibration_sup, i.ratio);
    } else {
      f.holdout_sup = std::max(f.holdout_sup, i.ratio);
    }
    const bool bad = !std::isfinite(i.ratio) || (mode == BoundMode::Exact && i.ratio > 1.0 + exact_slack);
    if (bad) ++f.violations;
  }
  families.clear();
  bool all = !by_family.empty();
  for (auto& [name, f] : by_family) {
    f.pass = f.violations == 0;
    if (mode == BoundMode::Protocol) f.pass = f.pass && f.holdout_sup <= margin * f.calibration_sup;
    sup_ratio = std::max(sup_ratio, f.sup_ratio);
    violations += f.violations;
    all = all && f.pass;
    families.push_back(f);
  }
  pass = all && invariant_failures == 0 && (mode != BoundMode::Custom || custom_pass);
}

OperatorField bound_part(const OperatorField& b, double k, PartKind part, BohrConvention c) {
  switch (part) {
    case PartKind::Plus:
      return b.frequency_part(k, FrequencySign::Plus, c);
    case PartKind::Minus:
      return b.frequency_part(k, FrequencySign::Minus, c);
    case PartKind::Momentum:
      return b.momentum_filter(k);
  }
  throw std::invalid_argument("bound_part: unknown part");
}

std::vector<FourVector> envelope_grid(double extent, int steps) {
  if (!(extent > 0.0) || steps < 1) throw std::invalid_argument("envelope_grid: need extent > 0, steps >= 1");
  const double u = 1.0 / std::sqrt(3.0);
  const std::array<std::array<double, 3>, 4> dirs{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {u, u, u}}};
  std::vector<FourVector> g;
  for (int i = -steps; i <= steps; ++i) {
    const double t = extent * i / steps;
    g.emplace_back(t, 0.0, 0.0, 0.0);
    for (int j = 1; j <= 2 * steps; ++j) {
      const double r = extent * j / steps;
      for (const auto& d : dirs) g.emplace_back(t, r * d[0], r * d[1], r * d[2]);
    }
  }
  return g;
}

BoundReport commutator_envelope_check(const OperatorField& b1, const OperatorField& b2,
                                      std::span<const MeasurePair> measures, const EnvelopeParams& params,
                                      const std::string& family) {
  params.validate();
  BoundReport r;
  r.id = "envelope";
  r.description = "||[B1(nu1), B2(nu2)]|| <= c sum |w||v| D_kappa";
  r.mode = BoundMode::Exact;

  double c = 0.0;
  for (const auto& m : measures)
    for (const auto& x : m.first.atoms())
      for (const auto& y : m.second.atoms()) {
        const FourVector a = y.x - x.x;
        c = std::max(c, commutator_norm(b1, b2, a) / d_kappa(a, params));
      }
  r.notes.push_back("fitted c = " + fmt(c));

  for (const auto& m : measures) {
    const Matrix s1 = b1.smear(m.first).matrix();
    const Matrix s2 = b2.smear(m.second).matrix();
    const double lhs = operator_norm(s1 * s2 - s2 * s1);
    r.add(family, lhs, c * envelope_integral(m.first, m.second, params));
  }
  r.finalize();
  return r;
}

BoundReport theorem_Bk_check(const OperatorField& b, const BkCheckParams& params,
                             std::span<const DiscreteMeasure> measures, const std::string& family,
                             std::span<const FourVector> kappa_grid) {
  params.envelope.validate();
  check_bound_order(params.k, params.envelope.kappa);
  if (params.energies.empty()) throw std::invalid_argument("theorem_Bk_check: empty energy grid");
  for (double e : params.energies)
    if (!(e >= 0.0)) throw HypothesisError("theorem_Bk_check: energies must be >= 0");

  BoundReport r;
  r.id = "thm-bk";
  r.description = "||B^k_+-(nu) P(E)|| / sqrt(c_+-(E) J(nu))";
  if (!kappa_grid.empty()) {
    const double c = kappa_fit(b, params.envelope, kappa_grid);
    if (!std::isfinite(c)) throw HypothesisError("theorem_Bk_check: kappa fit is not finite");
    r.notes.push_back(family + ": kappa fit c = " + fmt(c));
  }

  std::vector<double> energies = params.energies;
  std::sort(energies.begin(), energies.end());
  std::vector<Matrix> projectors;
  for (double e : energies) projectors.push_back(spectral_projector(b.model(), e));

  const bool plus = params.sign == FrequencySign::Plus;
  const OperatorField part = b.frequency_part(params.k, params.sign, params.convention);
  const double lambda = params.envelope.lambda;
  for (const auto& nu : measures) {
    const Matrix s = part.smear(nu).matrix();
    const double j = envelope_integral(nu, nu, params.envelope);
    double prev = 0.0;
    for (std::size_t i = 0; i < energies.size(); ++i) {
      const double lhs = operator_norm(s * projectors[i]);
      const double c = plus ? 1.0 + lambda * energies[i] : lambda * energies[i];
      r.add(family, lhs, std::sqrt(c * j));
      if (lhs < prev - 1e-12 * std::max(1.0, prev)) ++r.invariant_failures;
      prev = lhs;
    }
  }
  r.finalize();
  return r;
}

BoundReport theorem_GB_check(const OperatorField& b, const GBCheckParams& params,
                             std::span<const DiscreteMeasure> measures, const std::string& family) {
  params.envelope.validate();
  check_bound_order(params.k, params.envelope.kappa);
  params.weight.validate(weight_variant(params.part));

  BoundReport r;
  r.id = "thm-gb";
  r.description = "||B^k_e(nu) G_e(P0)|| / sqrt(J(nu))";
  const OperatorField part = bound_part(b, params.k, params.part, params.convention);
  for (const auto& nu : measures) {
    const Matrix s = apply_energy_weight(part.smear(nu).matrix(), b.model(), params.weight);
    r.add(family, operator_norm(s), std::sqrt(envelope_integral(nu, nu, params.envelope)));
  }
  r.finalize();
  return r;
}

double SmearingProfile::operator()(const FourVector& x) const {
  const double a = euclid(x);
  if (decay == Decay::Gaussian) return std::exp(-a * a / (2.0 * scale * scale));
  return std::pow(scale + a, -exponent);
}

void SmearingProfile::validate(double kappa) const {
  if (!(scale > 0.0) || points < 2 || !(half_width > 0.0))
    throw std::invalid_argument("smearing profile: need scale > 0, points >= 2, half_width > 0");
  if (decay == Decay::Power) {
    const double need = (time_only ? 1.0 : 4.0) + kappa;
    if (!(exponent >= need))
      throw HypothesisError("smearing profile: decay exponent " + fmt(exponent) + " below " + fmt(need));
  }
}

DiscreteMeasure SmearingProfile::sampled() const {
  const double h = 2.0 * half_width * scale / (points - 1);
  auto coord = [&](int i) { return -half_width * scale + i * h; };
  std::vector<Atom> atoms;
  if (time_only) {
    for (int i = 0; i < points; ++i) {
      const FourVector x(coord(i), 0, 0, 0);
      atoms.push_back({x, (*this)(x) * h});
    }
    return DiscreteMeasure(std::move(atoms));
  }
  const double vol = h * h * h * h;
  for (int a = 0; a < points; ++a)
    for (int b = 0; b < points; ++b)
      for (int c = 0; c < points; ++c)
        for (int d = 0; d < points; ++d) {
          const FourVector x(coord(a), coord(b), coord(c), coord(d));
          atoms.push_back({x, (*this)(x) * vol});
        }
  return DiscreteMeasure(std::move(atoms));
}

BoundReport stability_check(const OperatorField& b, const SmearingProfile& chi, const StabilityParams& params,
                            const std::string& family) {
  params.envelope.validate();
  chi.validate(params.envelope.kappa);
  BoundReport r;
  r.id = "stability";
  r.description = "kappa fit of B(chi) against that of B, base and widened grid";
  r.mode = BoundMode::Custom;

  const OperatorField smeared = b.smear(chi.sampled());
  const auto g1 = envelope_grid(params.extent, params.steps);
  const auto g2 = envelope_grid(2.0 * params.extent, 2 * params.steps);
  const double c1 = kappa_fit(b, params.envelope, g1);
  const double s1 = kappa_fit(smeared, params.envelope, g1);
  const double c2 = kappa_fit(b, params.envelope, g2);
  const double s2 = kappa_fit(smeared, params.envelope, g2);
  r.add(family, s1, c1);
  r.add(family, s2, c2);
  r.finalize();

  const double r1 = r.instances[r.instances.size() - 2].ratio;
  const double r2 = r.instances.back().ratio;
  const double drift = r1 > 0.0 ? std::abs(r2 - r1) / r1 : std::abs(r2);
  r.custom_pass = std::isfinite(s1) && std::isfinite(s2) && drift < params.growth_tolerance;
  r.notes.push_back(family + ": c(B) = " + fmt(c1) + " -> " + fmt(c2) + ", c(B(chi)) = " + fmt(s1) + " -> " +
                    fmt(s2) + ", ratio drift " + fmt(drift));
  r.finalize();
  return r;
}

double sobolev_exponent(double kappa) {
  if (!(kappa > 0.0)) throw HypothesisError("kappa must be > 0");
  if (kappa == 3.0) throw HypothesisError("kappa = 3 is the critical value; no exponent");
  return kappa < 3.0 ? 6.0 / (6.0 - kappa) : 2.0;
}

void check_sobolev_order(double k, double kappa) {
  sobolev_exponent(kappa);
  if (kappa < 3.0)
    check_bound_order(k, kappa);
  else if (!(k > 2.0))
    throw HypothesisError("bound check: k must exceed 2 for kappa > 3");
}

cd SpatialGaussian::operator()(const std::array<double, 3>& x) const {
  double r2 = 0.0, phase = 0.0;
  for (int i = 0; i < 3; ++i) {
    r2 += (x[i] - centre[i]) * (x[i] - centre[i]);
    phase += wave[i] * x[i];
  }
  return amplitude * std::exp(-r2 / (2.0 * width * width)) * std::polar(1.0, phase);
}

namespace {

template <class F>
void for_grid(const SpatialGrid& grid, F&& f) {
  const double off = 0.5 * (grid.points - 1);
  for (int a = 0; a < grid.points; ++a)
    for (int b = 0; b < grid.points; ++b)
      for (int c = 0; c < grid.points; ++c)
        f(std::array<double, 3>{(a - off) * grid.spacing, (b - off) * grid.spacing, (c - off) * grid.spacing});
}

}  // namespace

DiscreteMeasure fixed_time_measure(const SpatialGaussian& f, double tau, const SpatialGrid& grid, double R) {
  const double vol = std::pow(R * grid.spacing, 3);
  std::vector<Atom> atoms;
  for_grid(grid, [&](const std::array<double, 3>& x) {
    atoms.push_back({FourVector(tau, R * x[0], R * x[1], R * x[2]), f(x) * vol});
  });
  return DiscreteMeasure(std::move(atoms));
}

double grid_lp_norm(const SpatialGaussian& f, const SpatialGrid& grid, double p, double R) {
  double s = 0.0;
  for_grid(grid, [&](const std::array<double, 3>& x) { s += std::pow(std::abs(f(x)), p); });
  return std::pow(s * std::pow(R * grid.spacing, 3), 1.0 / p);
}

namespace {

void check_sobolev(const SobolevParams& params) {
  params.envelope.validate();
  check_sobolev_order(params.k, params.envelope.kappa);
  params.weight.validate(weight_variant(params.part));
  if (params.grid.points < 2 || !(params.grid.spacing > 0.0)) throw std::invalid_argument("sobolev: bad grid");
}

double sobolev_lhs(const OperatorField& part, const SobolevParams& params, const SpatialGaussian& f, double R) {
  const Matrix s = part.smear(fixed_time_measure(f, params.tau, params.grid, R)).matrix();
  return operator_norm(apply_energy_weight(s, part.model(), params.weight));
}

}  // namespace

BoundReport sobolev_bound_check(const OperatorField& b, const SobolevParams& params,
                                std::span<const SpatialGaussian> profiles, const std::string& family) {
  check_sobolev(params);
  const double p = sobolev_exponent(params.envelope.kappa);
  BoundReport r;
  r.id = "sobolev";
  r.description = "||B^k_e(tau, f) G_e(P0)|| / ||f||_p, p = " + fmt(p);
  const OperatorField part = bound_part(b, params.k, params.part, params.convention);
  for (const auto& f : profiles) r.add(family, sobolev_lhs(part, params, f, 1.0), grid_lp_norm(f, params.grid, p));
  r.finalize();
  return r;
}

std::vector<double> sobolev_rescaling_sweep(const OperatorField& b, const SobolevParams& params,
                                            const SpatialGaussian& f, std::span<const double> radii) {
  check_sobolev(params);
  const double p = sobolev_exponent(params.envelope.kappa);
  const OperatorField part = bound_part(b, params.k, params.part, params.convention);
  std::vector<double> out;
  for (double R : radii) {
    const double norm = grid_lp_norm(f, params.grid, p, R);
    out.push_back(norm > 0.0 ? sobolev_lhs(part, params, f, R) / norm : 0.0);
  }
  return out;
}

cd GaussianPacket::operator()(const FourVector& x) const {
  double e = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) e += (x[mu] - centre[mu]) * (x[mu] - centre[mu]) / (2.0 * widths[mu] * widths[mu]);
  return amplitude * std::exp(-e) * std::polar(1.0, -minkowski_dot(wave, x));
}

cd GaussianPacket::transform(const FourVector& p) const {
  const FourVector d = p - wave;
  double mag = 1.0;
  for (std::size_t mu = 0; mu < 4; ++mu)
    mag *= std::sqrt(2.0 * M_PI) * widths[mu] * std::exp(-0.5 * widths[mu] * widths[mu] * d[mu] * d[mu]);
  return amplitude * mag * std::polar(1.0, minkowski_dot(d, centre));
}

void WeightedParams::validate() const {
  envelope.validate();
  const double kappa = envelope.kappa;
  weight.validate(weight_variant(part));
  switch (form) {
    case WeightedForm::TimeWeight:
      check_sobolev_order(k, kappa);
      if (kappa < 3.0 && !(sigma > kappa / 6.0)) throw HypothesisError("weighted: need sigma > kappa/6");
      if (kappa > 3.0 && !(sigma > 0.5)) throw HypothesisError("weighted: need sigma > 1/2");
      break;
    case WeightedForm::SpectralDerivative:
      if (!(kappa > 3.0)) throw HypothesisError("weighted: the spectral form needs kappa > 3");
      check_sobolev_order(k, kappa);
      if (!(sigma > 0.5)) throw HypothesisError("weighted: need sigma > 1/2");
      break;
    case WeightedForm::SpaceTimeWeight:
      if (!(kappa < 3.0)) throw HypothesisError("weighted: the space-time form needs kappa < 3");
      check_sobolev_order(k, kappa);
      if (!(beta > (3.0 - kappa) / 2.0)) throw HypothesisError("weighted: need beta > (3 - kappa)/2");
      if (!(tau > 0.5)) throw HypothesisError("weighted: need tau > 1/2");
      break;
  }
}

namespace {

// ||d^sigma g^||_2 for the unit-normalized transform of the time factor
// g(t) = exp(-(t - c)^2 / (2 s^2)), computed on the spectral side.
double spectral_derivative_norm(double c, double s, double sigma) {
  const double half = 400.0 / s;  // dual spacing pi s / 400 resolves the kink of |t|^sigma
  const double da = 0.25 * M_PI / (std::abs(c) + 12.0 / s);
  const std::size_t n = next_pow2(static_cast<std::size_t>(std::ceil(2.0 * half / da)));
  Signal g{-half, 2.0 * half / static_cast<double>(n), std::vector<cd>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g.time(i);
    g.samples[i] = s * std::exp(-0.5 * s * s * a * a) * std::polar(1.0, a * c);
  }
  const Signal plus = fractional_part(g, sigma, FrequencySign::Plus);
  const Signal minus = fractional_part(g, sigma, FrequencySign::Minus);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::norm(plus.samples[i] + minus.samples[i]);
  return std::sqrt(sum * g.dt);
}

}  // namespace

double weighted_norm(const GaussianPacket& phi, const WeightedParams& params) {
  const double lambda = params.envelope.lambda;
  const double amp = std::abs(phi.amplitude);
  const double c0 = phi.centre[0];
  const double s0 = phi.widths[0];
  auto gauss_lp = [](double s, double p) { return std::pow(s * std::sqrt(2.0 * M_PI / p), 1.0 / p); };

  switch (params.form) {
    case WeightedForm::TimeWeight: {
      const double p = sobolev_exponent(params.envelope.kappa);
      const double t = integrate(
          [&](double x) {
            return std::pow(lambda + std::abs(x), params.sigma * p) * std::exp(-p * (x - c0) * (x - c0) / (2 * s0 * s0));
          },
          c0 - 12.0 * s0, c0 + 12.0 * s0, 4000);
      double n = amp * std::pow(t, 1.0 / p);
      for (int i = 1; i < 4; ++i) n *= gauss_lp(phi.widths[i], p);
      return n;
    }
    case WeightedForm::SpectralDerivative: {
      const double plain = s0 * std::sqrt(M_PI);  // ||g||_2^2 = ||g^||_2^2
      const double d = spectral_derivative_norm(c0, s0, params.sigma);
      double n = amp * std::sqrt(std::pow(lambda, 2 * params.sigma) * plain + d * d);
      for (int i = 1; i < 4; ++i) n *= gauss_lp(phi.widths[i], 2.0);
      return n;
    }
    case WeightedForm::SpaceTimeWeight: {
      const double t = integrate(
          [&](double x) {
            return std::pow(lambda + std::abs(x), 2 * params.tau) * std::exp(-(x - c0) * (x - c0) / (s0 * s0));
          },
          c0 - 12.0 * s0, c0 + 12.0 * s0, 4000);
      constexpr int n = 40;
      std::array<double, n> xs[3], ws[3];
      for (int i = 0; i < 3; ++i) {
        const double s = phi.widths[i + 1], c = phi.centre[i + 1];
        const double h = 12.0 * s / (n - 1);
        for (int j = 0; j < n; ++j) {
          xs[i][j] = c - 6.0 * s + j * h;
          ws[i][j] = std::exp(-(xs[i][j] - c) * (xs[i][j] - c) / (s * s)) * h;
        }
      }
      double sp = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            const double r = std::sqrt(xs[0][a] * xs[0][a] + xs[1][b] * xs[1][b] + xs[2][c] * xs[2][c]);
            sp += std::pow(lambda + r, 2 * params.beta) * ws[0][a] * ws[1][b] * ws[2][c];
          }
      return amp * std::sqrt(t * sp);
    }
  }
  throw std::invalid_argument("weighted_norm: unknown form");
}

BoundReport weighted_bound_check(const OperatorField& b, const WeightedParams& params,
                                 std::span<const GaussianPacket> packets, const std::string& family) {
  params.validate();
  BoundReport r;
  r.id = "weighted";
  r.description = "||B^k_e(phi) G_e(P0)|| / weighted norm of phi";
  const OperatorField part = bound_part(b, params.k, params.part, params.convention);
  for (const auto& phi : packets) {
    const Matrix s = part.filter_transfers([&](const FourVector& p) { return phi.transform(p); }).matrix();
    r.add(family, operator_norm(apply_energy_weight(s, b.model(), params.weight)), weighted_norm(phi, params));
  }
  r.finalize();
  return r;
}

double ProbeProfile::operator()(const FourVector& v) const {
  const double a = width * euclid(v);
  return std::exp(-0.5 * a * a);
}

std::vector<double> geometric_schedule(double first, double last, int count) {
  if (!(first > 0.0) || !(last >= first) || count < 2) throw std::invalid_argument("geometric_schedule: bad range");
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(first * std::pow(last / first, static_cast<double>(i) / (count - 1)));
  g.back() = last;
  return g;
}

namespace {

void check_corollary(const CorollaryParams& p) {
  if (!(p.k > 0.5)) throw HypothesisError("corollary: need k > 1/2");
  if (!(p.kappa > 0.0)) throw HypothesisError("corollary: need kappa > 0");
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw HypothesisError("corollary: need 0 < delta < 1");
  if (!(p.probe.width > 0.0)) throw std::invalid_argument("corollary: probe width must be > 0");
  p.weight.validate(FrequencySign::Plus);
}

FourVector point_argument(const FourVector& p, const FourVector& q, double delta, double gamma) {
  const FourVector d = p - q;
  return FourVector(std::pow(gamma, delta) * d[0], gamma * d[1], gamma * d[2], gamma * d[3]);
}

void check_unit_spacelike(const FourVector& n) {
  if (std::abs(minkowski_dot(n, n) + 1.0) > 1e-9) throw HypothesisError("corollary: n must satisfy n.n = -1");
}

FourVector plane_argument(const FourVector& p, const FourVector& n, double r, double gamma) {
  const double pn = -minkowski_dot(n, p);
  const FourVector perp = p - pn * n;
  return gamma * (pn - r) * n + perp;
}

DecayCurve decay_curve(const OperatorField& b, const CorollaryParams& params, std::span<const double> gammas,
                       const std::function<FourVector(const FourVector&, double)>& arg) {
  if (gammas.empty()) throw std::invalid_argument("corollary: empty schedule");
  const OperatorField filtered = b.momentum_filter(params.k);
  DecayCurve c;
  for (double g : gammas) {
    const Matrix m = filtered.filter_transfers([&](const FourVector& p) { return cd(params.probe(arg(p, g))); }).matrix();
    c.gamma.push_back(g);
    c.value.push_back(operator_norm(apply_energy_weight(m, b.model(), params.weight)));
  }
  const double first = c.value.front(), last = c.value.back();
  c.final_ratio = first > 0.0 ? last / first : (last == 0.0 ? 0.0 : inf);
  int rises = 0;
  for (std::size_t i = 1; i < c.value.size(); ++i) {
    if (c.gamma[i - 1] < c.gamma.back() / 10.0) continue;
    rises = c.value[i] > c.value[i - 1] * (1.0 + 1e-12) ? rises + 1 : 0;
    if (rises >= 2) c.sustained_growth = true;
  }
  return c;
}

double probe_margin(const QuantumModel& model, double width, const std::function<FourVector(const FourVector&)>& arg) {
  double best = inf;
  for (std::size_t m = 0; m < model.dim(); ++m)
    for (std::size_t n = 0; n < model.dim(); ++n) {
      const FourVector p = model.transfer(m, n);
      if (euclid(p) == 0.0) continue;
      best = std::min(best, width * euclid(arg(p)));
    }
  return best;
}

}  // namespace

DecayCurve corollary_point_limit(const OperatorField& b, const CorollaryParams& params, const FourVector& q,
                                 std::span<const double> gammas) {
  check_corollary(params);
  return decay_curve(b, params, gammas,
                     [&](const FourVector& p, double g) { return point_argument(p, q, params.delta, g); });
}

DecayCurve corollary_plane_limit(const OperatorField& b, const CorollaryParams& params, const FourVector& n,
                                 double r, std::span<const double> gammas) {
  check_corollary(params);
  check_unit_spacelike(n);
  return decay_curve(b, params, gammas, [&](const FourVector& p, double g) { return plane_argument(p, n, r, g); });
}

double point_probe_margin(const QuantumModel& model, const CorollaryParams& params, const FourVector& q,
                          double gamma) {
  return probe_margin(model, params.probe.width,
                      [&](const FourVector& p) { return point_argument(p, q, params.delta, gamma); });
}

double plane_probe_margin(const QuantumModel& model, const CorollaryParams& params, const FourVector& n, double r,
                          double gamma) {
  check_unit_spacelike(n);
  return probe_margin(model, params.probe.width, [&](const FourVector& p) { return plane_argument(p, n, r, gamma); });
}

void require_bound_order(double k, double kappa) { check_bound_order(k, kappa); }

void validate_corollary(const CorollaryParams& params) { check_corollary(params); }

}  // namespace emt
