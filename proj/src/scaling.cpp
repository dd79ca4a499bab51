#include "emt/scaling.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace emt {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr std::array<double, 4> metric{1.0, -1.0, -1.0, -1.0};

double bump(double x) { return x < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

// Area of the unit sphere S^{k-1} in R^k.
double sphere_area(int k) {
  switch (k) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * M_PI;
    case 3:
      return 4.0 * M_PI;
    case 4:
      return 2.0 * M_PI * M_PI;
  }
  throw std::invalid_argument("sphere_area: dimension 1..4");
}

// integral of bump(|x|) over the unit ball of R^k.
double bump_mass(int k) {
  static const std::array<double, 4> table = [] {
    std::array<double, 4> t{};
    for (int dim = 1; dim <= 4; ++dim) {
      const int n = 4000;
      const double h = 1.0 / n;
      double s = 0.0;
      for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * std::pow(i * h, dim - 1) * bump(i * h);
      t[static_cast<std::size_t>(dim - 1)] = sphere_area(dim) * s * h / 3.0;
    }
    return t;
  }();
  return table[static_cast<std::size_t>(k - 1)];
}

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

using Mat4 = Eigen::Matrix4d;

Mat4 derivative(const Chart& c, const FourVector& d) {
  Mat4 j;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      double v = c.linear[i][k];
      for (int l = 0; l < 4; ++l) v += (c.quadratic[i][k][l] + c.quadratic[i][l][k]) * d[l];
      j(i, k) = v;
    }
  return j;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ChartPoint Chart::coordinates(const FourVector& p) const {
  const FourVector d = p - origin;
  ChartPoint c{};
  for (int i = 0; i < 4; ++i) {
    double v = 0.0;
    for (int j = 0; j < 4; ++j) {
      v += linear[i][j] * d[j];
      for (int k = 0; k < 4; ++k) v += quadratic[i][j][k] * d[j] * d[k];
    }
    c[i] = v;
  }
  return c;
}

FourVector Chart::momentum(const ChartPoint& target) const {
  Eigen::Vector4d t(target[0], target[1], target[2], target[3]);
  Mat4 l;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) l(i, j) = linear[i][j];
  Eigen::Vector4d d = l.partialPivLu().solve(t);
  for (int it = 0; it < 60; ++it) {
    const FourVector dv(d(0), d(1), d(2), d(3));
    const ChartPoint c = coordinates(origin + dv);
    const Eigen::Vector4d r = Eigen::Vector4d(c[0], c[1], c[2], c[3]) - t;
    if (r.norm() <= 1e-13 * (1.0 + t.norm())) return origin + dv;
    d -= derivative(*this, dv).partialPivLu().solve(r);
  }
  throw HypothesisError("chart: coordinate inverse did not converge");
}

double Chart::jacobian(const FourVector& p) const { return derivative(*this, p - origin).determinant(); }

Chart Chart::affine(const FourVector& q, double domain_radius) {
  Chart c;
  c.origin = q;
  c.domain_radius = domain_radius;
  for (int i = 0; i < 4; ++i) c.linear[i][i] = 1.0;
  return c;
}

Chart Chart::mass_shell(const FourVector& q, double mass, double domain_radius) {
  if (std::abs(minkowski_dot(q, q) - mass * mass) > 1e-9 * std::max(1.0, mass * mass))
    throw HypothesisError("mass-shell chart: origin is not on the shell");
  Chart c = affine(q, domain_radius);
  for (int j = 0; j < 4; ++j) {
    c.linear[0][j] = 2.0 * metric[j] * q[j];
    c.quadratic[0][j][j] = metric[j];
  }
  return c;
}

double ScalingFamily::psi(std::span<const double> rho) const {
  return bump(norm_of(rho) / rho_radius) * (1.0 + tilt * rho[0] / rho_radius);
}

double ScalingFamily::chi(std::span<const double> sigma) const {
  if (sigma.empty()) return 1.0;
  const int k = static_cast<int>(sigma.size());
  return bump(norm_of(sigma) / sigma_radius) / (std::pow(sigma_radius, k) * bump_mass(k));
}

double ScalingFamily::operator()(const FourVector& p, double gamma) const {
  if ((p - chart.origin).euclidean_norm() > chart.domain_radius) return 0.0;
  ChartPoint c = chart.coordinates(p);
  const auto mm = static_cast<std::size_t>(m);
  for (std::size_t i = 0; i < mm; ++i) c[i] *= gamma;
  const std::span<const double> all(c);
  const double v = psi(all.first(mm));
  if (v == 0.0) return 0.0;
  return std::pow(gamma, m) * v * chi(all.subspan(mm));
}

void ScalingFamily::validate() const {
  if (m < 1 || m > 4) throw HypothesisError("scaling family: codimension m must be 1..4");
  if (!(rho_radius > 0.0) || !(sigma_radius > 0.0) || !(std::abs(tilt) < 1.0) || !(chart.domain_radius > 0.0))
    throw HypothesisError("scaling family: bad radii or tilt");
  Mat4 l;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) l(i, j) = chart.linear[i][j];
  if (std::abs(l.determinant()) < 1e-12) throw HypothesisError("scaling family: chart is singular at the origin");

  // support of psi(rho) chi(sigma) at gamma = 1, sampled on a grid of the box
  constexpr int n = 7;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const std::array<int, 4> idx{a, b, c, d};
          ChartPoint x{};
          double rr = 0.0, rs = 0.0;
          for (int i = 0; i < 4; ++i) {
            const double r = i < m ? rho_radius : sigma_radius;
            x[static_cast<std::size_t>(i)] = r * (2.0 * idx[static_cast<std::size_t>(i)] / (n - 1) - 1.0);
            (i < m ? rr : rs) += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] / (r * r);
          }
          if (rr > 1.0 || rs > 1.0) continue;
          if ((chart.momentum(x) - chart.origin).euclidean_norm() > chart.domain_radius)
            throw HypothesisError("scaling family: chart-domain violation, support leaves U");
        }
}

Matrix scaled_test(const ScalingFamily& family, const QuantumModel& model, double gamma) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("scaled_test: gamma must be >= 1");
  const auto d = static_cast<Eigen::Index>(model.dim());
  Matrix w(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      w(i, j) = family(model.transfer(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), gamma);
  return w;
}

double chart_integral(const ScalingFamily& family, double gamma, int points) {
  if (points < 3) throw std::invalid_argument("chart_integral: need >= 3 points");
  std::array<double, 4> half{};
  double cell = 1.0;
  for (int i = 0; i < 4; ++i) {
    half[static_cast<std::size_t>(i)] = i < family.m ? family.rho_radius / gamma : family.sigma_radius;
    cell *= 2.0 * half[static_cast<std::size_t>(i)] / (points - 1);
  }
  const auto mm = static_cast<std::size_t>(family.m);
  double s = 0.0;
  std::array<int, 4> idx{};
  for (idx[0] = 0; idx[0] < points; ++idx[0])
    for (idx[1] = 0; idx[1] < points; ++idx[1])
      for (idx[2] = 0; idx[2] < points; ++idx[2])
        for (idx[3] = 0; idx[3] < points; ++idx[3]) {
          ChartPoint c{};
          for (std::size_t i = 0; i < 4; ++i) c[i] = half[i] * (2.0 * idx[i] / (points - 1) - 1.0);
          for (std::size_t i = 0; i < mm; ++i) c[i] *= gamma;
          const std::span<const double> all(c);
          s += std::abs(std::pow(gamma, family.m) * family.psi(all.first(mm)) * family.chi(all.subspan(mm)));
        }
  return s * cell;  // edge nodes carry zero weight: the profiles vanish there
}

DegreeEstimate estimate_degree(const std::function<double(double)>& evaluator, std::span<const double> gammas) {
  if (gammas.size() < 6) throw std::invalid_argument("estimate_degree: need at least 6 grid points");
  const double ratio = gammas[1] / gammas[0];
  if (!(gammas[0] > 0.0) || !(ratio > 1.0)) throw std::invalid_argument("estimate_degree: grid must increase");
  for (std::size_t i = 1; i < gammas.size(); ++i)
    if (std::abs(gammas[i] / gammas[i - 1] - ratio) > 1e-9 * ratio)
      throw std::invalid_argument("estimate_degree: grid must be geometric");

  DegreeEstimate e;
  e.gamma.assign(gammas.begin(), gammas.end());
  for (double g : gammas) e.value.push_back(evaluator(g));
  const std::size_t half = gammas.size() / 2;
  for (std::size_t i = half; i < e.value.size(); ++i)
    if (!(e.value[i] >= underflow_floor)) e.underflow = true;
  if (e.underflow) {
    e.degree = inf;
    return e;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    lx.push_back(std::log(gammas[i]));
    ly.push_back(std::log(std::max(e.value[i], std::numeric_limits<double>::min())));
  }
  e.slope_full = least_squares_slope(lx, ly);
  e.slope_last_half = least_squares_slope(std::span(lx).subspan(half), std::span(ly).subspan(half));
  e.degree = -e.slope_last_half;
  e.stable = std::abs(e.slope_last_half - e.slope_full) < 0.1;
  return e;
}

int DeltaCombination::max_order() const {
  int l = -1;
  for (const auto& [order, coeff] : terms)
    if (coeff != 0.0) l = std::max(l, order);
  if (l < 0) throw std::invalid_argument("delta combination: no nonzero term");
  return l;
}

std::function<double(double)> delta_evaluator(const DeltaCombination& t, const ScalingFamily& family) {
  if (t.m != family.m) throw std::invalid_argument("delta_evaluator: codimension mismatch");
  family.validate();
  const double h = 0.05 * family.rho_radius;
  auto f = [&family, m = t.m](double x) {
    std::vector<double> rho(static_cast<std::size_t>(m), 0.0);
    rho[0] = x;
    return family.psi(rho);
  };
  std::vector<std::pair<int, double>> derivs;  // (l, c_l (-1)^l psi^{(l)}(0))
  for (const auto& [l, c] : t.terms) {
    double d = 0.0;
    switch (l) {
      case 0:
        d = f(0);
        break;
      case 1:
        d = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
        break;
      case 2:
        d = (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
        break;
      case 3:
        d = (-f(3 * h) + 8 * f(2 * h) - 13 * f(h) + 13 * f(-h) - 8 * f(-2 * h) + f(-3 * h)) / (8 * h * h * h);
        break;
      default:
        throw std::invalid_argument("delta_evaluator: derivative order must be 0..3");
    }
    derivs.emplace_back(l, (l % 2 ? -c : c) * d);
  }
  return [derivs, m = t.m](double gamma) {
    double s = 0.0;
    for (const auto& [l, v] : derivs) s += v * std::pow(gamma, m + l);
    return std::abs(s);
  };
}

std::function<double(double)> homogeneous_evaluator(double a, const ScalingFamily& family) {
  family.validate();
  const int m = family.m;
  if (!(a > -m)) throw HypothesisError("homogeneous_evaluator: |rho|^a is not locally integrable for a <= -m");
  const double r = family.rho_radius;
  return [a, m, r](double gamma) {
    struct Ctx {
      double a, gamma, r;
      int m;
    } ctx{a, gamma, r, m};
    gsl_function fn;
    fn.params = &ctx;
    fn.function = [](double x, void* p) {
      const auto& c = *static_cast<Ctx*>(p);
      return std::pow(x, c.a + c.m - 1) * bump(c.gamma * x / c.r);
    };
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
        gsl_integration_workspace_alloc(200), &gsl_integration_workspace_free);
    double result = 0.0, err = 0.0;
    gsl_integration_qags(&fn, 0.0, r / gamma, 0.0, 1e-11, 200, ws.get(), &result, &err);
    // the tilt is odd in rho^1 and integrates to zero
    return std::abs(std::pow(gamma, m) * sphere_area(m) * result);
  };
}

std::function<double(double)> model_evaluator(const OperatorField& b, const ScalingFamily& family,
                                              std::optional<EnergyWeight> g) {
  family.validate();
  if (g) g->validate(FrequencySign::Plus);
  return [b, family, g](double gamma) {
    const Matrix m = b.matrix().cwiseProduct(scaled_test(family, b.model(), gamma));
    return operator_norm(g ? apply_energy_weight(m, b.model(), *g) : m);
  };
}

double degree_lower_bounds(int m, std::optional<double> kappa, bool q_is_zero) {
  if (m < 1 || m > 4) throw HypothesisError("degree bounds: m must be 1..4");
  if (!kappa) return -(m + 4.0) / 2.0;
  if (q_is_zero) throw HypothesisError("degree bounds: the kappa bound needs q != 0");
  if (!(*kappa > 0.0)) throw HypothesisError("degree bounds: kappa must be > 0");
  return *kappa < 3.0 ? -(m + 4.0 - *kappa) / 2.0 : -(m + 1.0) / 2.0;
}

std::vector<AllowedSingularity> classify_allowed_singularities(double kappa) {
  if (!(kappa > 0.0)) throw HypothesisError("classifier: kappa must be > 0");
  const double limit = kappa >= 3.0 ? 1.0 : 4.0 - kappa;
  std::vector<AllowedSingularity> out;
  for (int m = 1; m <= 4; ++m)
    for (int l = 0; m + 2 * l <= limit + 1e-12; ++l) out.push_back({m, l, false});
  out.push_back({4, 0, true});
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.m, x.l, x.at_origin) < std::tie(y.m, y.l, y.at_origin);
  });
  return out;
}

MonotonicityResult remark_monotonicity_check(const OperatorField& b, const DiscreteMeasure& nu,
                                             const ScalingFamily& family, std::span<const double> gammas) {
  MonotonicityResult r;
  r.base = estimate_degree(model_evaluator(b, family), gammas);
  r.smeared = estimate_degree(model_evaluator(b.smear(nu), family), gammas);
  r.pass = r.smeared.degree >= r.base.degree - 0.2;
  return r;
}

OperatorField shell_field(std::shared_ptr<const QuantumModel> model, double mass) {
  if (model->dim() == 0 || !(model->spectrum()[0] == FourVector{}))
    throw HypothesisError("shell_field: state 0 must have zero momentum");
  std::vector<std::tuple<std::size_t, std::size_t, cd>> entries;
  for (std::size_t m = 1; m < model->dim(); ++m) {
    const auto& p = model->spectrum()[m];
    if (std::abs(minkowski_dot(p, p) - mass * mass) <= 1e-9 * std::max(1.0, mass * mass)) entries.emplace_back(m, 0, 1.0);
  }
  return OperatorField::sparse(std::move(model), entries);
}

}  // namespace emt
