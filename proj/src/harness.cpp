#include "emt/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "emt/appendix.hpp"
#include "emt/bounds.hpp"
#include "emt/dyadic.hpp"
#include "emt/frac.hpp"
#include "emt/rng.hpp"
#include "emt/scaling.hpp"

namespace emt {

namespace {

// ---------------------------------------------------------------- params

double num(const json& p, const std::string& key) { return to_double(p.at(key)); }

int integer(const json& p, const std::string& key) {
  const auto& v = p.at(key);
  if (!v.is_number_integer()) throw std::invalid_argument(key + " must be an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& p, const std::string& key) {
  std::vector<double> out;
  for (const auto& v : p.at(key)) out.push_back(to_double(v));
  return out;
}

std::string text(const json& p, const std::string& key) { return p.at(key).get<std::string>(); }

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_count(const json& p, const std::string& key, int least) {
  require(integer(p, key) >= least, key + " must be >= " + std::to_string(least));
}

EnvelopeParams envelope_of(const json& p) {
  EnvelopeParams e{num(p, "lambda"), num(p, "kappa")};
  e.validate();
  return e;
}

PartKind part_of(const std::string& s) {
  if (s == "plus") return PartKind::Plus;
  if (s == "minus") return PartKind::Minus;
  if (s == "momentum") return PartKind::Momentum;
  throw std::invalid_argument("unknown part '" + s + "' (plus, minus, momentum)");
}

EnergyWeight weight_of(const json& p, PartKind part) {
  if (part == PartKind::Minus) {
    const auto& w = p.at("minus_weight");
    return EnergyWeight::minus(num(w, "lambda"), num(w, "a"), num(w, "b"));
  }
  const auto& w = p.at("plus_weight");
  return EnergyWeight::plus(num(w, "lambda"), num(w, "s"));
}

std::vector<double> gamma_schedule(const json& p) {
  require(num(p, "gamma_first") >= 1.0, "gamma_first must be >= 1");
  require(num(p, "gamma_last") > num(p, "gamma_first"), "gamma_last must exceed gamma_first");
  require_count(p, "gamma_count", 2);
  return geometric_schedule(num(p, "gamma_first"), num(p, "gamma_last"), integer(p, "gamma_count"));
}

// ---------------------------------------------------------------- helpers

DiscreteMeasure random_measure(std::mt19937_64& rng, int atoms, double box) {
  std::uniform_real_distribution<double> u(-box, box);
  std::normal_distribution<double> g;
  std::vector<Atom> a;
  for (int i = 0; i < atoms; ++i) {
    const FourVector x(u(rng), u(rng), u(rng), u(rng));
    const cd w(g(rng), g(rng));
    a.push_back({x, w});
  }
  return DiscreteMeasure(std::move(a));
}

std::vector<DiscreteMeasure> random_measures(std::uint64_t seed, const std::string& tag, int count, int atoms,
                                             double box) {
  std::vector<DiscreteMeasure> out;
  for (int i = 0; i < count; ++i) {
    auto rng = stream(seed, tag, static_cast<std::uint64_t>(i));
    out.push_back(random_measure(rng, atoms, box));
  }
  return out;
}

std::shared_ptr<const QuantumModel> share(QuantumModel m) { return std::make_shared<const QuantumModel>(std::move(m)); }

OperatorField field_of(const ModelContext& ctx, std::uint64_t seed) {
  if (ctx.field) {
    if (static_cast<std::size_t>(ctx.field->rows()) != ctx.model->dim() ||
        static_cast<std::size_t>(ctx.field->cols()) != ctx.model->dim())
      throw std::invalid_argument("field dimension does not match the model");
    return OperatorField(ctx.model, *ctx.field);
  }
  auto rng = stream(seed, "field");
  return OperatorField::random(ctx.model, rng);
}

std::string mode_name(BoundMode m) {
  switch (m) {
    case BoundMode::Exact: return "exact";
    case BoundMode::Protocol: return "protocol";
    case BoundMode::Custom: return "custom";
  }
  return "?";
}

json report_json(const BoundReport& r) {
  json fams = json::array();
  for (const auto& f : r.families)
    fams.push_back({{"family", f.family},
                    {"count", f.count},
                    {"calibration_count", f.calibration_count},
                    {"sup_ratio", number(f.sup_ratio)},
                    {"calibration_sup", number(f.calibration_sup)},
                    {"holdout_sup", number(f.holdout_sup)},
                    {"violations", f.violations},
                    {"pass", f.pass}});
  return {{"id", r.id},
          {"description", r.description},
          {"mode", mode_name(r.mode)},
          {"margin", number(r.margin)},
          {"instances", r.instances.size()},
          {"families", fams},
          {"sup_ratio", number(r.sup_ratio)},
          {"violations", r.violations},
          {"invariant_failures", r.invariant_failures},
          {"notes", r.notes},
          {"pass", r.pass}};
}

Table report_table(const BoundReport& r, const std::string& name) {
  Table t{name, {"family", "index", "calibration", "lhs", "rhs", "ratio"}, {}};
  for (const auto& i : r.instances)
    t.rows.push_back({i.family, std::to_string(i.index), i.calibration ? "1" : "0", csv_number(i.lhs),
                      csv_number(i.rhs), csv_number(i.ratio)});
  return t;
}

SuiteOutput bound_output(const BoundReport& r, json extra = json::object()) {
  SuiteOutput out;
  out.result = report_json(r);
  for (auto& [k, v] : extra.items()) out.result[k] = v;
  out.pass = r.pass;
  out.tables.push_back(report_table(r, "instances"));
  return out;
}

// ---------------------------------------------------------------- buchholz

void validate_buchholz(const json& p) {
  require_count(p, "trials", 0);
  require_count(p, "min_dim", 1);
  require(integer(p, "max_dim") >= integer(p, "min_dim"), "max_dim must be >= min_dim");
  require(!p.at("orders").empty(), "orders must not be empty");
  for (const auto& n : p.at("orders")) require(n.is_number_integer() && n.get<int>() >= 1, "orders must be integers >= 1");
  require(num(p, "tolerance") > 0.0, "tolerance must be > 0");
}

SuiteOutput run_buchholz(const json& p, std::uint64_t seed, const ModelContext&) {
  const int trials = integer(p, "trials");
  const auto orders = p.at("orders").get<std::vector<int>>();
  const double tol = num(p, "tolerance");
  std::uniform_int_distribution<int> dim(integer(p, "min_dim"), integer(p, "max_dim"));
  std::uniform_int_distribution<std::size_t> pick(0, orders.size() - 1);

  SuiteOutput out;
  Table t{"trials", {"trial", "dim", "n", "slack_c", "slack_adj", "null_dim", "ambiguous", "holds"}, {}};
  int failures = 0, ambiguous = 0;
  double max_c = -INFINITY, max_adj = -INFINITY;
  for (int i = 0; i < trials; ++i) {
    auto rng = stream(seed, "buchholz", static_cast<std::uint64_t>(i));
    const int d = dim(rng);
    const int n = orders[pick(rng)];
    const auto r = buchholz_check(random_buchholz_matrix(static_cast<std::size_t>(d), rng), n);
    const bool ok = r.holds(tol);
    failures += !ok;
    ambiguous += r.ambiguous;
    max_c = std::max(max_c, r.slack_c());
    max_adj = std::max(max_adj, r.slack_adj());
    t.rows.push_back({std::to_string(i), std::to_string(d), std::to_string(n), csv_number(r.slack_c()),
                      csv_number(r.slack_adj()), std::to_string(r.null_dim), r.ambiguous ? "1" : "0",
                      ok ? "1" : "0"});
  }
  Matrix jordan = Matrix::Zero(2, 2);
  jordan(0, 1) = 1.0;
  const auto j = buchholz_check(jordan, 2);
  const double gap = std::abs(j.lhs_c - j.rhs_c) / j.scale;
  const bool equal = gap <= 1e-12;

  out.result = {{"trials", trials},
                {"failures", failures},
                {"ambiguous", ambiguous},
                {"max_slack_c", number(trials ? max_c : 0.0)},
                {"max_slack_adj", number(trials ? max_adj : 0.0)},
                {"jordan", {{"n", 2}, {"lhs", number(j.lhs_c)}, {"rhs", number(j.rhs_c)}, {"gap", number(gap)},
                            {"equality", equal}}}};
  out.pass = failures == 0 && equal;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------- telescoping

void validate_dyadic(const json& p) {
  require(!p.at("ks").empty() && !p.at("Ns").empty(), "ks and Ns must not be empty");
  for (double k : numbers(p, "ks")) if (!(k > 0.0)) throw HypothesisError("telescoping: k must be > 0");
  for (const auto& n : p.at("Ns")) require(n.is_number_integer() && n.get<int>() >= 1, "Ns must be integers >= 1");
  require(num(p, "lambda") > 0.0, "lambda must be > 0");
  require(num(p, "tolerance") > 0.0, "tolerance must be > 0");
  require(integer(p, "grid_log2") >= 10 && integer(p, "grid_log2") <= 24, "grid_log2 must lie in [10, 24]");
}

SuiteOutput run_dyadic(const json& p, std::uint64_t, const ModelContext&) {
  const auto Ns = p.at("Ns").get<std::vector<int>>();
  const int n_max = *std::max_element(Ns.begin(), Ns.end());
  const Mollifier m{num(p, "lambda")};
  const DyadicGrid grid{std::size_t{1} << integer(p, "grid_log2"), num(p, "spacing_over_lambda")};
  const double tol = num(p, "tolerance");

  SuiteOutput out;
  out.pass = true;
  Table t{"rows", {"k", "N", "ratio", "expected", "tolerance", "pass"}, {}};
  json rows = json::array();
  for (double k : numbers(p, "ks")) {
    const auto sweep = telescoping_sweep(m, k, n_max, grid, tol);
    for (const auto& r : sweep) {
      if (std::find(Ns.begin(), Ns.end(), r.N) == Ns.end()) continue;
      out.pass = out.pass && r.pass;
      t.rows.push_back({csv_number(k), std::to_string(r.N), csv_number(r.ratio), csv_number(r.expected),
                        csv_number(r.tolerance), r.pass ? "1" : "0"});
      rows.push_back({{"k", number(k)},
                      {"N", r.N},
                      {"ratio", number(r.ratio)},
                      {"expected", number(r.expected)},
                      {"error", number(std::abs(r.ratio - r.expected))},
                      {"rescale_error", number(r.rescale_error)},
                      {"pass", r.pass}});
    }
  }
  out.result = {{"rows", rows}};
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------- derivatives

void validate_derivatives(const json& p) {
  require_count(p, "signals", 0);
  require_count(p, "fields", 0);
  require_count(p, "modes", 1);
  require_count(p, "dim", 2);
  require(integer(p, "points") >= 16 && integer(p, "points") % 2 == 0, "points must be even and >= 16");
  require(2 * integer(p, "max_frequency") < integer(p, "points"), "max_frequency must stay below Nyquist");
  for (double k : numbers(p, "orders")) if (!(k > 0.0)) throw HypothesisError("fractional order must be > 0");
  require(num(p, "spacing") > 0.0, "spacing must be > 0");
  require_count(p, "samples", 4);
}

SuiteOutput run_derivatives(const json& p, std::uint64_t seed, const ModelContext&) {
  const int points = integer(p, "points");
  const int fmax = integer(p, "max_frequency");
  const double tol = num(p, "tolerance"), ftol = num(p, "filter_tolerance");

  SuiteOutput out;
  Table sig{"signals", {"signal", "order", "relative_l2"}, {}};
  double worst[3] = {0.0, 0.0, 0.0};
  // Trigonometric polynomials on one period: band-limited and exactly periodic.
  for (int s = 0; s < integer(p, "signals"); ++s) {
    auto rng = stream(seed, "derivatives-signal", static_cast<std::uint64_t>(s));
    std::uniform_int_distribution<int> freq(-fmax, fmax);
    std::normal_distribution<double> g;
    std::vector<std::pair<int, cd>> modes;
    for (int i = 0; i < integer(p, "modes"); ++i) {
      const int w = freq(rng);
      const double re = g(rng), im = g(rng);
      modes.emplace_back(w, cd(re, im));
    }
    const double dt = 2.0 * M_PI / points;
    Signal f{-M_PI, dt, std::vector<cd>(static_cast<std::size_t>(points))};
    std::vector<cd> d1(f.size()), d2(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
      const double t = f.time(j);
      for (const auto& [w, a] : modes) {
        const cd e = a * std::polar(1.0, -w * t);
        f.samples[j] += e;
        d1[j] += cd(0.0, -w) * e;
        d2[j] += -double(w) * w * e;
      }
    }
    for (int order = 1; order <= 2; ++order) {
      const auto plus = fractional_part(f, order, FrequencySign::Plus);
      const auto minus = fractional_part(f, order, FrequencySign::Minus);
      std::vector<cd> sum(f.size());
      for (std::size_t j = 0; j < f.size(); ++j) sum[j] = plus.samples[j] + minus.samples[j];
      const auto& exact = order == 1 ? d1 : d2;
      const double err = relative_l2(sum, exact);
      worst[order] = std::max(worst[order], err);
      sig.rows.push_back({std::to_string(s), std::to_string(order), csv_number(err)});
    }
  }

  Table fld{"fields", {"field", "order", "convention", "plus_error", "minus_error"}, {}};
  double worst_filter = 0.0;
  const double spacing = num(p, "spacing");
  const auto lattice = share(QuantumModel::lattice(static_cast<std::size_t>(integer(p, "dim")), spacing));
  for (int i = 0; i < integer(p, "fields"); ++i) {
    auto rng = stream(seed, "derivatives-field", static_cast<std::uint64_t>(i));
    const auto b = OperatorField::random(lattice, rng);
    for (double k : numbers(p, "orders")) {
      for (auto conv : {BohrConvention::MinusLowersEnergy, BohrConvention::MinusRaisesEnergy}) {
        const auto [tp, tm] =
            frequency_parts_time_domain(b, k, 2.0 * M_PI / spacing, static_cast<std::size_t>(integer(p, "samples")), conv);
        const auto [cp, cm] = b.frequency_parts(k, conv);
        auto rel = [](const Matrix& a, const Matrix& ref) {
          const double n = ref.norm();
          return n > 0.0 ? (a - ref).norm() / n : (a - ref).norm();
        };
        const double ep = rel(tp.matrix(), cp.matrix()), em = rel(tm.matrix(), cm.matrix());
        worst_filter = std::max({worst_filter, ep, em});
        fld.rows.push_back({std::to_string(i), csv_number(k),
                            conv == BohrConvention::MinusLowersEnergy ? "minus-lowers" : "minus-raises",
                            csv_number(ep), csv_number(em)});
      }
    }
  }
  out.result = {{"first_derivative_error", number(worst[1])},
                {"second_derivative_error", number(worst[2])},
                {"filter_error", number(worst_filter)},
                {"tolerance", number(tol)},
                {"filter_tolerance", number(ftol)}};
  out.pass = worst[1] < tol && worst[2] < tol && worst_filter <= ftol;
  out.tables.push_back(std::move(sig));
  out.tables.push_back(std::move(fld));
  return out;
}

// ---------------------------------------------------------------- dyadic split

void validate_dyadic_split(const json& p) {
  require_count(p, "fields", 0);
  require_count(p, "dim", 2);
  require_count(p, "N_max", 0);
  if (!(num(p, "k") > 0.0)) throw HypothesisError("dyadic split: k must be > 0");
  require(num(p, "lambda") > 0.0 && num(p, "energy_scale") > 0.0, "lambda and energy_scale must be > 0");
}

SuiteOutput run_dyadic_split(const json& p, std::uint64_t seed, const ModelContext&) {
  const double k = num(p, "k");
  const Mollifier m{num(p, "lambda")};
  const double eta_l1 = filtered_cutoff_l1(m, k, DyadicGrid{std::size_t{1} << 16, 0.5});
  const double tol = num(p, "reconstruction_tolerance");

  SuiteOutput out;
  out.pass = true;
  Table t{"splits",
          {"field", "N", "reconstruction_error", "residual_identity_error", "residual_norm", "stated_bound",
           "sharp_bound", "pass"},
          {}};
  double worst_recon = 0.0, worst_identity = 0.0, worst_margin = 0.0;
  for (int i = 0; i < integer(p, "fields"); ++i) {
    auto rng = stream(seed, "dyadic-split", static_cast<std::uint64_t>(i));
    const auto model = share(QuantumModel::random_cone(static_cast<std::size_t>(integer(p, "dim")), rng,
                                                       num(p, "energy_scale")));
    const auto b = OperatorField::random(model, rng);
    const auto plus = b.frequency_part(k, FrequencySign::Plus);
    const double scale = plus.matrix().cwiseAbs().maxCoeff();
    for (int N = 1; N <= integer(p, "N_max"); ++N) {
      const auto s = dyadic_operator_split(b, k, N, m, eta_l1);
      Matrix sum = s.high.matrix() + s.residual.matrix();
      for (const auto& band : s.bands) sum += band.matrix();
      const double recon = scale > 0.0 ? (sum - plus.matrix()).cwiseAbs().maxCoeff() / scale : 0.0;
      // what the telescoping leaves behind: eta(2^N w) B^k_+
      const auto expected = plus.filter_transfers([&](const FourVector& t) { return cd(m.eta(std::ldexp(t[0], N))); });
      const double identity =
          scale > 0.0 ? (s.residual.matrix() - expected.matrix()).cwiseAbs().maxCoeff() / scale : 0.0;
      const bool ok = recon <= tol && identity <= tol && s.residual_norm <= s.stated_bound;
      out.pass = out.pass && ok;
      worst_recon = std::max(worst_recon, recon);
      worst_identity = std::max(worst_identity, identity);
      if (s.stated_bound > 0.0) worst_margin = std::max(worst_margin, s.residual_norm / s.stated_bound);
      t.rows.push_back({std::to_string(i), std::to_string(N), csv_number(recon), csv_number(identity),
                        csv_number(s.residual_norm), csv_number(s.stated_bound), csv_number(s.sharp_bound),
                        ok ? "1" : "0"});
    }
  }
  out.result = {{"eta_l1", number(eta_l1)},
                {"max_reconstruction_error", number(worst_recon)},
                {"max_residual_identity_error", number(worst_identity)},
                {"max_residual_over_bound", number(worst_margin)}};
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------- bounds on a model

void validate_envelope(const json& p) {
  envelope_of(p);
  require_count(p, "pairs", 1);
  require_count(p, "atoms", 1);
}

SuiteOutput run_envelope(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  const auto b = field_of(ctx, seed);
  const auto first = random_measures(seed, "envelope-first", integer(p, "pairs"), integer(p, "atoms"), num(p, "box"));
  const auto second = random_measures(seed, "envelope-second", integer(p, "pairs"), integer(p, "atoms"), num(p, "box"));
  std::vector<MeasurePair> pairs;
  for (std::size_t i = 0; i < first.size(); ++i) pairs.push_back({first[i], second[i]});
  return bound_output(commutator_envelope_check(b, b.adjoint(), pairs, envelope_of(p), ctx.family));
}

void validate_thm_bk(const json& p) {
  const auto e = envelope_of(p);
  require_bound_order(num(p, "k"), e.kappa);
  require(!p.at("energies").empty(), "energies must not be empty");
  for (double E : numbers(p, "energies")) if (!(E >= 0.0)) throw HypothesisError("energies must be >= 0");
  for (const auto& s : p.at("signs")) require(s == "plus" || s == "minus", "signs are plus or minus");
  require_count(p, "measures", 1);
  require_count(p, "atoms", 1);
}

BoundReport bk_report(const OperatorField& b, const json& p, FrequencySign sign, std::span<const DiscreteMeasure> nus,
                      const std::string& family, bool fit_kappa) {
  BkCheckParams bk;
  bk.k = num(p, "k");
  bk.envelope = envelope_of(p);
  bk.sign = sign;
  bk.energies = numbers(p, "energies");
  std::vector<FourVector> grid;
  if (fit_kappa) grid = envelope_grid(num(p, "grid_extent"), integer(p, "grid_steps"));
  return theorem_Bk_check(b, bk, nus, family, grid);
}

SuiteOutput run_thm_bk(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  const auto b = field_of(ctx, seed);
  const auto nus = random_measures(seed, "thm-bk", integer(p, "measures"), integer(p, "atoms"), num(p, "box"));
  BoundReport all;
  all.id = "thm-bk";
  all.description = "||B^k_+-(nu) P(E)|| / sqrt(c_+-(E) J(nu)), both signs";
  all.margin = num(p, "margin");
  double annihilation = 0.0;
  for (const auto& s : p.at("signs")) {
    const auto sign = s == "plus" ? FrequencySign::Plus : FrequencySign::Minus;
    const auto r = bk_report(b, p, sign, nus, ctx.family + "/" + s.get<std::string>(), sign == FrequencySign::Plus);
    if (sign == FrequencySign::Minus)
      for (const auto& i : r.instances)
        if (i.rhs == 0.0) annihilation = std::max(annihilation, i.lhs);
    all.merge(r);
  }
  all.finalize();
  return bound_output(all, {{"minus_at_zero_energy", number(annihilation)}});
}

void validate_thm_gb(const json& p) {
  const auto e = envelope_of(p);
  require_bound_order(num(p, "k"), e.kappa);
  for (const auto& s : p.at("parts")) {
    const auto part = part_of(s.get<std::string>());
    weight_of(p, part).validate(part == PartKind::Minus ? FrequencySign::Minus : FrequencySign::Plus);
  }
  require_count(p, "measures", 1);
  require_count(p, "atoms", 1);
}

BoundReport gb_report(const OperatorField& b, const json& p, PartKind part, std::span<const DiscreteMeasure> nus,
                      const std::string& family) {
  GBCheckParams gb;
  gb.k = num(p, "k");
  gb.envelope = envelope_of(p);
  gb.part = part;
  gb.weight = weight_of(p, part);
  return theorem_GB_check(b, gb, nus, family);
}

SuiteOutput run_thm_gb(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  const auto b = field_of(ctx, seed);
  const auto nus = random_measures(seed, "thm-gb", integer(p, "measures"), integer(p, "atoms"), num(p, "box"));
  BoundReport all;
  all.id = "thm-gb";
  all.description = "||B^k_e(nu) G_e(P0)|| / sqrt(J(nu)) for each part";
  all.margin = num(p, "margin");
  for (const auto& s : p.at("parts")) {
    const auto name = s.get<std::string>();
    all.merge(gb_report(b, p, part_of(name), nus, ctx.family + "/" + name));
  }
  all.finalize();
  return bound_output(all);
}

void validate_protocol(const json& p) {
  validate_thm_bk(p);
  validate_thm_gb(p);
  for (const auto& f : p.at("families"))
    require(f == "random-cone" || f == "lattice" || f == "mass-shell", "families are random-cone, lattice, mass-shell");
  require_count(p, "dim", 2);
  require_count(p, "fields", 1);
  require(num(p, "margin") >= 1.0, "margin must be >= 1");
}

std::shared_ptr<const QuantumModel> family_model(const std::string& family, std::size_t dim, std::uint64_t seed) {
  if (family == "lattice") return share(QuantumModel::lattice(dim));
  if (family == "mass-shell") return share(QuantumModel::mass_shell(dim));
  auto rng = stream(seed, "protocol-model/" + family);
  return share(QuantumModel::random_cone(dim, rng));
}

SuiteOutput run_protocol(const json& p, std::uint64_t seed, const ModelContext&) {
  BoundReport all;
  all.id = "thm-protocol";
  all.description = "energy-cutoff and spectral-weight bound ratios pooled per model family, calibration/holdout split";
  all.margin = num(p, "margin");
  const int fields = integer(p, "fields");
  json annihilation = json::object();
  bool annihilated = true;
  for (const auto& fj : p.at("families")) {
    const auto family = fj.get<std::string>();
    const auto model = family_model(family, static_cast<std::size_t>(integer(p, "dim")), seed);
    double worst = 0.0;
    for (int i = 0; i < fields; ++i) {
      auto rng = stream(seed, "protocol-field/" + family, static_cast<std::uint64_t>(i));
      const auto b = OperatorField::random(model, rng);
      const auto nus = random_measures(seed, "protocol-measures/" + family + "/" + std::to_string(i),
                                       integer(p, "measures"), integer(p, "atoms"), num(p, "box"));
      all.merge(bk_report(b, p, FrequencySign::Plus, nus, family, false));
      const auto minus = bk_report(b, p, FrequencySign::Minus, nus, family, false);
      for (const auto& inst : minus.instances)
        if (inst.rhs == 0.0) worst = std::max(worst, inst.lhs);
      all.merge(minus);
      for (const auto& s : p.at("parts")) all.merge(gb_report(b, p, part_of(s.get<std::string>()), nus, family));
    }
    const bool zero = model->has_zero_energy();
    annihilation[family] = {{"zero_in_spectrum", zero}, {"max_minus_norm", number(worst)}};
    if (zero) annihilated = annihilated && worst <= num(p, "annihilation_tolerance");
  }
  all.finalize();
  bool enough = true;
  for (const auto& f : all.families) enough = enough && f.count >= static_cast<std::size_t>(integer(p, "min_instances"));
  auto out = bound_output(all, {{"annihilation", annihilation}, {"enough_instances", enough}});
  out.pass = all.pass && annihilated && enough;
  return out;
}

SmearingProfile profile_of(const json& p) {
  SmearingProfile chi;
  const auto kind = text(p, "profile");
  require(kind == "gaussian" || kind == "power", "profile is gaussian or power");
  chi.decay = kind == "gaussian" ? SmearingProfile::Decay::Gaussian : SmearingProfile::Decay::Power;
  chi.time_only = p.at("time_only").get<bool>();
  chi.scale = num(p, "scale");
  chi.exponent = num(p, "exponent");
  chi.points = integer(p, "points");
  chi.half_width = num(p, "half_width");
  return chi;
}

void validate_stability(const json& p) {
  const auto e = envelope_of(p);
  profile_of(p).validate(e.kappa);
  require(num(p, "extent") > 0.0, "extent must be > 0");
  require_count(p, "steps", 1);
}

SuiteOutput run_stability(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  StabilityParams sp;
  sp.envelope = envelope_of(p);
  sp.extent = num(p, "extent");
  sp.steps = integer(p, "steps");
  sp.growth_tolerance = num(p, "growth_tolerance");
  return bound_output(stability_check(field_of(ctx, seed), profile_of(p), sp, ctx.family));
}

SobolevParams sobolev_of(const json& p) {
  SobolevParams sp;
  sp.k = num(p, "k");
  sp.envelope = envelope_of(p);
  sp.part = part_of(text(p, "part"));
  sp.weight = weight_of(p, sp.part);
  sp.tau = num(p, "tau");
  sp.grid = {integer(p, "grid_points"), num(p, "spacing")};
  return sp;
}

void validate_sobolev(const json& p) {
  const auto sp = sobolev_of(p);
  check_sobolev_order(sp.k, sp.envelope.kappa);
  sp.weight.validate(sp.part == PartKind::Minus ? FrequencySign::Minus : FrequencySign::Plus);
  require_count(p, "profiles", 1);
  require_count(p, "grid_points", 2);
}

SuiteOutput run_sobolev(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  std::vector<SpatialGaussian> profiles;
  for (int i = 0; i < integer(p, "profiles"); ++i) {
    auto rng = stream(seed, "sobolev-profile", static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g;
    SpatialGaussian f;
    for (auto& c : f.centre) c = u(rng);
    f.width = 0.6 + 0.3 * (u(rng) + 1.0);
    for (auto& w : f.wave) w = u(rng);
    const double re = g(rng), im = g(rng);
    f.amplitude = cd(re, im);
    profiles.push_back(f);
  }
  return bound_output(sobolev_bound_check(field_of(ctx, seed), sobolev_of(p), profiles, ctx.family));
}

WeightedParams weighted_of(const json& p) {
  WeightedParams w;
  w.k = num(p, "k");
  w.envelope = envelope_of(p);
  w.part = part_of(text(p, "part"));
  w.weight = weight_of(p, w.part);
  const auto form = text(p, "form");
  if (form == "time") w.form = WeightedForm::TimeWeight;
  else if (form == "spectral") w.form = WeightedForm::SpectralDerivative;
  else if (form == "space-time") w.form = WeightedForm::SpaceTimeWeight;
  else throw std::invalid_argument("form is time, spectral or space-time");
  w.sigma = num(p, "sigma");
  w.beta = num(p, "beta");
  w.tau = num(p, "tau");
  return w;
}

void validate_weighted(const json& p) {
  weighted_of(p).validate();
  require_count(p, "packets", 1);
}

SuiteOutput run_weighted(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  std::vector<GaussianPacket> packets;
  for (int i = 0; i < integer(p, "packets"); ++i) {
    auto rng = stream(seed, "weighted-packet", static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GaussianPacket g;
    for (std::size_t m = 0; m < 4; ++m) g.centre[m] = 2.0 * u(rng);
    for (auto& s : g.widths) s = 0.6 + 0.4 * (u(rng) + 1.0);
    g.wave[0] = 1.5 * (u(rng) + 1.0);
    for (std::size_t m = 1; m < 4; ++m) g.wave[m] = u(rng);
    packets.push_back(g);
  }
  return bound_output(weighted_bound_check(field_of(ctx, seed), weighted_of(p), packets, ctx.family));
}

// ---------------------------------------------------------------- corollaries

CorollaryParams corollary_of(const json& p) {
  CorollaryParams c;
  c.k = num(p, "k");
  c.kappa = num(p, "kappa");
  c.delta = num(p, "delta");
  c.probe.width = num(p, "width");
  const auto& w = p.at("plus_weight");
  c.weight = EnergyWeight::plus(num(w, "lambda"), num(w, "s"));
  return c;
}

void validate_corollary_suite(const json& p) {
  validate_corollary(corollary_of(p));
  gamma_schedule(p);
  require_count(p, "generic", 0);
  require_count(p, "miss", 0);
  require_count(p, "max_draws", 1);
}

struct TransferBox {
  FourVector lo, hi;
  double spatial = 0.0;  // largest spatial norm
};

TransferBox transfer_box(const QuantumModel& model) {
  TransferBox box;
  for (std::size_t m = 0; m < model.dim(); ++m)
    for (std::size_t n = 0; n < model.dim(); ++n) {
      const auto t = model.transfer(m, n);
      for (std::size_t i = 0; i < 4; ++i) {
        box.lo[i] = std::min(box.lo[i], t[i]);
        box.hi[i] = std::max(box.hi[i], t[i]);
      }
      box.spatial = std::max(box.spatial, t.spatial_norm());
    }
  return box;
}

struct Probe {
  std::string kind;
  std::string where;  // human-readable probe position
  DecayCurve curve;
  double margin = 0.0;
};

SuiteOutput corollary_output(const json& p, const std::string& suite, std::vector<Probe> probes,
                             const std::vector<double>& gammas) {
  SuiteOutput out;
  out.pass = true;
  Table t{"curves", {"probe", "kind", "gamma", "value", "relative"}, {}};
  json list = json::array();
  LogLogPlot generic{suite + "_generic", suite + ": generic probes", "gamma", "value / value at gamma = 1", {}};
  LogLogPlot miss{suite + "_miss", suite + ": probes missing every transfer", "gamma", "value / value at gamma = 1", {}};
  int generic_count = 0, generic_decayed = 0, miss_count = 0, miss_decayed = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& pr = probes[i];
    const bool is_miss = pr.kind == "miss";
    const bool ok = is_miss ? pr.curve.final_ratio < num(p, "miss_fraction") && !pr.curve.sustained_growth
                            : pr.curve.decays(num(p, "decay_fraction"));
    (is_miss ? miss_count : generic_count) += 1;
    (is_miss ? miss_decayed : generic_decayed) += ok;
    out.pass = out.pass && ok;
    Series s{std::to_string(i), {}, {}};
    const double first = pr.curve.value.front();
    for (std::size_t g = 0; g < pr.curve.gamma.size(); ++g) {
      const double rel = first > 0.0 ? pr.curve.value[g] / first : 0.0;
      t.rows.push_back({std::to_string(i), pr.kind, csv_number(pr.curve.gamma[g]), csv_number(pr.curve.value[g]),
                        csv_number(rel)});
      s.x.push_back(pr.curve.gamma[g]);
      s.y.push_back(rel);
    }
    (is_miss ? miss : generic).series.push_back(std::move(s));
    json values = json::array();
    for (double v : pr.curve.value) values.push_back(number(v));
    list.push_back({{"kind", pr.kind},
                    {"probe", pr.where},
                    {"margin", number(pr.margin)},
                    {"values", values},
                    {"final_ratio", number(pr.curve.final_ratio)},
                    {"sustained_growth", pr.curve.sustained_growth},
                    {"pass", ok}});
  }
  json gs = json::array();
  for (double g : gammas) gs.push_back(number(g));
  out.result = {{"gamma", gs},
                {"probes", list},
                {"generic", {{"count", generic_count}, {"decayed", generic_decayed}}},
                {"miss", {{"count", miss_count}, {"decayed", miss_decayed}}}};
  out.tables.push_back(std::move(t));
  if (!generic.series.empty()) out.plots.push_back(std::move(generic));
  if (!miss.series.empty()) out.plots.push_back(std::move(miss));
  return out;
}

SuiteOutput run_corollary_point(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  const auto b = field_of(ctx, seed);
  const auto params = corollary_of(p);
  const auto gammas = gamma_schedule(p);
  const auto box = transfer_box(*ctx.model);
  std::vector<Probe> probes;
  for (const std::string kind : {"generic", "miss"}) {
    const double spread = kind == "miss" ? 3.0 : 1.0;
    for (int i = 0; i < integer(p, kind); ++i) {
      auto rng = stream(seed, "corollary-point/" + kind, static_cast<std::uint64_t>(i));
      bool found = false;
      for (int draw = 0; draw < integer(p, "max_draws") && !found; ++draw) {
        FourVector q;
        for (std::size_t m = 0; m < 4; ++m) {
          const double mid = 0.5 * (box.lo[m] + box.hi[m]), half = 0.5 * (box.hi[m] - box.lo[m]) + 0.5;
          const double reach = spread * half + (kind == "miss" ? 2.0 * num(p, "miss_margin") / params.probe.width : 0.0);
          std::uniform_real_distribution<double> u(mid - reach, mid + reach);
          q[m] = u(rng);
        }
        const double margin = kind == "miss" ? point_probe_margin(*ctx.model, params, q, gammas.front())
                                             : point_probe_margin(*ctx.model, params, q, gammas.back());
        const double need = num(p, kind == "miss" ? "miss_margin" : "generic_margin");
        if (margin < need) continue;
        found = true;
        probes.push_back({kind, to_string(q), corollary_point_limit(b, params, q, gammas), margin});
      }
      if (!found) throw std::runtime_error("corollary-point: no " + kind + " probe found within max_draws");
    }
  }
  return corollary_output(p, "corollary-point", std::move(probes), gammas);
}

SuiteOutput run_corollary_plane(const json& p, std::uint64_t seed, const ModelContext& ctx) {
  const auto b = field_of(ctx, seed);
  const auto params = corollary_of(p);
  const auto gammas = gamma_schedule(p);
  const double reach = transfer_box(*ctx.model).spatial + 0.5;
  std::vector<Probe> probes;
  for (const std::string kind : {"generic", "miss"}) {
    const double spread = kind == "miss" ? 3.0 : 1.0;
    for (int i = 0; i < integer(p, kind); ++i) {
      auto rng = stream(seed, "corollary-plane/" + kind, static_cast<std::uint64_t>(i));
      std::normal_distribution<double> g;
      const double r_max = spread * reach + (kind == "miss" ? 2.0 * num(p, "miss_margin") / params.probe.width : 0.0);
      std::uniform_real_distribution<double> u(-r_max, r_max);
      bool found = false;
      for (int draw = 0; draw < integer(p, "max_draws") && !found; ++draw) {
        double v[3] = {g(rng), g(rng), g(rng)};
        const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        const double r = u(rng);
        if (len < 1e-6) continue;
        const FourVector n(0.0, v[0] / len, v[1] / len, v[2] / len);
        const double margin = kind == "miss" ? plane_probe_margin(*ctx.model, params, n, r, gammas.front())
                                             : plane_probe_margin(*ctx.model, params, n, r, gammas.back());
        if (margin < num(p, kind == "miss" ? "miss_margin" : "generic_margin")) continue;
        found = true;
        std::ostringstream where;
        where.precision(6);
        where << "n = " << to_string(n) << ", r = " << r;
        probes.push_back({kind, where.str(), corollary_plane_limit(b, params, n, r, gammas), margin});
      }
      if (!found) throw std::runtime_error("corollary-plane: no " + kind + " probe found within max_draws");
    }
  }
  return corollary_output(p, "corollary-plane", std::move(probes), gammas);
}

// ---------------------------------------------------------------- appendix

void validate_appendix_a(const json& p) {
  require_count(p, "trials", 1);
  require(num(p, "lambda_min") > 0.0 && num(p, "lambda_max") >= num(p, "lambda_min"), "bad lambda range");
  require_count(p, "points", 8);
  require(num(p, "spacing") > 0.0, "spacing must be > 0");
  require_count(p, "doublings", 1);
}

SuiteOutput run_appendix_a(const json& p, std::uint64_t seed, const ModelContext&) {
  SuiteOutput out;
  out.pass = true;
  Table t{"trials", {"trial", "lambda", "c", "c_refined", "max_drift", "aliased", "pass"}, {}};
  json rows = json::array();
  double worst = 0.0;
  for (int i = 0; i < integer(p, "trials"); ++i) {
    auto rng = stream(seed, "appendix-a", static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(std::log(num(p, "lambda_min")), std::log(num(p, "lambda_max")));
    const double lambda = std::exp(u(rng));
    const DecayGrid grid{1, static_cast<std::size_t>(integer(p, "points")), num(p, "spacing") / lambda};
    const auto r = decay_refinement(root_gaussian_family(lambda), 0.5, lambda, grid, integer(p, "doublings"),
                                    splitmix64(seed + static_cast<std::uint64_t>(i)));
    bool aliased = false, hypothesis = true;
    json cs = json::array();
    for (const auto& x : r.results) {
      aliased = aliased || x.aliased;
      hypothesis = hypothesis && x.hypothesis_ok;
      cs.push_back(number(x.c));
    }
    const bool ok = r.max_drift < num(p, "max_drift") && !aliased && hypothesis && std::isfinite(r.results[0].c);
    out.pass = out.pass && ok;
    worst = std::max(worst, r.max_drift);
    t.rows.push_back({std::to_string(i), csv_number(lambda), csv_number(r.results.front().c),
                      csv_number(r.results.back().c), csv_number(r.max_drift), aliased ? "1" : "0", ok ? "1" : "0"});
    rows.push_back({{"lambda", number(lambda)},
                    {"c", cs},
                    {"max_drift", number(r.max_drift)},
                    {"edge_mass", number(r.results.back().edge_mass)},
                    {"hypothesis_ratio", number(r.results.front().hypothesis_ratio)},
                    {"pass", ok}});
  }
  out.result = {{"family", "|p|^(1/2) exp(-lambda^2 p^2), gamma = 1/2, n = 1"},
                {"trials", rows},
                {"max_drift", number(worst)}};
  out.tables.push_back(std::move(t));
  return out;
}

void validate_trials(const json& p) { require_count(p, "trials", 0); }

SuiteOutput run_appendix_b(const json& p, std::uint64_t seed, const ModelContext&) {
  SuiteOutput out;
  Table t{"trials", {"trial", "size", "s", "eps", "lhs", "rhs", "holds"}, {}};
  int violations = 0;
  double worst = -INFINITY;
  for (int i = 0; i < integer(p, "trials"); ++i) {
    auto rng = stream(seed, "appendix-b", static_cast<std::uint64_t>(i));
    const auto inst = random_interpolation_instance(rng);
    const auto r = interpolation_check(inst.f, inst.h, inst.mu, inst.s, inst.eps);
    violations += !r.holds;
    worst = std::max(worst, r.lhs - r.rhs);
    t.rows.push_back({std::to_string(i), std::to_string(inst.f.size()), csv_number(inst.s), csv_number(inst.eps),
                      csv_number(r.lhs), csv_number(r.rhs), r.holds ? "1" : "0"});
  }
  out.result = {{"trials", integer(p, "trials")},
                {"violations", violations},
                {"max_excess", number(integer(p, "trials") ? worst : 0.0)},
                {"slack", number(appendix_slack)}};
  out.pass = violations == 0;
  out.tables.push_back(std::move(t));
  return out;
}

SuiteOutput run_appendix_c(const json& p, std::uint64_t seed, const ModelContext&) {
  SuiteOutput out;
  Table t{"trials", {"trial", "atoms_first", "atoms_second", "lhs", "rhs", "holds", "step_oracle"}, {}};
  int violations = 0, oracle = 0;
  double worst = -INFINITY;
  for (int i = 0; i < integer(p, "trials"); ++i) {
    auto rng = stream(seed, "appendix-c", static_cast<std::uint64_t>(i));
    const auto inst = random_dominance_instance(rng);
    const auto r = dominance_integral_check(inst.pair, inst.f, integer(p, "step_levels"));
    violations += !r.integrals.holds;
    oracle += !r.step_oracle_ok;
    worst = std::max(worst, r.integrals.lhs - r.integrals.rhs);
    t.rows.push_back({std::to_string(i), std::to_string(inst.pair.first.atoms.size()),
                      std::to_string(inst.pair.second.atoms.size()), csv_number(r.integrals.lhs),
                      csv_number(r.integrals.rhs), r.integrals.holds ? "1" : "0", r.step_oracle_ok ? "1" : "0"});
  }
  out.result = {{"trials", integer(p, "trials")},
                {"violations", violations},
                {"step_oracle_failures", oracle},
                {"max_excess", number(integer(p, "trials") ? worst : 0.0)},
                {"slack", number(appendix_slack)}};
  out.pass = violations == 0 && oracle == 0;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------- scaling

Chart chart_of(const json& c) {
  const auto kind = text(c, "kind");
  const FourVector origin = four_vector_from_json(c.at("origin"));
  const double radius = num(c, "domain_radius");
  if (kind == "affine") return Chart::affine(origin, radius);
  if (kind == "mass-shell") return Chart::mass_shell(origin, num(c, "mass"), radius);
  if (kind == "quadratic") {
    Chart ch = Chart::affine(origin, radius);
    const auto& lin = c.at("linear");
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) ch.linear[i][j] = to_double(lin.at(i).at(j));
    if (c.contains("quadratic")) {
      const auto& q = c.at("quadratic");
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
          for (std::size_t k = 0; k < 4; ++k) ch.quadratic[i][j][k] = to_double(q.at(i).at(j).at(k));
    }
    return ch;
  }
  throw std::invalid_argument("chart kind is affine, mass-shell or quadratic");
}

ScalingFamily family_of(const json& p, int m) {
  ScalingFamily f;
  f.chart = chart_of(p.at("chart"));
  f.m = m;
  f.rho_radius = num(p, "rho_radius");
  f.sigma_radius = num(p, "sigma_radius");
  f.tilt = num(p, "tilt");
  f.validate();
  return f;
}

json profile_json(const json& p) {
  return {{"psi", "bump(|rho| / rho_radius) (1 + tilt rho^1 / rho_radius)"},
          {"chi", "bump(|sigma| / sigma_radius), unit integral"},
          {"rho_radius", p.at("rho_radius")},
          {"sigma_radius", p.at("sigma_radius")},
          {"tilt", p.at("tilt")},
          {"chart", p.at("chart")}};
}

void validate_scaling_estimate(const json& p) {
  for (const auto& m : p.at("deltas")) require(m.is_number_integer() && m >= 1 && m <= 4, "deltas are m = 1..4");
  const int hm = integer(p, "homogeneous_m");
  for (double a : numbers(p, "homogeneous"))
    if (!(a > -hm)) throw HypothesisError("homogeneous |rho|^a needs a > -m to be locally integrable");
  family_of(p, hm);
  require(num(p, "gamma_first") >= 1.0, "gamma_first must be >= 1");
  require(integer(p, "gamma_count") >= 6, "the estimator needs at least 6 gamma values");
}

SuiteOutput run_scaling_estimate(const json& p, std::uint64_t, const ModelContext&) {
  const auto gammas = geometric_schedule(num(p, "gamma_first"), num(p, "gamma_last"), integer(p, "gamma_count"));
  const double tol = num(p, "tolerance");
  SuiteOutput out;
  out.pass = true;
  Table t{"estimates", {"kind", "m", "parameter", "expected", "degree", "slope_full", "stable", "pass"}, {}};
  json rows = json::array();
  auto record = [&](const std::string& kind, int m, double param, double expected, const DegreeEstimate& e) {
    const bool ok = std::abs(e.degree - expected) <= tol;
    out.pass = out.pass && ok;
    t.rows.push_back({kind, std::to_string(m), csv_number(param), csv_number(expected), csv_number(e.degree),
                      csv_number(-e.slope_full), e.stable ? "1" : "0", ok ? "1" : "0"});
    rows.push_back({{"kind", kind},
                    {"m", m},
                    {"parameter", number(param)},
                    {"expected", number(expected)},
                    {"degree", number(e.degree)},
                    {"stable", e.stable},
                    {"pass", ok}});
  };
  for (const auto& mj : p.at("deltas")) {
    const int m = mj.get<int>();
    const DeltaCombination delta{m, {{0, 1.0}}};
    record("delta", m, 0.0, delta.analytic_degree(), estimate_degree(delta_evaluator(delta, family_of(p, m)), gammas));
  }
  const int hm = integer(p, "homogeneous_m");
  for (double a : numbers(p, "homogeneous"))
    record("homogeneous", hm, a, a, estimate_degree(homogeneous_evaluator(a, family_of(p, hm)), gammas));
  out.result = {{"estimates", rows}, {"probed_profile", profile_json(p)}, {"tolerance", number(tol)}};
  out.tables.push_back(std::move(t));
  return out;
}

void validate_scaling_classify(const json& p) {
  for (double k : numbers(p, "kappas")) if (!(k > 0.0)) throw HypothesisError("kappa must be > 0");
}

SuiteOutput run_scaling_classify(const json& p, std::uint64_t, const ModelContext&) {
  SuiteOutput out;
  out.pass = true;
  Table t{"allowed", {"kappa", "m", "derivative_order", "at_origin"}, {}};
  json list = json::array();
  for (double kappa : numbers(p, "kappas")) {
    json allowed = json::array();
    for (const auto& s : classify_allowed_singularities(kappa)) {
      allowed.push_back({{"m", s.m}, {"l", s.l}, {"at_origin", s.at_origin}});
      t.rows.push_back({csv_number(kappa), std::to_string(s.m), std::to_string(s.l), s.at_origin ? "1" : "0"});
      // every listed pair must meet the degree bound it was selected by
      if (!s.at_origin && -s.m - s.l < degree_lower_bounds(s.m, kappa, false) - 1e-12) out.pass = false;
    }
    list.push_back({{"kappa", number(kappa)}, {"allowed", allowed}});
  }
  out.result = {{"classes", list}};
  out.tables.push_back(std::move(t));
  return out;
}

void validate_scaling_bounds(const json& p) {
  for (const auto& m : p.at("ms")) require(m.is_number_integer() && m >= 1 && m <= 4, "ms are 1..4");
  for (double k : numbers(p, "kappas")) if (!(k > 0.0)) throw HypothesisError("kappa must be > 0");
}

SuiteOutput run_scaling_bounds(const json& p, std::uint64_t, const ModelContext&) {
  SuiteOutput out;
  out.pass = true;
  Table t{"bounds", {"m", "kappa", "bare", "weighted"}, {}};
  json rows = json::array();
  for (const auto& mj : p.at("ms")) {
    const int m = mj.get<int>();
    const double bare = degree_lower_bounds(m, std::nullopt, false);
    for (double kappa : numbers(p, "kappas")) {
      const double weighted = degree_lower_bounds(m, kappa, false);
      t.rows.push_back({std::to_string(m), csv_number(kappa), csv_number(bare), csv_number(weighted)});
      rows.push_back({{"m", m}, {"kappa", number(kappa)}, {"bare", number(bare)}, {"weighted", number(weighted)}});
    }
  }
  out.result = {{"bounds", rows}};
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------- registry

using Validator = void (*)(const json&);
using Runner = SuiteOutput (*)(const json&, std::uint64_t, const ModelContext&);

struct SuiteDef {
  const char* name;
  bool needs_model;
  Validator validate;
  Runner run;
  json (*defaults)();
};

json envelope_defaults() { return {{"kappa", 1.0}, {"lambda", 1.0}, {"pairs", 20}, {"atoms", 6}, {"box", 3.0}}; }

json bk_defaults() {
  return {{"k", 1.5},
          {"kappa", 1.0},
          {"lambda", 1.0},
          {"energies", {0.0, 0.5, 1.0, 2.0, 4.0}},
          {"signs", {"plus", "minus"}},
          {"measures", 20},
          {"atoms", 10},
          {"box", 3.0},
          {"grid_extent", 2.0},
          {"grid_steps", 2},
          {"margin", 2.0}};
}

json weight_defaults() {
  return {{"plus_weight", {{"lambda", 1.0}, {"s", 1.0}}},
          {"minus_weight", {{"lambda", 1.0}, {"a", 0.25}, {"b", 1.0}}}};
}

json gb_defaults() {
  json d = {{"k", 1.5},
            {"kappa", 1.0},
            {"lambda", 1.0},
            {"parts", {"plus", "minus", "momentum"}},
            {"measures", 40},
            {"atoms", 10},
            {"box", 3.0},
            {"margin", 2.0}};
  d.update(weight_defaults());
  return d;
}

json protocol_defaults() {
  json d = bk_defaults();
  d.update(gb_defaults());
  d.erase("grid_extent");
  d.erase("grid_steps");
  d["energies"] = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
  d["families"] = {"random-cone", "lattice", "mass-shell"};
  d["dim"] = 12;
  d["fields"] = 4;
  d["measures"] = 12;
  d["atoms"] = 8;
  d["min_instances"] = 500;
  d["annihilation_tolerance"] = 1e-12;
  // grid settings are shared with thm-bk but unused here
  d["grid_extent"] = 2.0;
  d["grid_steps"] = 2;
  return d;
}

const std::vector<SuiteDef>& registry() {
  static const std::vector<SuiteDef> defs = {
      {"buchholz", false, validate_buchholz, run_buchholz,
       [] {
         return json{{"trials", 1000}, {"min_dim", 2}, {"max_dim", 16}, {"orders", {1, 2, 3, 4}}, {"tolerance", 1e-9}};
       }},
      {"dyadic", false, validate_dyadic, run_dyadic,
       [] {
         return json{{"ks", {1.0, 1.5, 2.0}}, {"Ns", {1, 2, 3, 4, 5, 6, 7, 8}}, {"lambda", 1.0},
                     {"tolerance", 1e-4},     {"grid_log2", 20},            {"spacing_over_lambda", 0.5}};
       }},
      {"derivatives", false, validate_derivatives, run_derivatives,
       [] {
         return json{{"signals", 10},   {"points", 1024},      {"modes", 8},        {"max_frequency", 40},
                     {"fields", 20},    {"dim", 10},           {"spacing", 0.5},    {"orders", {0.5, 1.0, 1.7}},
                     {"samples", 64},   {"tolerance", 1e-8},   {"filter_tolerance", 1e-6}};
       }},
      {"dyadic-split", false, validate_dyadic_split, run_dyadic_split,
       [] {
         return json{{"fields", 20}, {"dim", 16},   {"energy_scale", 0.6}, {"k", 1.5},
                     {"lambda", 4.0}, {"N_max", 6}, {"reconstruction_tolerance", 1e-10}};
       }},
      {"envelope", true, validate_envelope, run_envelope, envelope_defaults},
      {"thm-bk", true, validate_thm_bk, run_thm_bk, bk_defaults},
      {"thm-gb", true, validate_thm_gb, run_thm_gb, gb_defaults},
      {"thm-protocol", false, validate_protocol, run_protocol, protocol_defaults},
      {"stability", true, validate_stability, run_stability,
       [] {
         return json{{"kappa", 1.0},     {"lambda", 1.0},  {"profile", "gaussian"}, {"scale", 1.0},
                     {"exponent", 6.0},  {"time_only", false}, {"points", 5},      {"half_width", 3.0},
                     {"extent", 4.0},    {"steps", 6},     {"growth_tolerance", 0.2}};
       }},
      {"sobolev", true, validate_sobolev, run_sobolev,
       [] {
         json d = {{"k", 2.5}, {"kappa", 1.0}, {"lambda", 1.0}, {"part", "plus"}, {"tau", 0.0},
                   {"profiles", 8}, {"grid_points", 12}, {"spacing", 0.5}};
         d.update(weight_defaults());
         return d;
       }},
      {"weighted", true, validate_weighted, run_weighted,
       [] {
         json d = {{"k", 2.5},   {"kappa", 1.0}, {"lambda", 1.0}, {"part", "plus"}, {"form", "space-time"},
                   {"sigma", 0.6}, {"beta", 1.1}, {"tau", 0.6},   {"packets", 20}};
         d.update(weight_defaults());
         return d;
       }},
      {"corollary-point", true, validate_corollary_suite, run_corollary_point,
       [] {
         return json{{"k", 1.0},           {"kappa", 1.0},        {"delta", 0.5},          {"width", 1.0},
                     {"plus_weight", {{"lambda", 1.0}, {"s", 1.0}}},
                     {"gamma_first", 1.0}, {"gamma_last", 100.0}, {"gamma_count", 9},      {"generic", 8},
                     {"miss", 4},          {"generic_margin", 3.0}, {"miss_margin", 6.0},  {"max_draws", 20000},
                     {"decay_fraction", 0.1}, {"miss_fraction", 1e-3}};
       }},
      {"corollary-plane", true, validate_corollary_suite, run_corollary_plane,
       [] {
         return json{{"k", 1.0},           {"kappa", 1.0},        {"delta", 0.5},          {"width", 1.0},
                     {"plus_weight", {{"lambda", 1.0}, {"s", 1.0}}},
                     {"gamma_first", 1.0}, {"gamma_last", 100.0}, {"gamma_count", 9},      {"generic", 8},
                     {"miss", 4},          {"generic_margin", 3.0}, {"miss_margin", 6.0},  {"max_draws", 20000},
                     {"decay_fraction", 0.1}, {"miss_fraction", 1e-3}};
       }},
      {"appendix-a", false, validate_appendix_a, run_appendix_a,
       [] {
         return json{{"trials", 3},     {"lambda_min", 0.5}, {"lambda_max", 2.0}, {"points", 4096},
                     {"spacing", 0.05}, {"doublings", 2},    {"max_drift", 0.1}};
       }},
      {"appendix-b", false, validate_trials, run_appendix_b, [] { return json{{"trials", 1000}}; }},
      {"appendix-c", false,
       [](const json& p) {
         validate_trials(p);
         require_count(p, "step_levels", 1);
       },
       run_appendix_c, [] { return json{{"trials", 1000}, {"step_levels", 12}}; }},
      {"scaling-estimate", false, validate_scaling_estimate, run_scaling_estimate,
       [] {
         return json{{"chart", {{"kind", "affine"}, {"origin", {1.0, 0.0, 0.0, 0.0}}, {"domain_radius", 1.0}}},
                     {"rho_radius", 0.25},
                     {"sigma_radius", 0.5},
                     {"tilt", 0.5},
                     {"gamma_first", 1.0},
                     {"gamma_last", 1024.0},
                     {"gamma_count", 11},
                     {"deltas", {1, 2, 3, 4}},
                     {"homogeneous", {-0.5, 0.0, 0.5}},
                     {"homogeneous_m", 1},
                     {"tolerance", 0.1}};
       }},
      {"scaling-classify", false, validate_scaling_classify, run_scaling_classify,
       [] { return json{{"kappas", {0.5, 0.9, 1.0, 1.5, 1.8, 2.0, 2.5, 3.0, 3.5}}}; }},
      {"scaling-bounds", false, validate_scaling_bounds, run_scaling_bounds,
       [] { return json{{"ms", {1, 2, 3, 4}}, {"kappas", {0.5, 1.0, 2.0, 2.5, 3.5}}}; }},
  };
  return defs;
}

const SuiteDef& lookup(const std::string& name) {
  for (const auto& d : registry())
    if (name == d.name) return d;
  throw std::invalid_argument("unknown suite '" + name + "'");
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelContext default_context() {
  return {"mass-shell", share(QuantumModel::mass_shell(16)), std::nullopt};
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += cells[i];
        continue;
      }
      out += '"';
      for (char c : cells[i]) out += c == '"' ? std::string("\"\"") : std::string(1, c);
      out += '"';
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& d : registry()) out.emplace_back(d.name);
  return out;
}

bool is_suite(const std::string& name) {
  return std::any_of(registry().begin(), registry().end(), [&](const SuiteDef& d) { return name == d.name; });
}

json suite_defaults(const std::string& name) { return lookup(name).defaults(); }

json merge_params(const std::string& suite, const json& overrides) {
  json p = suite_defaults(suite);
  if (overrides.is_null()) return p;
  if (!overrides.is_object()) throw std::invalid_argument(suite + ": parameters must be an object");
  for (const auto& [key, value] : overrides.items()) {
    if (!p.contains(key)) throw std::invalid_argument(suite + ": unknown parameter '" + key + "'");
    p[key] = value;
  }
  return p;
}

void validate_suite(const std::string& suite, const json& params) {
  try {
    lookup(suite).validate(params);
  } catch (const HypothesisError& e) {
    throw HypothesisError(suite + ": " + e.what());
  } catch (const json::exception& e) {
    throw std::invalid_argument(suite + ": malformed parameters (" + e.what() + ")");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(suite + ": " + e.what());
  }
}

SuiteOutput run_suite(const std::string& suite, const json& params, std::uint64_t seed, const ModelContext* context) {
  const auto& def = lookup(suite);
  validate_suite(suite, params);
  const ModelContext ctx = context ? *context : (def.needs_model ? default_context() : ModelContext{});
  SuiteOutput out = def.run(params, seed, ctx);
  out.suite = suite;
  out.params = params;
  if (def.needs_model) out.result["family"] = ctx.family;
  return out;
}

ModelContext load_model(const json& model_spec, const json& field_spec, std::uint64_t seed,
                        const std::filesystem::path& base) {
  ModelContext ctx;
  auto resolve = [&](const std::string& f) {
    std::filesystem::path path(f);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  if (model_spec.contains("file")) {
    const auto path = resolve(text(model_spec, "file"));
    ctx.model = share(model_from_json(read_json(path)));
    ctx.family = model_spec.value("family", path.stem().string());
  } else {
    const auto gen = model_spec.value("generator", std::string("mass-shell"));
    const auto dim = static_cast<std::size_t>(model_spec.value("dim", 16));
    require(dim >= 1, "model dim must be >= 1");
    if (gen == "mass-shell") {
      ctx.model = share(QuantumModel::mass_shell(dim, model_spec.value("mass", 1.0), model_spec.value("dp", 0.5),
                                                 model_spec.value("zero_state", true)));
    } else if (gen == "lattice") {
      ctx.model = share(QuantumModel::lattice(dim, model_spec.value("spacing", 1.0)));
    } else if (gen == "random-cone") {
      auto rng = stream(model_spec.value("seed", seed), "model");
      ctx.model = share(QuantumModel::random_cone(dim, rng, model_spec.value("energy_scale", 1.0),
                                                  model_spec.value("zero_state", true)));
    } else {
      throw std::invalid_argument("model generator is random-cone, lattice or mass-shell");
    }
    ctx.family = model_spec.value("family", gen);
  }
  if (field_spec.contains("file")) {
    ctx.field = matrix_from_json(read_json(resolve(text(field_spec, "file"))));
    require(static_cast<std::size_t>(ctx.field->rows()) == ctx.model->dim() &&
                static_cast<std::size_t>(ctx.field->cols()) == ctx.model->dim(),
            "field dimension does not match the model");
  } else {
    require(field_spec.value("generator", std::string("random")) == "random", "field generator is random");
  }
  return ctx;
}

std::string config_hash(const json& config) {
  json c = config;
  c.erase("seed");
  return hex16(fnv1a(c.dump()));
}

RunRecord run_experiment(const json& config, const std::filesystem::path& base) {
  require(config.is_object(), "config must be a JSON object");
  for (const auto& [key, v] : config.items()) {
    static const std::set<std::string> known{"suites", "seed", "model", "field", "params", "tolerances", "outputs"};
    require(known.count(key) > 0, "unknown config key '" + key + "'");
  }
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});
  const json suites = config.value("suites", json::array());
  const json params = config.value("params", json::object());
  const json tolerances = config.value("tolerances", json::object());
  const json common = params.value("common", json::object());

  // Validate everything before running anything.
  std::vector<std::pair<std::string, json>> plan;
  bool needs_model = false;
  for (const auto& s : suites) {
    const auto name = s.get<std::string>();
    const json defaults = suite_defaults(name);
    json overrides = json::object();
    for (const auto& [key, value] : common.items())
      if (defaults.contains(key)) overrides[key] = value;
    for (const auto* layer : {&params, &tolerances})
      if (layer->contains(name))
        for (const auto& [key, value] : layer->at(name).items()) overrides[key] = value;
    json effective = merge_params(name, overrides);
    validate_suite(name, effective);
    plan.emplace_back(name, std::move(effective));
    needs_model = needs_model || lookup(name).needs_model;
  }
  std::optional<ModelContext> ctx;
  if (needs_model)
    ctx = load_model(config.value("model", json{{"generator", "mass-shell"}, {"dim", 16}}),
                     config.value("field", json::object()), seed, base);

  RunRecord run;
  run.timings = json::object();
  json checks = json::array();
  int passed = 0;
  for (const auto& [name, effective] : plan) {
    const auto start = std::chrono::steady_clock::now();
    SuiteOutput out;
    try {
      out = run_suite(name, effective, seed, ctx ? &*ctx : nullptr);
    } catch (const std::exception& e) {
      out.suite = name;
      out.params = effective;
      out.result = {{"error", e.what()}};
      out.pass = false;
    }
    run.timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json tables = json::array(), plots = json::array();
    for (const auto& t : out.tables) tables.push_back(name + "_" + t.name + ".csv");
    for (const auto& pl : out.plots) plots.push_back(pl.name + ".svg");
    checks.push_back({{"suite", name},
                      {"pass", out.pass},
                      {"params", effective},
                      {"result", out.result},
                      {"tables", tables},
                      {"plots", plots}});
    passed += out.pass;
    run.outputs.push_back(std::move(out));
  }
  json record = {{"schema_version", record_schema_version},
                 {"tool", "emtlab"},
                 {"config_hash", config_hash(config)},
                 {"seed", seed},
                 {"config", config},
                 {"checks", checks},
                 {"summary", {{"total", plan.size()}, {"passed", passed}, {"failed", plan.size() - passed}}},
                 {"pass", passed == static_cast<int>(plan.size())}};
  if (ctx)
    record["model"] = {{"family", ctx->family},
                       {"dim", ctx->model->dim()},
                       {"hash", hex16(fnv1a(to_json(*ctx->model).dump()))},
                       {"field", ctx->field ? "file" : "random"}};
  run.record = std::move(record);
  return run;
}

void write_run(const RunRecord& run, const std::filesystem::path& dir, bool plots) {
  std::filesystem::create_directories(dir);
  write_json(dir / "record.json", run.record);
  write_json(dir / "timings.json", run.timings);
  for (const auto& out : run.outputs) {
    for (const auto& t : out.tables) write_text(dir / (out.suite + "_" + t.name + ".csv"), to_csv(t));
    if (plots)
      for (const auto& pl : out.plots) write_text(dir / (pl.name + ".svg"), render_svg(pl));
  }
}

std::string render_report(const std::vector<std::pair<std::filesystem::path, json>>& records) {
  std::ostringstream md;
  md << "# Verification report\n\n";
  struct Rollup {
    int runs = 0, passed = 0;
  };
  std::map<std::string, Rollup> by_suite;
  int total = 0, passed = 0;
  for (const auto& [path, rec] : records)
    for (const auto& c : rec.at("checks")) {
      auto& r = by_suite[c.at("suite").get<std::string>()];
      ++r.runs;
      ++total;
      if (c.at("pass").get<bool>()) {
        ++r.passed;
        ++passed;
      }
    }
  md << "Records: " << records.size() << ", checks: " << total << ", passed: " << passed
     << ", failed: " << total - passed << "\n\n";
  md << "## Per suite\n\n| suite | runs | passed | failed | status |\n|---|---|---|---|---|\n";
  for (const auto& [suite, r] : by_suite)
    md << "| " << suite << " | " << r.runs << " | " << r.passed << " | " << r.runs - r.passed << " | "
       << (r.passed == r.runs ? "pass" : "FAIL") << " |\n";

  md << "\n## Checks\n\n| record | seed | config | suite | status | evidence |\n|---|---|---|---|---|---|\n";
  std::vector<std::pair<std::string, std::string>> figures;
  for (const auto& [path, rec] : records) {
    const auto dir = path.parent_path();
    for (const auto& c : rec.at("checks")) {
      std::string evidence;
      for (const auto& t : c.value("tables", json::array())) {
        if (!evidence.empty()) evidence += ", ";
        const auto f = (dir / t.get<std::string>()).generic_string();
        evidence += "[" + t.get<std::string>() + "](" + f + ")";
      }
      for (const auto& pl : c.value("plots", json::array())) {
        const auto f = (dir / pl.get<std::string>()).generic_string();
        if (std::filesystem::exists(f)) figures.emplace_back(pl.get<std::string>(), f);
      }
      md << "| " << path.generic_string() << " | " << rec.at("seed").dump() << " | "
         << rec.at("config_hash").get<std::string>() << " | " << c.at("suite").get<std::string>() << " | "
         << (c.at("pass").get<bool>() ? "pass" : "FAIL") << " | " << evidence << " |\n";
    }
  }
  if (!figures.empty()) {
    md << "\n## Decay plots\n\n";
    for (const auto& [name, f] : figures) md << "![" << name << "](" << f << ")\n\n";
  }
  return md.str();
}

}  // namespace emt
