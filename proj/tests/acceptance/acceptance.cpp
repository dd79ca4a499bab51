// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Every criterion re-derives its verdict from the raw suite output instead
// of trusting the suite's own pass flag.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "emt/harness.hpp"

using namespace emt;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t seed = 20240601;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SuiteOutput run(const std::string& suite, const json& overrides = json::object(), const ModelContext* ctx = nullptr) {
  return run_suite(suite, merge_params(suite, overrides), seed, ctx);
}

Verdict buchholz() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const auto out = run("buchholz", {{"trials", 1000}, {"min_dim", 2}, {"max_dim", 16}, {"orders", {1, 2, 3, 4}}});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& rows = out.tables.at(0).rows;
  v.require(rows.size() == 1000, "expected 1000 trials");
  std::set<int> dims, orders;
  double worst = -INFINITY;
  for (const auto& r : rows) {
    dims.insert(std::stoi(r[1]));
    orders.insert(std::stoi(r[2]));
    worst = std::max({worst, std::stod(r[3]), std::stod(r[4])});
  }
  v.require(*dims.begin() >= 2 && *dims.rbegin() <= 16 && dims.size() >= 10, "dimensions outside 2..16");
  v.require(orders == std::set<int>{1, 2, 3, 4}, "orders 1..4 not all exercised");
  v.require(worst <= 1e-9, "slack " + fmt("%.3g", worst));
  const auto& j = out.result.at("jordan");
  v.require(std::abs(to_double(j.at("lhs")) - to_double(j.at("rhs"))) <= 1e-12, "Jordan block not an equality");
  v.require(seconds < 10.0, "took " + fmt("%.2f", seconds) + " s");
  v.detail = v.pass ? "max slack " + fmt("%.2e", worst) + ", Jordan equality, " + fmt("%.2f", seconds) + " s" : v.detail;
  return v;
}

Verdict telescoping() {
  Verdict v;
  const auto out = run("dyadic", {{"ks", {1.0, 1.5, 2.0}}, {"Ns", {1, 2, 3, 4, 5, 6, 7, 8}}});
  const auto& rows = out.tables.at(0).rows;
  v.require(rows.size() == 24, "expected 24 (k, N) rows");
  double worst = 0.0;
  for (const auto& r : rows) {
    const double k = std::stod(r[0]);
    const int N = std::stoi(r[1]);
    const double err = std::abs(std::stod(r[2]) - std::exp2(-N * k));
    worst = std::max(worst, err);
  }
  v.require(worst <= 1e-4, "max |ratio - 2^-Nk| = " + fmt("%.3g", worst));
  if (v.pass) v.detail = "max |ratio - 2^-Nk| = " + fmt("%.2e", worst);
  return v;
}

Verdict derivatives() {
  Verdict v;
  const auto out = run("derivatives", {{"fields", 20}});
  const double e1 = to_double(out.result.at("first_derivative_error"));
  const double e2 = to_double(out.result.at("second_derivative_error"));
  const double ef = to_double(out.result.at("filter_error"));
  std::set<std::string> fields;
  for (const auto& r : out.tables.at(1).rows) fields.insert(r[0]);
  v.require(e1 < 1e-8 && e2 < 1e-8, "derivative error " + fmt("%.3g", std::max(e1, e2)));
  v.require(ef <= 1e-6, "time-domain filter error " + fmt("%.3g", ef));
  v.require(fields.size() == 20, "expected 20 random fields");
  if (v.pass)
    v.detail = "f' " + fmt("%.1e", e1) + ", f'' " + fmt("%.1e", e2) + ", filter " + fmt("%.1e", ef) + " on 20 fields";
  return v;
}

Verdict protocol() {
  Verdict v;
  const auto out = run("thm-protocol");
  std::string summary;
  for (const auto& f : out.result.at("families")) {
    const auto name = f.at("family").get<std::string>();
    const auto count = f.at("count").get<std::size_t>();
    const double cal = to_double(f.at("calibration_sup")), hold = to_double(f.at("holdout_sup"));
    v.require(count >= 500, name + ": only " + std::to_string(count) + " instances");
    v.require(hold <= 2.0 * cal, name + ": holdout " + fmt("%.3g", hold) + " > 2 x " + fmt("%.3g", cal));
    summary += name + " " + std::to_string(count) + " (" + fmt("%.2f", hold / cal) + "), ";
  }
  v.require(out.result.at("families").size() == 3, "expected three families");
  double worst = 0.0;
  for (const auto& [name, a] : out.result.at("annihilation").items()) {
    v.require(a.at("zero_in_spectrum").get<bool>(), name + ": no zero-energy state to test");
    worst = std::max(worst, to_double(a.at("max_minus_norm")));
  }
  v.require(worst <= 1e-12, "minus part at E = 0 is " + fmt("%.3g", worst));
  if (v.pass) v.detail = summary + "minus part at E = 0 <= " + fmt("%.1e", worst);
  return v;
}

Verdict dyadic_split() {
  Verdict v;
  const auto out = run("dyadic-split", {{"fields", 20}, {"N_max", 6}});
  const auto& rows = out.tables.at(0).rows;
  v.require(rows.size() == 120, "expected 20 fields x 6 depths");
  double recon = 0.0, ratio = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const int N = std::stoi(r[1]);
    recon = std::max(recon, std::stod(r[2]));
    const double bound = std::stod(r[5]);
    ratio = std::max(ratio, std::stod(r[4]) / bound);
    // the bound must scale as 2^{-Nk} at fixed field
    if (N > 1) {
      const double prev = std::stod(rows[i - 1][5]);
      v.require(std::abs(bound / prev - std::exp2(-1.5)) < 1e-12, "bound does not scale as 2^-Nk");
    }
  }
  v.require(recon <= 1e-10, "reconstruction error " + fmt("%.3g", recon));
  v.require(ratio <= 1.0, "residual exceeds bound by " + fmt("%.3g", ratio));
  if (v.pass) v.detail = "reconstruction " + fmt("%.1e", recon) + ", residual/bound <= " + fmt("%.3f", ratio);
  return v;
}

Verdict corollaries(const fs::path& data) {
  Verdict v;
  const std::vector<std::pair<json, std::string>> models = {
      {json{{"file", (data / "models" / "mass_shell_32.json").string()}}, "mass_shell_32"},
      {json{{"generator", "random-cone"}, {"dim", 12}}, "random-cone"},
      {json{{"generator", "lattice"}, {"dim", 12}}, "lattice"}};
  int curves = 0;
  double worst_generic = 0.0, worst_miss = 0.0;
  for (const auto& [spec, name] : models) {
    const auto ctx = load_model(spec, json::object(), seed);
    for (const std::string suite : {"corollary-point", "corollary-plane"}) {
      const auto out = run(suite, {{"gamma_first", 1.0}, {"gamma_last", 100.0}}, &ctx);
      const auto& gammas = out.result.at("gamma");
      v.require(to_double(gammas.front()) == 1.0 && std::abs(to_double(gammas.back()) - 100.0) < 1e-9,
                "gamma range is not [1, 100]");
      for (const auto& p : out.result.at("probes")) {
        const auto& values = p.at("values");
        const double first = to_double(values.front()), last = to_double(values.back());
        const double rel = first > 0.0 ? last / first : (last == 0.0 ? 0.0 : INFINITY);
        ++curves;
        if (p.at("kind") == "miss") {
          worst_miss = std::max(worst_miss, rel);
          v.require(rel < 1e-3, name + "/" + suite + ": miss probe ends at " + fmt("%.3g", rel));
        } else {
          worst_generic = std::max(worst_generic, rel);
          v.require(rel < 0.1, name + "/" + suite + ": generic probe ends at " + fmt("%.3g", rel));
        }
      }
    }
  }
  if (v.pass)
    v.detail = std::to_string(curves) + " curves on 3 models, generic final/initial <= " + fmt("%.1e", worst_generic) +
               ", miss <= " + fmt("%.1e", worst_miss);
  return v;
}

Verdict scaling() {
  Verdict v;
  const auto est = run("scaling-estimate", {{"deltas", {1, 2, 3, 4}}, {"homogeneous", {-0.5, 0.0, 0.5}}});
  double worst = 0.0;
  for (const auto& e : est.result.at("estimates")) {
    const double d = to_double(e.at("degree"));
    const double expected = e.at("kind") == "delta" ? -e.at("m").get<double>() : to_double(e.at("parameter"));
    worst = std::max(worst, std::abs(d - expected));
  }
  v.require(est.result.at("estimates").size() == 7, "expected 7 estimates");
  v.require(worst <= 0.1, "degree off by " + fmt("%.3g", worst));

  // The list of allowed point singularities, written out by hand.
  using Entry = std::tuple<int, int, bool>;
  auto oracle = [](double kappa) {
    std::set<Entry> s = {{4, 0, true}, {1, 0, false}};
    if (kappa <= 2) s.insert({2, 0, false});
    if (kappa <= 1) {
      s.insert({3, 0, false});
      s.insert({1, 1, false});
    }
    return s;
  };
  const auto cls = run("scaling-classify", {{"kappas", {0.5, 0.9, 1.0, 1.5, 1.8, 2.0, 2.5, 3.0, 3.5}}});
  int matched = 0;
  for (const auto& c : cls.result.at("classes")) {
    const double kappa = to_double(c.at("kappa"));
    std::set<Entry> got;
    for (const auto& a : c.at("allowed")) got.insert({a.at("m").get<int>(), a.at("l").get<int>(), a.at("at_origin").get<bool>()});
    const bool same = got == oracle(kappa) && got.size() == c.at("allowed").size();
    matched += same;
    v.require(same, "classification differs at kappa = " + fmt("%g", kappa));
  }
  v.require(matched == 9, "expected 9 kappa values");
  if (v.pass) v.detail = "max degree error " + fmt("%.1e", worst) + ", classification matches at 9 kappa values";
  return v;
}

Verdict appendix() {
  Verdict v;
  const auto b = run("appendix-b", {{"trials", 1000}});
  const auto c = run("appendix-c", {{"trials", 1000}});
  int vb = 0, vc = 0;
  for (const auto& r : b.tables.at(0).rows) vb += std::stod(r[4]) > std::stod(r[5]) + 1e-12;
  for (const auto& r : c.tables.at(0).rows) vc += std::stod(r[3]) > std::stod(r[4]) + 1e-12;
  v.require(b.tables.at(0).rows.size() == 1000 && c.tables.at(0).rows.size() == 1000, "expected 1000 trials each");
  v.require(vb == 0, std::to_string(vb) + " interpolation violations");
  v.require(vc == 0, std::to_string(vc) + " dominance violations");

  const auto a = run("appendix-a", {{"doublings", 2}});
  double drift = 0.0;
  for (const auto& t : a.result.at("trials")) {
    const auto& cs = t.at("c");
    v.require(cs.size() == 3, "expected two grid doublings");
    const double c0 = to_double(cs[0]);
    for (const auto& x : cs) drift = std::max(drift, std::abs(to_double(x) - c0) / c0);
  }
  v.require(drift < 0.1, "decay constant drifts " + fmt("%.3g", drift));
  if (v.pass) v.detail = "0 + 0 violations in 2 x 1000 trials, decay constant drift " + fmt("%.2f%%", 100 * drift);
  return v;
}

Verdict determinism() {
  Verdict v;
  const json cfg = {{"suites", {"buchholz", "thm-bk", "corollary-point", "appendix-b", "scaling-estimate"}},
                    {"seed", seed},
                    {"model", {{"generator", "random-cone"}, {"dim", 10}}},
                    {"params", {{"buchholz", {{"trials", 200}}}, {"appendix-b", {{"trials", 200}}}}}};
  const auto dir = fs::temp_directory_path() / "emt_acceptance_determinism";
  fs::remove_all(dir);
  write_run(run_experiment(cfg), dir / "a", false);
  write_run(run_experiment(cfg), dir / "b", false);
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const auto a = bytes(dir / "a" / "record.json"), b = bytes(dir / "b" / "record.json");
  v.require(!a.empty() && a == b, "record.json differs between identical runs");
  for (const auto& f : fs::directory_iterator(dir / "a"))
    if (f.path().extension() == ".csv")
      v.require(bytes(f.path()) == bytes(dir / "b" / f.path().filename()), f.path().filename().string() + " differs");
  if (v.pass) v.detail = "record.json identical (" + std::to_string(a.size()) + " bytes), tables identical";
  fs::remove_all(dir);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 buchholz inequality", buchholz},
      {"2 telescoping ratio", telescoping},
      {"3 derivative parts", derivatives},
      {"4 bound protocol", protocol},
      {"5 dyadic split", dyadic_split},
      {"6 decay curves", [] { return corollaries(EMT_DATA_DIR); }},
      {"7 scaling degree", scaling},
      {"8 appendix inequalities", appendix},
      {"9 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s [%s] %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
