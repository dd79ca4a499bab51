#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "emt/harness.hpp"
#include "emt/rng.hpp"

using namespace emt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("emt_test_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

LogLogPlot sample_plot() {
  LogLogPlot p{"sample", "decay <sample> & check", "gamma", "value", {}};
  p.series.push_back({"fast", {1, 3, 10, 30, 100}, {1, 0.2, 1e-3, 1e-6, 1e-9}});
  p.series.push_back({"slow", {1, 3, 10, 30, 100}, {0.5, 0.4, 0.2, 0.05, 0.0}});
  return p;
}

// Smaller versions of the slow defaults.
json quick_params(const std::string& suite) {
  if (suite == "buchholz") return {{"trials", 40}};
  if (suite == "dyadic") return {{"ks", {1.5}}, {"Ns", {1, 3}}, {"grid_log2", 16}};
  if (suite == "derivatives") return {{"signals", 2}, {"fields", 2}};
  if (suite == "dyadic-split") return {{"fields", 2}, {"N_max", 3}};
  if (suite == "thm-protocol") return {{"fields", 1}, {"min_instances", 100}};
  if (suite == "stability") return {{"points", 3}, {"steps", 3}};
  if (suite == "appendix-a") return {{"trials", 1}};
  if (suite == "appendix-b" || suite == "appendix-c") return {{"trials", 50}};
  return json::object();
}

}  // namespace

TEST_CASE("non-finite numbers survive a JSON round trip") {
  CHECK(to_double(number(INFINITY)) == INFINITY);
  CHECK(to_double(number(-INFINITY)) == -INFINITY);
  CHECK(std::isnan(to_double(number(NAN))));
  CHECK(to_double(number(0.1)) == 0.1);
  CHECK_THROWS_AS(to_double(json("big")), std::invalid_argument);
  CHECK_THROWS_AS(to_double(json::array()), std::invalid_argument);
}

TEST_CASE("data types round-trip through JSON text") {
  auto rng = stream(5, "io");
  const auto model = std::make_shared<const QuantumModel>(QuantumModel::random_cone(5, rng));
  const auto b = OperatorField::random(model, rng);

  const auto m2 = model_from_json(json::parse(to_json(*model).dump()));
  REQUIRE(m2.dim() == model->dim());
  for (std::size_t i = 0; i < model->dim(); ++i)
    for (std::size_t k = 0; k < 4; ++k) CHECK(m2.spectrum()[i][k] == model->spectrum()[i][k]);

  const Matrix a = matrix_from_json(json::parse(matrix_to_json(b.matrix()).dump()));
  CHECK((a - b.matrix()).cwiseAbs().maxCoeff() == 0.0);

  const DiscreteMeasure nu({{FourVector(0.5, -1, 2, 3), cd(1, -2)}, {FourVector(1, 1, 1, 1), cd(0.25, 0)}});
  const auto nu2 = measure_from_json(json::parse(to_json(nu).dump()));
  REQUIRE(nu2.size() == 2);
  CHECK(nu2.atoms()[0].w == cd(1, -2));
  CHECK(nu2.atoms()[0].x[3] == 3.0);

  const Signal s{-1.0, 0.125, {cd(1, 2), cd(-3, 0.5)}};
  const auto s2 = signal_from_json(json::parse(to_json(s).dump()));
  CHECK(s2.t0 == -1.0);
  CHECK(s2.dt == 0.125);
  CHECK(s2.samples == s.samples);
}

TEST_CASE("malformed JSON inputs are rejected") {
  CHECK_THROWS_AS(four_vector_from_json(json::array({1, 2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(model_from_json(json{{"spectrum", json::array()}}), std::invalid_argument);
  CHECK_THROWS_AS(matrix_from_json(json{{"matrix", {{{1, 0}, {0, 0}}, {{1, 0}}}}}), std::invalid_argument);
  CHECK_THROWS_AS(measure_from_json(json{{"atoms", {{{"x", {0, 0, 0, 0}}, {"w", {1}}}}}}), std::invalid_argument);
  CHECK_THROWS(read_json("/nonexistent/emt.json"));
}

TEST_CASE("csv cells are quoted only when needed") {
  Table t{"t", {"a", "b"}, {{"1", "x,y"}, {"say \"hi\"", "plain"}}};
  CHECK(to_csv(t) == "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",plain\n");
  CHECK(csv_number(0.1) == "0.1");
  CHECK(csv_number(INFINITY) == "inf");
  CHECK(std::stod(csv_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("svg rendering matches the golden file") {
  const fs::path golden = fs::path(EMT_GOLDEN_DIR) / "loglog_plot.svg";
  const auto svg = render_svg(sample_plot());
  if (std::getenv("EMT_UPDATE_GOLDEN")) write_text(golden, svg);
  CHECK(svg == slurp(golden));
  CHECK(svg == render_svg(sample_plot()));
  // the zero in "slow" is dropped, so it draws four points
  CHECK(svg.find("&lt;sample&gt; &amp; check") != std::string::npos);
}

TEST_CASE("svg of an empty plot is still well formed") {
  const auto svg = render_svg(LogLogPlot{"e", "empty", "x", "y", {}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("polyline") == std::string::npos);
}

TEST_CASE("parameters: defaults, overrides and unknown keys") {
  CHECK(is_suite("buchholz"));
  CHECK_FALSE(is_suite("nope"));
  CHECK_THROWS_AS(suite_defaults("nope"), std::invalid_argument);
  const auto p = merge_params("buchholz", {{"trials", 7}});
  CHECK(p.at("trials") == 7);
  CHECK(p.at("max_dim") == 16);
  CHECK_THROWS_AS(merge_params("buchholz", {{"trails", 7}}), std::invalid_argument);
  CHECK_THROWS_AS(merge_params("buchholz", json::array()), std::invalid_argument);
}

TEST_CASE("validation names the violated hypothesis before anything runs") {
  CHECK_THROWS_AS(validate_suite("thm-bk", merge_params("thm-bk", {{"k", 0.9}})), HypothesisError);
  CHECK_THROWS_AS(validate_suite("weighted", merge_params("weighted", {{"form", "spectral"}})), HypothesisError);
  CHECK_THROWS_AS(validate_suite("dyadic", merge_params("dyadic", {{"ks", {-1.0}}})), HypothesisError);
  CHECK_THROWS_AS(validate_suite("scaling-estimate", merge_params("scaling-estimate", {{"homogeneous", {-1.5}}})),
                  HypothesisError);
  CHECK_THROWS_AS(validate_suite("buchholz", merge_params("buchholz", {{"trials", "many"}})), std::invalid_argument);
  CHECK_THROWS_AS(validate_suite("thm-gb", merge_params("thm-gb", {{"parts", {"sideways"}}})), std::invalid_argument);

  // a bad suite late in the list stops the run before the first one executes
  json cfg = {{"suites", {"buchholz", "thm-bk"}}, {"params", {{"thm-bk", {{"k", 0.9}}}}}};
  CHECK_THROWS_AS(run_experiment(cfg), HypothesisError);
  CHECK_THROWS_AS(run_experiment(json{{"suite", {"buchholz"}}}), std::invalid_argument);
}

TEST_CASE("every suite passes on reduced defaults") {
  for (const auto& name : suite_names()) {
    CAPTURE(name);
    const auto out = run_suite(name, merge_params(name, quick_params(name)), 11);
    CHECK(out.suite == name);
    CHECK(out.pass);
    CHECK_FALSE(out.result.contains("error"));
    for (const auto& t : out.tables)
      for (const auto& row : t.rows) CHECK(row.size() == t.header.size());
  }
}

TEST_CASE("records are a function of config and seed") {
  const json cfg = {{"suites", {"appendix-b", "envelope"}},
                    {"seed", 42},
                    {"model", {{"generator", "random-cone"}, {"dim", 6}}},
                    {"params", {{"appendix-b", {{"trials", 30}}}, {"common", {{"kappa", 1.0}, {"pairs", 5}}}}}};
  const auto a = run_experiment(cfg), b = run_experiment(cfg);
  CHECK(a.record.dump(2) == b.record.dump(2));
  CHECK(a.record.at("pass") == true);
  CHECK(a.record.at("checks")[1].at("params").at("pairs") == 5);  // common applies where the key exists
  CHECK_FALSE(a.record.at("checks")[0].at("params").contains("pairs"));

  json other = cfg;
  other["seed"] = 43;
  const auto c = run_experiment(other);
  CHECK(config_hash(cfg) == config_hash(other));
  CHECK(c.outputs[0].tables[0].rows != a.outputs[0].tables[0].rows);
  CHECK(c.record.at("checks")[1].at("result") != a.record.at("checks")[1].at("result"));

  other["params"]["appendix-b"]["trials"] = 31;
  CHECK(config_hash(cfg) != config_hash(other));
}

TEST_CASE("tolerances overlay parameters and a runtime failure becomes a failed check") {
  const json cfg = {{"suites", {"corollary-point", "appendix-b"}},
                    {"model", {{"generator", "lattice"}, {"dim", 5}}},
                    {"params", {{"corollary-point", {{"max_draws", 1}}}, {"appendix-b", {{"trials", 10}}}}},
                    {"tolerances", {{"corollary-point", {{"generic_margin", 1e9}}}}}};
  const auto run = run_experiment(cfg);
  const auto& checks = run.record.at("checks");
  CHECK(checks[0].at("params").at("generic_margin") == 1e9);
  CHECK(checks[0].at("pass") == false);
  CHECK(checks[0].at("result").at("error").get<std::string>().find("max_draws") != std::string::npos);
  CHECK(checks[1].at("pass") == true);
  CHECK(run.record.at("summary") == json{{"total", 2}, {"passed", 1}, {"failed", 1}});
  CHECK(run.record.at("pass") == false);
}

TEST_CASE("model and field files feed the model suites") {
  const auto dir = scratch("model");
  auto rng = stream(8, "file");
  const auto model = std::make_shared<const QuantumModel>(QuantumModel::random_cone(4, rng));
  const auto b = OperatorField::random(model, rng);
  write_json(dir / "m.json", to_json(*model));
  write_json(dir / "f.json", matrix_to_json(b.matrix()));

  const auto ctx = load_model({{"file", "m.json"}}, {{"file", "f.json"}}, 0, dir);
  CHECK(ctx.family == "m");
  REQUIRE(ctx.field);
  CHECK((*ctx.field - b.matrix()).norm() == 0.0);

  write_json(dir / "f3.json", matrix_to_json(Matrix::Identity(3, 3)));
  CHECK_THROWS_AS(load_model({{"file", "m.json"}}, {{"file", "f3.json"}}, 0, dir), std::invalid_argument);
  CHECK_THROWS_AS(load_model({{"generator", "torus"}}, json::object(), 0), std::invalid_argument);

  const json cfg = {{"suites", {"thm-gb"}}, {"model", {{"file", "m.json"}}}, {"field", {{"file", "f.json"}}}};
  const auto run = run_experiment(cfg, dir);
  CHECK(run.record.at("model").at("field") == "file");
  CHECK(run.record.at("model").at("dim") == 4);
  CHECK(run.record.at("checks")[0].at("result").at("family") == "m");
  fs::remove_all(dir);
}

TEST_CASE("write_run and render_report") {
  const auto dir = scratch("write");
  const json cfg = {{"suites", {"corollary-point"}},
                    {"model", {{"generator", "mass-shell"}, {"dim", 6}}},
                    {"params", {{"corollary-point", {{"generic", 2}, {"miss", 1}}}}}};
  const auto run = run_experiment(cfg);
  write_run(run, dir, true);
  CHECK(slurp(dir / "record.json") == run.record.dump(2) + "\n");
  CHECK(fs::exists(dir / "corollary-point_curves.csv"));
  CHECK(fs::exists(dir / "corollary-point_generic.svg"));
  CHECK(fs::exists(dir / "corollary-point_miss.svg"));
  CHECK(read_json(dir / "timings.json").contains("corollary-point"));

  const auto md = render_report({{dir / "record.json", run.record}});
  CHECK(md.find("| corollary-point | 1 | 1 | 0 | pass |") != std::string::npos);
  CHECK(md.find("corollary-point_curves.csv") != std::string::npos);
  CHECK(md.find("![corollary-point_generic.svg]") != std::string::npos);

  const auto dir2 = scratch("noplots");
  write_run(run, dir2, false);
  CHECK_FALSE(fs::exists(dir2 / "corollary-point_generic.svg"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}
