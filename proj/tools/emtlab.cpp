// emtlab: command-line front end for the verification suites.
//
//   emtlab run --config cfg.json [--seed N] [--out DIR] [--plots]
//   emtlab verify <suite> [--config cfg.json] [--trials N] [--k ...] [--N ...] [--set key=json ...]
//   emtlab scaling estimate|classify|bounds [--kappa ...]
//   emtlab model gen --generator mass-shell --dim 32 --out model.json
//   emtlab model run --model model.json [--suites a,b] --out DIR
//   emtlab report DIR|record.json ... [--out report.md]
//   emtlab suites
//
// Exit status: 0 when every check passes, 1 when one fails, 2 on bad input.

#include <CLI11.hpp>

#include <iostream>

#include "emt/harness.hpp"
#include "emt/rng.hpp"

namespace fs = std::filesystem;
using emt::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool plots = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "seed for every random draw (overrides the config)");
  app->add_option("--out", c.out, "directory for record.json, CSV tables and plots");
  app->add_flag("--plots", c.plots, "also write SVG plots");
  app->add_option("--set", c.sets, "override one suite parameter, key=json (repeatable)");
}

json load_config(const Common& c) {
  json cfg = c.config.empty() ? json::object() : emt::read_json(c.config);
  if (c.seed) cfg["seed"] = *c.seed;
  return cfg;
}

fs::path config_base(const Common& c) { return c.config.empty() ? fs::path{} : fs::path(c.config).parent_path(); }

/// Puts `value` into params.<suite>.<key> of the config.
void set_param(json& cfg, const std::string& suite, const std::string& key, const json& value) {
  cfg["params"][suite][key] = value;
}

void apply_sets(json& cfg, const std::string& suite, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    const auto key = s.substr(0, eq), raw = s.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare words are strings
    }
    set_param(cfg, suite, key, value);
  }
}

int execute(const json& cfg, const Common& c, json* record = nullptr) {
  const auto run = emt::run_experiment(cfg, config_base(c));
  if (record) *record = run.record;
  for (const auto& check : run.record.at("checks")) {
    std::cout << (check.at("pass").get<bool>() ? "PASS " : "FAIL ") << check.at("suite").get<std::string>();
    if (check.at("result").contains("error")) std::cout << ": " << check.at("result").at("error").get<std::string>();
    std::cout << '\n';
  }
  const auto& s = run.record.at("summary");
  std::cout << s.at("passed") << "/" << s.at("total") << " checks passed\n";
  if (!c.out.empty()) {
    emt::write_run(run, c.out, c.plots);
    std::cout << "record: " << (fs::path(c.out) / "record.json").string() << '\n';
  }
  return run.record.at("pass").get<bool>() ? 0 : 1;
}

const std::vector<std::string> model_suites = {"envelope",  "thm-bk",   "thm-gb",          "stability",
                                               "sobolev",   "weighted", "corollary-point", "corollary-plane"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for energy-momentum transfer bounds"};
  app.require_subcommand(1);

  Common common;

  auto* run = app.add_subcommand("run", "run the suites listed in a config");
  add_common(run, common);

  auto* verify = app.add_subcommand("verify", "run one suite");
  std::string suite;
  std::optional<int> trials;
  std::vector<double> ks;
  std::vector<int> Ns;
  verify->add_option("suite", suite, "suite name (see `emtlab suites`)")->required();
  verify->add_option("--trials", trials, "number of random trials");
  verify->add_option("--k", ks, "frequency-part order(s)");
  verify->add_option("--N", Ns, "dyadic depth(s)");
  add_common(verify, common);

  auto* scaling = app.add_subcommand("scaling", "scaling-degree tools");
  scaling->require_subcommand(1);
  std::vector<double> kappas;
  auto* estimate = scaling->add_subcommand("estimate", "estimate degrees of reference distributions");
  auto* classify = scaling->add_subcommand("classify", "list allowed point singularities per kappa");
  auto* sbounds = scaling->add_subcommand("bounds", "degree lower bounds per (m, kappa)");
  for (auto* sub : {estimate, classify, sbounds}) add_common(sub, common);
  for (auto* sub : {classify, sbounds}) sub->add_option("--kappa", kappas, "envelope exponent(s)");

  auto* model = app.add_subcommand("model", "toy model files");
  model->require_subcommand(1);
  auto* gen = model->add_subcommand("gen", "write a model spectrum (and optionally a field) to JSON");
  std::string generator = "mass-shell", model_out, field_out;
  std::size_t dim = 32;
  double mass = 1.0, dp = 0.5, spacing = 1.0, energy_scale = 1.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--generator", generator, "random-cone, lattice or mass-shell")
      ->check(CLI::IsMember({"random-cone", "lattice", "mass-shell"}));
  gen->add_option("--dim", dim, "Hilbert-space dimension")->check(CLI::PositiveNumber);
  gen->add_option("--mass", mass, "mass-shell mass");
  gen->add_option("--dp", dp, "mass-shell momentum step");
  gen->add_option("--spacing", spacing, "lattice spacing");
  gen->add_option("--energy-scale", energy_scale, "random-cone energy scale");
  gen->add_option("--seed", gen_seed, "seed for random-cone spectra and fields");
  gen->add_option("--out", model_out, "model JSON path")->required();
  gen->add_option("--field-out", field_out, "also write a random field matrix here");

  auto* mrun = model->add_subcommand("run", "run the model suites on a model file");
  std::string model_file, field_file;
  std::vector<std::string> suites;
  mrun->add_option("--model", model_file, "model JSON")->required()->check(CLI::ExistingFile);
  mrun->add_option("--field", field_file, "field matrix JSON")->check(CLI::ExistingFile);
  mrun->add_option("--suites", suites, "suites to run (default: all model suites)")->delimiter(',');
  add_common(mrun, common);

  auto* report = app.add_subcommand("report", "markdown rollup of run records");
  std::vector<std::string> inputs;
  std::string report_out;
  report->add_option("records", inputs, "run directories or record.json files")->required();
  report->add_option("--out", report_out, "markdown file (default: stdout)");

  auto* list = app.add_subcommand("suites", "list suites and their default parameters");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(load_config(common), common);

    if (*verify) {
      if (!emt::is_suite(suite)) throw std::invalid_argument("unknown suite '" + suite + "'");
      json cfg = load_config(common);
      cfg["suites"] = {suite};
      const json defaults = emt::suite_defaults(suite);
      if (trials) set_param(cfg, suite, "trials", *trials);
      if (!ks.empty()) {
        if (defaults.contains("ks")) set_param(cfg, suite, "ks", ks);
        else if (ks.size() == 1) set_param(cfg, suite, "k", ks[0]);
        else throw std::invalid_argument(suite + " takes a single --k");
      }
      if (!Ns.empty()) {
        if (defaults.contains("Ns")) set_param(cfg, suite, "Ns", Ns);
        else if (Ns.size() == 1 && defaults.contains("N_max")) set_param(cfg, suite, "N_max", Ns[0]);
        else throw std::invalid_argument(suite + " does not take --N");
      }
      apply_sets(cfg, suite, common.sets);
      return execute(cfg, common);
    }

    if (*scaling) {
      const std::string name = *estimate ? "scaling-estimate" : *classify ? "scaling-classify" : "scaling-bounds";
      json cfg = load_config(common);
      cfg["suites"] = {name};
      if (!kappas.empty()) set_param(cfg, name, "kappas", kappas);
      apply_sets(cfg, name, common.sets);
      json record;
      const int status = execute(cfg, common, &record);
      if (*classify && record.at("checks")[0].at("result").contains("classes")) {
        for (const auto& c : record.at("checks")[0].at("result").at("classes")) {
          std::cout << "kappa = " << c.at("kappa").dump() << ":";
          for (const auto& s : c.at("allowed"))
            std::cout << " (m=" << s.at("m") << ", l=" << s.at("l") << (s.at("at_origin").get<bool>() ? ", q=0" : "")
                      << ")";
          std::cout << '\n';
        }
      }
      return status;
    }

    if (*gen) {
      json spec = {{"generator", generator}, {"dim", dim}};
      if (generator == "mass-shell") spec.update({{"mass", mass}, {"dp", dp}});
      if (generator == "lattice") spec["spacing"] = spacing;
      if (generator == "random-cone") spec["energy_scale"] = energy_scale;
      const auto ctx = emt::load_model(spec, json::object(), gen_seed);
      emt::write_json(model_out, emt::to_json(*ctx.model));
      std::cout << "model: " << model_out << " (" << ctx.model->dim() << " states)\n";
      if (!field_out.empty()) {
        auto rng = emt::stream(gen_seed, "field");
        const auto b = emt::OperatorField::random(ctx.model, rng);
        emt::write_json(field_out, emt::matrix_to_json(b.matrix()));
        std::cout << "field: " << field_out << '\n';
      }
      return 0;
    }

    if (*mrun) {
      json cfg = load_config(common);
      // paths given on the command line are relative to the working directory
      cfg["model"] = {{"file", fs::absolute(model_file).string()}, {"family", fs::path(model_file).stem().string()}};
      if (!field_file.empty()) cfg["field"] = {{"file", fs::absolute(field_file).string()}};
      cfg["suites"] = suites.empty() ? json(model_suites) : json(suites);
      if (!common.sets.empty()) {
        if (cfg["suites"].size() != 1) throw std::invalid_argument("--set needs exactly one suite");
        apply_sets(cfg, cfg["suites"][0].get<std::string>(), common.sets);
      }
      return execute(cfg, common);
    }

    if (*report) {
      std::vector<std::pair<fs::path, json>> records;
      for (const auto& in : inputs) {
        const fs::path p = fs::is_directory(in) ? fs::path(in) / "record.json" : fs::path(in);
        records.emplace_back(p, emt::read_json(p));
      }
      const auto md = emt::render_report(records);
      if (report_out.empty()) std::cout << md;
      else emt::write_text(report_out, md);
      return 0;
    }

    if (*list) {
      for (const auto& name : emt::suite_names()) std::cout << name << ' ' << emt::suite_defaults(name).dump() << '\n';
      return 0;
    }
  } catch (const emt::HypothesisError& e) {
    std::cerr << "hypothesis violated: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
