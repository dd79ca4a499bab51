#pragma once

// Experiment orchestration: suites are named checks with JSON parameters.
// A run validates every suite's parameters first, then executes them in
// order. Every random draw comes from stream(seed, tag, index), so a record
// is a pure function of (config, seed).
//
// Config:
//   {"suites": [...], "seed": N,
//    "model": {"generator": "mass-shell", "dim": 16, ...} | {"file": path},
//    "field": {"generator": "random"} | {"file": path},
//    "params": {"common": {...}, "<suite>": {...}},
//    "tolerances": {"<suite>": {...}}}

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emt/io.hpp"
#include "emt/plot.hpp"
#include "emt/toy_model.hpp"

namespace emt {

inline constexpr const char* record_schema_version = "1.0";

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& t);
/// Shortest round-trip decimal form (same text as the JSON record).
std::string csv_number(double v);

struct SuiteOutput {
  std::string suite;
  json params;  // effective parameters
  json result;
  bool pass = false;
  std::vector<Table> tables;
  std::vector<LogLogPlot> plots;
};

/// Model and field a bound suite runs on.
struct ModelContext {
  std::string family;
  std::shared_ptr<const QuantumModel> model;
  std::optional<Matrix> field;  // random field from the seed when empty
};

std::vector<std::string> suite_names();
bool is_suite(const std::string& name);
/// Defaults of a suite's parameters; also the set of accepted keys.
json suite_defaults(const std::string& name);

/// Defaults overlaid with `overrides`; unknown keys throw std::invalid_argument.
json merge_params(const std::string& suite, const json& overrides);

/// Parses and checks the parameters without running anything. Throws
/// HypothesisError naming the violated hypothesis.
void validate_suite(const std::string& suite, const json& params);

SuiteOutput run_suite(const std::string& suite, const json& params, std::uint64_t seed,
                      const ModelContext* context = nullptr);

/// {"generator": "random-cone" | "lattice" | "mass-shell", "dim": d, ...} or {"file": path}.
ModelContext load_model(const json& model_spec, const json& field_spec, std::uint64_t seed,
                        const std::filesystem::path& base = {});

struct RunRecord {
  json record;  // deterministic part
  std::vector<SuiteOutput> outputs;
  json timings;  // wall-clock seconds per suite, kept out of the record
};

/// FNV-1a of the canonical dump of the config, as 16 hex digits.
std::string config_hash(const json& config);

/// `base` resolves relative model/field file paths.
RunRecord run_experiment(const json& config, const std::filesystem::path& base = {});

/// record.json, <suite>_<table>.csv, timings.json and, with plots, <plot>.svg.
void write_run(const RunRecord& run, const std::filesystem::path& dir, bool plots);

/// Markdown summary of several records: per-suite rollup counts and a table
/// of every check with links to its CSV evidence and plots under `dir`.
std::string render_report(const std::vector<std::pair<std::filesystem::path, json>>& records);

}  // namespace emt
