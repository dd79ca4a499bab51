#include "emt/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace emt {

namespace {

json complex_json(cd z) { return json::array({number(z.real()), number(z.imag())}); }

cd complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex number must be [re, im]");
  return {to_double(j[0]), to_double(j[1])};
}

}  // namespace

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw std::invalid_argument("expected a number, got " + j.dump());
}

json to_json(const FourVector& x) { return json::array({number(x[0]), number(x[1]), number(x[2]), number(x[3])}); }

FourVector four_vector_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("four-vector must have 4 components");
  return {to_double(j[0]), to_double(j[1]), to_double(j[2]), to_double(j[3])};
}

json to_json(const DiscreteMeasure& nu) {
  json atoms = json::array();
  for (const auto& a : nu.atoms()) atoms.push_back({{"x", to_json(a.x)}, {"w", complex_json(a.w)}});
  return {{"atoms", atoms}};
}

DiscreteMeasure measure_from_json(const json& j) {
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back({four_vector_from_json(a.at("x")), complex_from(a.at("w"))});
  return DiscreteMeasure(std::move(atoms));
}

json to_json(const Signal& s) {
  json samples = json::array();
  for (cd z : s.samples) samples.push_back(complex_json(z));
  return {{"t0", number(s.t0)}, {"dt", number(s.dt)}, {"samples", samples}};
}

Signal signal_from_json(const json& j) {
  Signal s;
  s.t0 = to_double(j.at("t0"));
  s.dt = to_double(j.at("dt"));
  for (const auto& z : j.at("samples")) s.samples.push_back(complex_from(z));
  s.validate();
  return s;
}

json to_json(const QuantumModel& m) {
  json spectrum = json::array();
  for (const auto& p : m.spectrum()) spectrum.push_back(to_json(p));
  return {{"spectrum", spectrum}};
}

QuantumModel model_from_json(const json& j) {
  std::vector<FourVector> spectrum;
  for (const auto& p : j.at("spectrum")) spectrum.push_back(four_vector_from_json(p));
  if (spectrum.empty()) throw std::invalid_argument("model spectrum is empty");
  return QuantumModel(std::move(spectrum));
}

json matrix_to_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(complex_json(a(r, c)));
    rows.push_back(row);
  }
  return {{"matrix", rows}};
}

Matrix matrix_from_json(const json& j) {
  const auto& rows = j.at("matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix a(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != m) throw std::invalid_argument("ragged matrix rows");
    for (Eigen::Index c = 0; c < m; ++c) a(r, c) = complex_from(rows[r][c]);
  }
  return a;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace emt
