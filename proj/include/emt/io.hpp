#pragma once

// JSON forms of the data types and plain-text file helpers.
//
//   measure:  {"atoms": [{"x": [t, x, y, z], "w": [re, im]}, ...]}
//   signal:   {"t0": .., "dt": .., "samples": [[re, im], ...]}
//   model:    {"spectrum": [[p0, p1, p2, p3], ...]}
//   operator: {"matrix": [[[re, im], ...], ...]}   (row-major)
//
// Non-finite doubles are written as the strings "inf", "-inf" and "nan".

#include <filesystem>
#include <string>

#include <json.hpp>

#include "emt/frac.hpp"
#include "emt/toy_model.hpp"

namespace emt {

using json = nlohmann::json;

json number(double v);
/// Inverse of number(); throws std::invalid_argument on anything else.
double to_double(const json& j);

json to_json(const FourVector& x);
FourVector four_vector_from_json(const json& j);

json to_json(const DiscreteMeasure& nu);
DiscreteMeasure measure_from_json(const json& j);

json to_json(const Signal& s);
Signal signal_from_json(const json& j);

json to_json(const QuantumModel& m);
QuantumModel model_from_json(const json& j);

json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const json& j);

json read_json(const std::filesystem::path& path);
/// Writes dump(2) plus a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace emt
