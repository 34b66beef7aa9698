#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "gsturm/asymptotics.hpp"
#include "gsturm/inverse.hpp"
#include "gsturm/problem.hpp"
#include "gsturm/spectral_data.hpp"

namespace gsturm {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Complex matrices are stored row-major as [[[re, im], ...], ...].
json to_json(const CMatrix& a);
CMatrix matrix_from_json(const json& j, const std::string& what);

json to_json(const AsymptoticCoefficients& c);
AsymptoticCoefficients coefficients_from_json(const json& j);

/// {format_version, kind: "spectral_data", m, N, shift, provenance, entries, coefficients?}.
json to_json(const SpectralDataSet& data);
/// alpha_prime is left empty; run dedup_alpha() once the data passed check_SD().
SpectralDataSet spectral_data_from_json(const json& j);

/// Problem specification:
///   {kind: "graph" | "general", m, potential, h | H, T | T_vector, nodes?}
/// with potential one of
///   {builtin: "zero"}, {builtin: "const", c}, {builtin: "trig"},
///   {matrix: [[term, ...], ...]}  (term: number, [re, im] or a name such as
///                                  "sin", "cos", "sin2x", "cos2x", "x-pi/2"),
///   {mesh: [...], values: [matrix, ...]}.
/// Invalid input throws kParse or the validation error of the problem.
MatrixProblem problem_from_json(const json& j);

json to_json(const Reconstruction& rec);

json to_json(const ResidualReport& r);
json to_json(const CheckResult& c);
json to_json(const SurrogateReport& s);

/// Reads and parses a JSON file (kIo when unreadable, kParse when malformed).
json read_json_file(const std::string& path);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const json& j);

/// CSV table x, q_1..q_m (graph) or x, Re/Im of every entry of Q.
void write_potential_csv(std::ostream& os, const Reconstruction& rec);

}  // namespace gsturm
