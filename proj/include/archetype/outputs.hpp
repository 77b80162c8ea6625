#pragma once

#include <optional>
#include <string>

#include "archetype/ensemble.hpp"
#include "archetype/image.hpp"
#include "archetype/metrics.hpp"
#include "archetype/solver.hpp"

namespace archetype {

// Everything needed to audit and bitwise-replay an unmixing run: input
// descriptor, config echo, per-run measurements, and the selection.
struct RunReport {
  std::string version;
  std::string input_path;
  std::size_t bands = 0;
  std::size_t pixels = 0;
  std::optional<Shape2d> spatial;
  std::size_t zero_pixels = 0;
  EnsembleConfig config;
  SelectionReport selection;
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

std::string evaluation_to_json(const EvaluationResult& result);

// endmembers.csv: header row of 1-based endmember indices, then one row
// per band at 17 significant digits (doubles round-trip exactly).
void write_csv_endmembers(const std::string& path, const Matrix& e);
Matrix read_csv_endmembers(const std::string& path);

// Binary 8-bit PGM; values must already be bytes.
void write_pgm(const std::string& path, const std::vector<std::uint8_t>& bytes,
               std::size_t height, std::size_t width);

// The unmix output bundle: endmembers.csv, abundances.npy (p×N, <f8),
// report.json, and maps/endmember_<k>.pgm (k 1-based, value =
// round(255·abundance)) when the report carries spatial dims.
void write_outputs(const std::string& dir, const RunResult& result, const RunReport& report);

}  // namespace archetype
