#include "archetype/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "archetype/error.hpp"
#include "archetype/npy.hpp"
#include "archetype/version.hpp"

namespace archetype {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json run_record_to_json(const RunRecord& rec) {
  json j{{"index", rec.index},   {"seed", rec.seed},
         {"gamma", rec.gamma},   {"fit_l1", rec.fit_l1},
         {"coherence", rec.coherence}, {"wall_ms", rec.wall_ms},
         {"ok", rec.ok}};
  if (!rec.ok) j["error"] = rec.error;
  return j;
}

RunRecord run_record_from_json(const json& j) {
  RunRecord rec;
  rec.index = j.at("index").get<std::size_t>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.gamma = j.at("gamma").get<double>();
  rec.fit_l1 = j.at("fit_l1").get<double>();
  rec.coherence = j.at("coherence").get<double>();
  rec.wall_ms = j.at("wall_ms").get<double>();
  rec.ok = j.at("ok").get<bool>();
  if (j.contains("error")) rec.error = j.at("error").get<std::string>();
  return rec;
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  json input{{"path", report.input_path},
             {"bands", report.bands},
             {"pixels", report.pixels}};
  if (report.spatial) {
    input["height"] = report.spatial->height;
    input["width"] = report.spatial->width;
  }

  json config{{"endmembers", report.config.solver.endmembers},
              {"outer_iters", report.config.solver.outer_iters},
              {"inner_iters_a", report.config.solver.inner_iters_a},
              {"inner_iters_b", report.config.solver.inner_iters_b},
              {"runs", report.config.runs},
              {"base_seed", report.config.base_seed},
              {"gamma_set", report.config.gamma_set},
              {"fit_slack", report.config.fit_slack}};

  json runs = json::array();
  for (const RunRecord& rec : report.selection.per_run) runs.push_back(run_record_to_json(rec));

  const RunRecord& chosen = report.selection.per_run.at(report.selection.selected);
  json selection{{"candidates", report.selection.candidate_set},
                 {"selected", report.selection.selected},
                 {"fit_min", report.selection.fit_min},
                 {"seed", chosen.seed},
                 {"gamma", chosen.gamma}};

  const json j{{"version", report.version.empty() ? kVersion : report.version},
               {"input", input},
               {"zero_pixels", report.zero_pixels},
               {"config", config},
               {"runs", runs},
               {"selection", selection}};
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report JSON: ") + e.what());
  }
  try {
    RunReport report;
    report.version = j.at("version").get<std::string>();
    const json& input = j.at("input");
    report.input_path = input.at("path").get<std::string>();
    report.bands = input.at("bands").get<std::size_t>();
    report.pixels = input.at("pixels").get<std::size_t>();
    if (input.contains("height")) {
      report.spatial = Shape2d{input.at("height").get<std::size_t>(),
                               input.at("width").get<std::size_t>()};
    }
    report.zero_pixels = j.at("zero_pixels").get<std::size_t>();
    const json& config = j.at("config");
    report.config.solver.endmembers = config.at("endmembers").get<std::size_t>();
    report.config.solver.outer_iters = config.at("outer_iters").get<std::size_t>();
    report.config.solver.inner_iters_a = config.at("inner_iters_a").get<std::size_t>();
    report.config.solver.inner_iters_b = config.at("inner_iters_b").get<std::size_t>();
    report.config.runs = config.at("runs").get<std::size_t>();
    report.config.base_seed = config.at("base_seed").get<std::uint64_t>();
    report.config.gamma_set = config.at("gamma_set").get<std::vector<double>>();
    report.config.fit_slack = config.at("fit_slack").get<double>();
    for (const json& rec : j.at("runs")) {
      report.selection.per_run.push_back(run_record_from_json(rec));
    }
    const json& selection = j.at("selection");
    report.selection.candidate_set = selection.at("candidates").get<std::vector<std::size_t>>();
    report.selection.selected = selection.at("selected").get<std::size_t>();
    report.selection.fit_min = selection.at("fit_min").get<double>();
    return report;
  } catch (const json::exception& e) {
    throw Error(std::string("report JSON missing fields: ") + e.what());
  }
}

std::string evaluation_to_json(const EvaluationResult& result) {
  json per = json::array();
  for (std::size_t i = 0; i < result.per_rmse.size(); ++i) {
    per.push_back({{"index", i + 1}, {"rmse", result.per_rmse[i]}, {"sad", result.per_sad[i]}});
  }
  const json j{{"overall_rmse", result.overall_rmse},
               {"overall_sad", result.overall_sad},
               {"per_endmember", per},
               {"permutation", result.permutation},
               {"ground_truth_renormalized", result.ground_truth_renormalized}};
  return j.dump(2) + "\n";
}

void write_csv_endmembers(const std::string& path, const Matrix& e) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(path + ": cannot open file for writing");
  for (std::size_t j = 0; j < e.cols(); ++j) {
    if (j) out << ',';
    out << (j + 1);
  }
  out << '\n';
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j = 0; j < e.cols(); ++j) {
      if (j) out << ',';
      out << format_value(e(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(path + ": write failed");
}

Matrix read_csv_endmembers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty file");
  std::size_t cols = 1;
  for (char c : line) cols += c == ',';

  std::vector<double> cells;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;
    std::istringstream row(line);
    std::string token;
    std::size_t got = 0;
    while (std::getline(row, token, ',')) {
      const char* begin = token.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw Error(path + ": malformed number '" + token + "'");
      cells.push_back(v);
      ++got;
    }
    if (got != cols)
      throw Error(path + ": ragged row (expected " + std::to_string(cols) + " columns)");
    ++rows;
  }
  if (rows == 0) throw Error(path + ": no data rows");

  Matrix m(rows, cols);
  std::copy(cells.begin(), cells.end(), m.values().begin());
  return m;
}

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& bytes,
               std::size_t height, std::size_t width) {
  if (bytes.size() != height * width) throw Error(path + ": pixel count mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(path + ": write failed");
}

void write_outputs(const std::string& dir, const RunResult& result, const RunReport& report) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(dir + ": cannot create directory (" + ec.message() + ")");

  write_csv_endmembers((fs::path(dir) / "endmembers.csv").string(), result.endmembers.data);

  const Matrix& a = result.abundances.data;
  const std::size_t shape[2] = {a.rows(), a.cols()};
  write_npy((fs::path(dir) / "abundances.npy").string(), shape, a.values());

  {
    const fs::path path = fs::path(dir) / "report.json";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot open file for writing");
    out << report_to_json(report);
    if (!out) throw Error(path.string() + ": write failed");
  }

  if (!report.spatial) return;
  const std::size_t h = report.spatial->height;
  const std::size_t w = report.spatial->width;
  if (h * w != a.cols()) throw Error(dir + ": spatial dims do not match pixel count");
  const fs::path maps = fs::path(dir) / "maps";
  fs::create_directories(maps, ec);
  if (ec) throw Error(maps.string() + ": cannot create directory (" + ec.message() + ")");
  std::vector<std::uint8_t> bytes(h * w);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t j = 0; j < bytes.size(); ++j) {
      const double v = std::max(0.0, std::min(1.0, a(k, j)));
      bytes[j] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
    write_pgm((maps / ("endmember_" + std::to_string(k + 1) + ".pgm")).string(), bytes, h, w);
  }
}

}  // namespace archetype
