#include "archetype/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "archetype/ensemble.hpp"
#include "archetype/envi.hpp"
#include "archetype/error.hpp"
#include "archetype/image.hpp"
#include "archetype/metrics.hpp"
#include "archetype/npy.hpp"
#include "archetype/outputs.hpp"
#include "archetype/solver.hpp"
#include "archetype/synth.hpp"
#include "archetype/version.hpp"

namespace archetype {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool has_suffix(const std::string& path, const std::string& suffix) {
  if (path.size() < suffix.size()) return false;
  std::string tail = path.substr(path.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return tail == suffix;
}

HsiImage load_input(const std::string& path) {
  if (has_suffix(path, ".hdr")) return read_envi(path, envi_data_path(path));
  if (has_suffix(path, ".npy")) return npy_to_image(read_npy(path));
  throw Error(path + ": unrecognized input format (expected .npy or .hdr)");
}

Matrix load_matrix(const std::string& path) {
  if (has_suffix(path, ".csv")) return read_csv_endmembers(path);
  if (has_suffix(path, ".npy")) return npy_to_matrix(read_npy(path));
  throw Error(path + ": unrecognized matrix format (expected .npy or .csv)");
}

std::size_t count_zero_pixels(const HsiImage& image) {
  std::size_t zeros = 0;
  for (std::size_t j = 0; j < image.pixels(); ++j) {
    bool all_zero = true;
    for (std::size_t i = 0; i < image.bands() && all_zero; ++i)
      all_zero = image.data(i, j) == 0.0;
    zeros += all_zero;
  }
  return zeros;
}

struct UnmixArgs {
  std::string input;
  std::string output;
  std::size_t endmembers = 0;
  std::size_t runs = 50;
  std::size_t outer = 100;
  std::size_t inner = 5;
  std::uint64_t seed = 0;
  std::vector<double> gamma_set{0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  double fit_slack = 1.05;
  bool json_out = false;
};

int do_unmix(const UnmixArgs& args, std::ostream& out) {
  HsiImage image = load_input(args.input);
  image.validate();
  NormalizeResult norm = l2_normalize(image);

  EnsembleConfig config;
  config.runs = args.runs;
  config.base_seed = args.seed;
  config.gamma_set = args.gamma_set;
  config.fit_slack = args.fit_slack;
  config.solver.endmembers = args.endmembers;
  config.solver.outer_iters = args.outer;
  config.solver.inner_iters_a = args.inner;
  config.solver.inner_iters_b = args.inner;

  auto [result, selection] = run_ensemble(norm.image, config);

  RunReport report;
  report.version = kVersion;
  report.input_path = args.input;
  report.bands = image.bands();
  report.pixels = image.pixels();
  report.spatial = image.spatial;
  report.zero_pixels = norm.zero_pixels.size();
  report.config = config;
  report.selection = std::move(selection);
  write_outputs(args.output, result, report);

  if (args.json_out) {
    out << report_to_json(report);
    return 0;
  }
  const RunRecord& chosen = report.selection.per_run.at(report.selection.selected);
  out << "input: " << args.input << " (" << report.bands << " bands, " << report.pixels
      << " pixels)\n";
  out << "zero pixels: " << report.zero_pixels << "\n";
  out << "runs: " << report.config.runs << ", candidates: " << report.selection.candidate_set.size()
      << ", selected: run " << report.selection.selected << " (seed " << chosen.seed << ", gamma "
      << chosen.gamma << ")\n";
  out << "fit_l1: " << chosen.fit_l1 << " (min " << report.selection.fit_min << "), coherence: "
      << chosen.coherence << "\n";
  out << "wrote: " << args.output << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string est_dir;
  std::string gt_endmembers;
  std::string gt_abundances;
  bool json_out = false;
};

int do_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err) {
  const Matrix est_e = read_csv_endmembers((fs::path(args.est_dir) / "endmembers.csv").string());
  const Matrix est_a = npy_to_matrix(read_npy((fs::path(args.est_dir) / "abundances.npy").string()));
  const Matrix gt_e = load_matrix(args.gt_endmembers);
  const Matrix gt_a = npy_to_matrix(read_npy(args.gt_abundances));

  const EvaluationResult result = evaluate_unmixing({gt_e}, {gt_a}, {est_e}, {est_a});
  if (result.ground_truth_renormalized)
    err << "note: ground-truth abundance columns renormalized to sum 1\n";
  out << (args.json_out ? evaluation_to_json(result) : format_evaluation(result));
  return 0;
}

struct SynthArgs {
  std::size_t bands = 0;
  std::size_t pixels = 0;
  std::size_t endmembers = 0;
  std::optional<double> snr_db;
  double alpha = 1.0;
  bool pure_pixels = false;
  std::uint64_t seed = 0;
  std::string output;
  bool json_out = false;
};

int do_synth(const SynthArgs& args, std::ostream& out) {
  SynthSpec spec;
  spec.bands = args.bands;
  spec.pixels = args.pixels;
  spec.endmembers = args.endmembers;
  spec.snr_db = args.snr_db;
  spec.dirichlet_alpha = args.alpha;
  spec.pure_pixels = args.pure_pixels;
  spec.seed = args.seed;

  const SynthData data = generate(spec);

  std::error_code ec;
  fs::create_directories(args.output, ec);
  if (ec) throw Error(args.output + ": cannot create directory (" + ec.message() + ")");

  const Matrix& x = data.image.data;
  const std::size_t cube_shape[2] = {x.rows(), x.cols()};
  write_npy((fs::path(args.output) / "cube.npy").string(), cube_shape, x.values());
  write_csv_endmembers((fs::path(args.output) / "endmembers.csv").string(), data.endmembers.data);
  const Matrix& a = data.abundances.data;
  const std::size_t a_shape[2] = {a.rows(), a.cols()};
  write_npy((fs::path(args.output) / "abundances.npy").string(), a_shape, a.values());

  json echo{{"version", kVersion},
            {"bands", spec.bands},
            {"pixels", spec.pixels},
            {"endmembers", spec.endmembers},
            {"snr_db", spec.snr_db ? json(*spec.snr_db) : json(nullptr)},
            {"alpha", spec.dirichlet_alpha},
            {"pure_pixels", spec.pure_pixels},
            {"seed", spec.seed}};
  {
    const fs::path path = fs::path(args.output) / "synth.json";
    std::ofstream meta(path, std::ios::trunc);
    if (!meta) throw Error(path.string() + ": cannot open file for writing");
    meta << echo.dump(2) << "\n";
    if (!meta) throw Error(path.string() + ": write failed");
  }

  if (args.json_out) {
    out << echo.dump(2) << "\n";
  } else {
    out << "wrote " << args.output << ": cube.npy (" << spec.bands << "x" << spec.pixels
        << "), endmembers.csv, abundances.npy, synth.json\n";
  }
  return 0;
}

struct InfoArgs {
  std::string input;
  bool json_out = false;
};

int do_info(const InfoArgs& args, std::ostream& out) {
  const HsiImage image = load_input(args.input);
  if (image.data.empty()) throw Error(args.input + ": empty image");
  const std::size_t zeros = count_zero_pixels(image);

  if (args.json_out) {
    json j{{"bands", image.bands()},
           {"pixels", image.pixels()},
           {"min", image.data.min_value()},
           {"max", image.data.max_value()},
           {"zero_pixels", zeros}};
    if (image.spatial) {
      j["height"] = image.spatial->height;
      j["width"] = image.spatial->width;
    }
    if (!image.wavelengths.empty()) {
      const auto [lo, hi] = std::minmax_element(image.wavelengths.begin(),
                                                image.wavelengths.end());
      j["wavelength_min"] = *lo;
      j["wavelength_max"] = *hi;
    }
    out << j.dump(2) << "\n";
    return 0;
  }

  out << "bands=" << image.bands() << " pixels=" << image.pixels();
  if (image.spatial)
    out << " height=" << image.spatial->height << " width=" << image.spatial->width;
  out << "\n";
  out << "min=" << image.data.min_value() << " max=" << image.data.max_value()
      << " zero_pixels=" << zeros << "\n";
  if (!image.wavelengths.empty()) {
    const auto [lo, hi] = std::minmax_element(image.wavelengths.begin(),
                                              image.wavelengths.end());
    out << "wavelengths=" << image.wavelengths.size() << " range=" << *lo << "-" << *hi << "\n";
  }
  return 0;
}

}  // namespace

int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"blind hyperspectral unmixing via entropic descent archetypal analysis"};
  app.name("archetype");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  UnmixArgs unmix;
  CLI::App* unmix_cmd = app.add_subcommand("unmix", "factor a cube into endmembers and abundances");
  unmix_cmd->add_option("--input", unmix.input, "input cube (.npy matrix/cube or ENVI .hdr)")
      ->required();
  unmix_cmd->add_option("--endmembers", unmix.endmembers, "number of endmembers p")
      ->required()
      ->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  unmix_cmd->add_option("--runs", unmix.runs, "ensemble size M")->capture_default_str();
  unmix_cmd->add_option("--outer", unmix.outer, "outer iterations T")->capture_default_str();
  unmix_cmd->add_option("--inner", unmix.inner, "inner iterations per block K")
      ->capture_default_str();
  unmix_cmd->add_option("--seed", unmix.seed, "base seed")->capture_default_str();
  unmix_cmd->add_option("--gamma-set", unmix.gamma_set, "step factor choices")
      ->delimiter(',')
      ->capture_default_str();
  unmix_cmd->add_option("--fit-slack", unmix.fit_slack, "candidate cutoff over best fit")
      ->capture_default_str();
  unmix_cmd->add_option("--output", unmix.output, "output directory")->required();
  unmix_cmd->add_flag("--json", unmix.json_out, "print the run report as JSON");

  EvaluateArgs evaluate;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "score an estimate against ground truth");
  evaluate_cmd->add_option("--est", evaluate.est_dir, "unmix output directory")->required();
  evaluate_cmd
      ->add_option("--gt-endmembers", evaluate.gt_endmembers, "ground-truth spectra (.csv or .npy)")
      ->required();
  evaluate_cmd
      ->add_option("--gt-abundances", evaluate.gt_abundances, "ground-truth abundances (.npy)")
      ->required();
  evaluate_cmd->add_flag("--json", evaluate.json_out, "print scores as JSON");

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic mixing fixture");
  synth_cmd->add_option("--bands", synth.bands, "spectral bands L")->required();
  synth_cmd->add_option("--pixels", synth.pixels, "pixel count N")->required();
  synth_cmd->add_option("--endmembers", synth.endmembers, "endmember count p")->required();
  synth_cmd->add_option("--snr", synth.snr_db, "noise level in dB (omit for noiseless)");
  synth_cmd->add_option("--alpha", synth.alpha, "Dirichlet concentration")->capture_default_str();
  synth_cmd->add_flag("--pure-pixels", synth.pure_pixels, "plant one pure pixel per endmember");
  synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--output", synth.output, "output directory")->required();
  synth_cmd->add_flag("--json", synth.json_out, "print the echoed spec as JSON");

  InfoArgs info;
  CLI::App* info_cmd = app.add_subcommand("info", "describe a cube without processing it");
  info_cmd->add_option("--input", info.input, "input cube (.npy or ENVI .hdr)")->required();
  info_cmd->add_flag("--json", info.json_out, "print description as JSON");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << app.help();
    return 1;
  }

  try {
    if (unmix_cmd->parsed()) return do_unmix(unmix, out);
    if (evaluate_cmd->parsed()) return do_evaluate(evaluate, out, err);
    if (synth_cmd->parsed()) return do_synth(synth, out);
    if (info_cmd->parsed()) return do_info(info, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << "error: no subcommand given\n";
  return 1;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(std::move(args), std::cout, std::cerr);
}

}  // namespace archetype
