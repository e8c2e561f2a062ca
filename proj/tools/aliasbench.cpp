// aliasbench: benchmark generation, module evaluation, sweep spectrograms and
// filter responses.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "aliasfree/bench.hpp"
#include "aliasfree/config.hpp"
#include "aliasfree/errors.hpp"

namespace fs = std::filesystem;
using namespace aliasfree;

namespace {

enum ExitCode { kOk = 0, kConfigFailure = 2, kIoFailure = 3, kNumericFailure = 4 };

void print_summary(const std::vector<ModuleResult>& rows) {
  for (const auto& r : rows) {
    std::printf("%-24s sine %9.3f  saw %9.3f  tri %9.3f  avg %9.3f dB\n", r.name.c_str(),
                r.report.per_type_mean_db[0], r.report.per_type_mean_db[1], r.report.per_type_mean_db[2],
                r.report.overall_mean_db);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aliasing benchmark for neural audio activations and upsamplers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  fs::path out;
  RunOptions opts;
  app.add_option("--out", out, "Output file or directory")->required();
  app.add_option("--seed", opts.seed, "Root seed for all random streams");
  app.add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-bench", "Write the test-signal benchmark (WAV + bench.csv)");
  std::string grid = "loguniform48";
  gen->add_option("--note-grid", grid)->check(CLI::IsMember({"chromatic", "loguniform48"}));

  auto* acts = app.add_subcommand("run-activations", "Evaluate activation configurations");
  fs::path bench_dir, config_file;
  acts->add_option("--bench", bench_dir)->required();
  acts->add_option("--configs", config_file, "key=value config file (default: built-in set)");

  auto* ups = app.add_subcommand("run-upsamplers", "Evaluate the upsampling layers");
  std::size_t factor = 2, seeds = 10;
  ups->add_option("--bench", bench_dir)->required();
  ups->add_option("--factor", factor)->check(CLI::Range(2, 16));
  ups->add_option("--seeds", seeds, "Seeds averaged for ConvTranspose")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Spectrograms of a sine sweep through activations");
  sweep->add_option("--config", config_file, "key=value config file (default: six panels)");

  auto* resp = app.add_subcommand("filter-response", "Frequency response of interpolation kernels");
  std::string kind = "linear";
  std::size_t n = 2, points = 4096;
  resp->add_option("--kind", kind)->check(CLI::IsMember({"linear", "nearest", "designed"}));
  resp->add_option("--N", n)->check(CLI::PositiveNumber);
  resp->add_option("--points", points)->check(CLI::Range(2, 1 << 22));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigFailure;
  }

  try {
    if (gen->parsed()) {
      const auto entries = gen_bench(out, parse_note_grid(grid));
      std::printf("wrote %zu signals to %s\n", entries.size(), out.string().c_str());
    } else if (acts->parsed()) {
      const auto configs = config_file.empty() ? default_activation_configs()
                                               : load_config(config_file).activations;
      if (configs.empty()) throw ConfigError("config file has no activation blocks");
      const auto r = run_activations(bench_dir, configs, out, opts);
      print_summary(r.main);
      print_summary(r.oversampling);
    } else if (ups->parsed()) {
      for (const auto& row : run_upsamplers(bench_dir, factor, seeds, out, opts)) {
        std::printf("%-24s avg %9.3f dB  tonal probe %9.3f dB\n", row.name.c_str(), row.average_db,
                    row.tonal_probe_db);
      }
    } else if (sweep->parsed()) {
      const auto panels = config_file.empty() ? default_sweep_panels() : load_config(config_file).activations;
      for (const auto& p : run_sweep(panels, out, opts)) {
        std::printf("%-24s off-ridge %9.3f dB\n", p.name.c_str(), p.stats.off_ridge_db);
      }
    } else if (resp->parsed()) {
      write_filter_response(parse_response_kind(kind), n, points, out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  }
  return kOk;
}
