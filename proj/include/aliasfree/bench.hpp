#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "aliasfree/audio_buffer.hpp"
#include "aliasfree/config.hpp"
#include "aliasfree/filters.hpp"
#include "aliasfree/metrics.hpp"
#include "aliasfree/signal.hpp"

namespace aliasfree {

inline constexpr const char* kToolVersion = "1.0.0";

// Runs fn(0) .. fn(n-1) on up to `threads` workers. Each index is visited
// exactly once; the exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// One row of bench.csv.
struct BenchEntry {
  Waveform waveform = Waveform::Sine;
  std::size_t index = 0;
  double pitch = 0.0;
  double f0_hz = 0.0;
  double duration_s = 0.0;
  int sample_rate = 0;
  std::string path;  // relative to the benchmark directory

  [[nodiscard]] TestSignalSpec spec() const;
};

// Writes one float32 WAV per segment plus bench.csv into `dir`.
std::vector<BenchEntry> gen_bench(const std::filesystem::path& dir, NoteGrid grid);
std::vector<BenchEntry> read_bench_index(const std::filesystem::path& dir);

struct BenchSignal {
  BenchEntry entry;
  AudioBuffer audio;
};

// Reads bench.csv and every WAV it lists; checks rate and length.
std::vector<BenchSignal> load_bench(const std::filesystem::path& dir);
// In-memory equivalent of gen_bench + load_bench (no float32 rounding).
std::vector<BenchSignal> synthesize_bench(NoteGrid grid);

struct ModuleResult {
  std::string name;
  std::string config_hash;
  AhrReport report;
};

ModuleResult evaluate_activation(const NamedActivation& cfg, const std::vector<BenchSignal>& signals,
                                 std::size_t threads);

// Regenerates each benchmark note at 44100 / factor and evaluates the layer.
ModuleResult evaluate_upsampler(const NamedUpsampler& cfg, const std::vector<BenchEntry>& entries,
                                std::size_t threads);

struct UpsamplerRow {
  std::string name;
  std::vector<ModuleResult> runs;  // one per seed for ConvTranspose, else one
  std::array<double, 3> per_type_mean_db{};
  double average_db = 0.0;
  double seed_std_db = 0.0;  // NaN unless stochastic
  double average_prior_on_db = 0.0;  // NaN unless AntiAliasedResample
  double tonal_probe_db = 0.0;
};

struct RunOptions {
  std::size_t threads = 1;
  std::uint64_t seed = 0;
};

// Output files next to the summary CSV `out`:
//   <stem>_per_signal.csv, <stem>_manifest.json and, when the configuration
//   has an oversampling group, <stem>_oversampling.csv.
struct ActivationRunResult {
  std::vector<ModuleResult> main;
  std::vector<ModuleResult> oversampling;
};
ActivationRunResult run_activations(const std::filesystem::path& bench_dir,
                                    const std::vector<NamedActivation>& configs,
                                    const std::filesystem::path& out, const RunOptions& opts);

std::vector<UpsamplerRow> run_upsamplers(const std::filesystem::path& bench_dir, std::size_t factor,
                                         std::size_t seeds, const std::filesystem::path& out,
                                         const RunOptions& opts);

std::string activation_summary_csv(const std::vector<ModuleResult>& rows);
std::string per_signal_csv(const std::vector<ModuleResult>& rows);
std::string upsampler_summary_csv(const std::vector<UpsamplerRow>& rows);

struct SweepPanel {
  std::string name;
  RidgeStats stats;
};

inline constexpr double kSweepStartHz = 20.0;
inline constexpr double kSweepEndHz = 20000.0;
inline constexpr double kSweepDurationS = 4.0;
inline constexpr std::size_t kSweepFrame = 1024;
inline constexpr std::size_t kSweepHop = 256;

// Identity, SnakeBeta at O = 1, 2, 4 and AdaaSnakeBeta at O = 1, 2.
std::vector<NamedActivation> default_sweep_panels();
// <dir>/<name>.csv and .pgm per panel plus <dir>/sweep_summary.csv.
std::vector<SweepPanel> run_sweep(const std::vector<NamedActivation>& panels,
                                  const std::filesystem::path& dir, const RunOptions& opts);

enum class ResponseKind { Linear, Nearest, Designed };
ResponseKind parse_response_kind(std::string_view name);
// Kernel whose response is exported: the symmetric interpolation kernels, or
// the resampling low-pass for factor N.
FirKernel response_kernel(ResponseKind kind, std::size_t n);
// Writes `out` (omega_normalized,magnitude,magnitude_db,phase_rad) and
// <stem>_ideal.csv with the ideal brick-wall response at the same gain.
void write_filter_response(ResponseKind kind, std::size_t n, std::size_t points,
                           const std::filesystem::path& out);

}  // namespace aliasfree
