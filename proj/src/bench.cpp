#include "aliasfree/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aliasfree/activations.hpp"
#include "aliasfree/errors.hpp"
#include "aliasfree/random.hpp"
#include "aliasfree/upsamplers.hpp"
#include "aliasfree/wav.hpp"

namespace fs = std::filesystem;

namespace aliasfree {
namespace {

constexpr int kBenchRate = 44100;
constexpr double kBenchDuration = 5.0;
constexpr double kProbeDc = 0.5;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string db_cell(double v) { return std::isnan(v) ? "NA" : fmt("%.4f", v); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.emplace_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

void check_finite(const AudioBuffer& y, const std::string& what) {
  if (!all_finite(y)) throw NumericError(what + ": non-finite output samples");
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Content hash of bench.csv and every WAV it lists.
std::string bench_hash(const fs::path& dir, const std::vector<BenchEntry>& entries) {
  std::uint64_t h = fnv1a64(read_text(dir / "bench.csv"));
  for (const auto& e : entries) h = mix64(h ^ fnv1a64(read_text(dir / e.path)));
  return hex16(h);
}

std::vector<SignalAhr> evaluate_signals(std::size_t n, std::size_t threads,
                                        const std::function<SignalAhr(std::size_t)>& fn) {
  std::vector<SignalAhr> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

}  // namespace

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (!path.parent_path().empty()) ensure_dir(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

TestSignalSpec BenchEntry::spec() const {
  TestSignalSpec s;
  s.waveform = waveform;
  s.pitch = pitch;
  s.duration_s = duration_s;
  s.sample_rate = sample_rate;
  s.amplitude = benchmark_peak();
  return s;
}

std::vector<BenchEntry> gen_bench(const fs::path& dir, NoteGrid grid) {
  ensure_dir(dir);
  std::vector<BenchEntry> entries;
  std::string csv = "type,index,pitch,f0_hz,duration_s,sample_rate,path\n";
  for (const auto& seg : benchmark_segments(grid, kBenchRate, kBenchDuration)) {
    BenchEntry e;
    e.waveform = seg.spec.waveform;
    e.index = seg.index;
    e.pitch = seg.spec.pitch;
    e.f0_hz = seg.spec.f0_hz();
    e.duration_s = seg.spec.duration_s;
    e.sample_rate = seg.spec.sample_rate;
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu.wav", std::string(to_string(e.waveform)).c_str(), e.index);
    e.path = name;
    AudioBuffer audio = gen_bandlimited(e.spec());
    const auto bytes = encode_wav(audio);
    write_file_atomic(dir / e.path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    csv += std::string(to_string(e.waveform)) + "," + std::to_string(e.index) + "," + fmt("%.17g", e.pitch) + "," +
           fmt("%.17g", e.f0_hz) + "," + fmt("%.17g", e.duration_s) + "," + std::to_string(e.sample_rate) + "," +
           e.path + "\n";
    entries.push_back(std::move(e));
  }
  write_file_atomic(dir / "bench.csv", csv);
  return entries;
}

std::vector<BenchEntry> read_bench_index(const fs::path& dir) {
  const fs::path index = dir / "bench.csv";
  if (!fs::exists(index)) throw IoError("benchmark index not found: " + index.string());
  std::istringstream in(read_text(index));
  std::string line;
  if (!std::getline(in, line) || line != "type,index,pitch,f0_hz,duration_s,sample_rate,path") {
    throw IoError("unexpected header in " + index.string());
  }
  std::vector<BenchEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw IoError("malformed row in " + index.string() + ": " + line);
    try {
      BenchEntry e;
      e.waveform = parse_waveform(f[0]);
      e.index = std::stoul(f[1]);
      e.pitch = std::stod(f[2]);
      e.f0_hz = std::stod(f[3]);
      e.duration_s = std::stod(f[4]);
      e.sample_rate = std::stoi(f[5]);
      e.path = f[6];
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw IoError("malformed row in " + index.string() + ": " + ex.what());
    }
  }
  if (out.empty()) throw IoError("benchmark index is empty: " + index.string());
  return out;
}

std::vector<BenchSignal> load_bench(const fs::path& dir) {
  std::vector<BenchSignal> out;
  for (auto& e : read_bench_index(dir)) {
    AudioBuffer a = wav_read(dir / e.path);
    const auto expected = static_cast<std::size_t>(std::llround(e.duration_s * e.sample_rate));
    if (a.sample_rate() != e.sample_rate || a.size() != expected) {
      throw IoError("benchmark file does not match its index entry: " + e.path);
    }
    out.push_back({std::move(e), std::move(a)});
  }
  return out;
}

std::vector<BenchSignal> synthesize_bench(NoteGrid grid) {
  std::vector<BenchSignal> out;
  for (const auto& seg : benchmark_segments(grid, kBenchRate, kBenchDuration)) {
    BenchEntry e;
    e.waveform = seg.spec.waveform;
    e.index = seg.index;
    e.pitch = seg.spec.pitch;
    e.f0_hz = seg.spec.f0_hz();
    e.duration_s = seg.spec.duration_s;
    e.sample_rate = seg.spec.sample_rate;
    AudioBuffer a = gen_bandlimited(e.spec());
    out.push_back({std::move(e), std::move(a)});
  }
  return out;
}

ModuleResult evaluate_activation(const NamedActivation& cfg, const std::vector<BenchSignal>& signals,
                                 std::size_t threads) {
  auto per_signal = evaluate_signals(signals.size(), threads, [&](std::size_t i) {
    const auto& s = signals[i];
    AudioBuffer y = apply_activation(s.audio, cfg.spec);
    check_finite(y, cfg.name);
    const double v = ahr(y, s.entry.f0_hz, ActivationContext{y.sample_rate()}, kMaxHarmonicIndex);
    return SignalAhr{s.entry.waveform, s.entry.f0_hz, v};
  });
  return {cfg.name, config_hash(cfg), make_report(std::move(per_signal))};
}

ModuleResult evaluate_upsampler(const NamedUpsampler& cfg, const std::vector<BenchEntry>& entries,
                                std::size_t threads) {
  const int input_rate = kBenchRate / static_cast<int>(cfg.spec.factor);
  if (input_rate * static_cast<int>(cfg.spec.factor) != kBenchRate) {
    throw ConfigError("upsampling factor must divide " + std::to_string(kBenchRate));
  }
  auto per_signal = evaluate_signals(entries.size(), threads, [&](std::size_t i) {
    TestSignalSpec spec = entries[i].spec();
    spec.sample_rate = input_rate;
    const AudioBuffer x = gen_bandlimited(spec);
    AudioBuffer y = run_upsampler(x, cfg.spec);
    check_finite(y, cfg.name);
    const double v = ahr(y, spec.f0_hz(), UpsamplerContext{cfg.spec.factor, input_rate},
                         k_max_for(spec.waveform));
    return SignalAhr{spec.waveform, spec.f0_hz(), v};
  });
  return {cfg.name, config_hash(cfg), make_report(std::move(per_signal))};
}

std::string activation_summary_csv(const std::vector<ModuleResult>& rows) {
  std::string out = "module,Sine,Sawtooth,Triangle,Average\n";
  for (const auto& r : rows) {
    out += r.name;
    for (double v : r.report.per_type_mean_db) out += "," + db_cell(v);
    out += "," + db_cell(r.report.overall_mean_db) + "\n";
  }
  return out;
}

std::string per_signal_csv(const std::vector<ModuleResult>& rows) {
  std::string out = "module_name,config_hash,waveform,f0_hz,ahr_db\n";
  for (const auto& r : rows) {
    for (const auto& s : r.report.per_signal) {
      out += r.name + "," + r.config_hash + "," + std::string(to_string(s.waveform)) + "," +
             fmt("%.6f", s.f0_hz) + "," + db_cell(s.ahr_db) + "\n";
    }
  }
  return out;
}

std::string upsampler_summary_csv(const std::vector<UpsamplerRow>& rows) {
  std::string out = "module,Sine,Sawtooth,Triangle,Average,Average_prior_on,tonal_probe_db,seed_std_db\n";
  for (const auto& r : rows) {
    out += r.name;
    for (double v : r.per_type_mean_db) out += "," + db_cell(v);
    out += "," + db_cell(r.average_db) + "," + db_cell(r.average_prior_on_db) + "," +
           db_cell(r.tonal_probe_db) + "," + db_cell(r.seed_std_db) + "\n";
  }
  return out;
}

ActivationRunResult run_activations(const fs::path& bench_dir, const std::vector<NamedActivation>& configs,
                                    const fs::path& out, const RunOptions& opts) {
  if (configs.empty()) throw ConfigError("no activation configurations");
  const auto signals = load_bench(bench_dir);
  std::vector<BenchEntry> entries;
  for (const auto& s : signals) entries.push_back(s.entry);

  ActivationRunResult result;
  nlohmann::json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["command"] = "run-activations";
  manifest["bench_dir"] = bench_dir.string();
  manifest["bench_hash"] = bench_hash(bench_dir, entries);
  manifest["signal_count"] = signals.size();
  manifest["seed"] = opts.seed;
  manifest["outputs"] = {out.filename().string(), sibling(out, "_per_signal.csv").filename().string()};
  manifest["configs"] = nlohmann::json::array();
  for (const auto& cfg : configs) {
    auto r = evaluate_activation(cfg, signals, opts.threads);
    manifest["configs"].push_back({{"name", cfg.name}, {"hash", r.config_hash}, {"text", serialize(cfg)}});
    (cfg.group == ReportGroup::Main ? result.main : result.oversampling).push_back(std::move(r));
  }

  std::vector<ModuleResult> all = result.main;
  all.insert(all.end(), result.oversampling.begin(), result.oversampling.end());
  write_file_atomic(out, activation_summary_csv(result.main));
  write_file_atomic(sibling(out, "_per_signal.csv"), per_signal_csv(all));
  if (!result.oversampling.empty()) {
    write_file_atomic(sibling(out, "_oversampling.csv"), activation_summary_csv(result.oversampling));
    manifest["outputs"].push_back(sibling(out, "_oversampling.csv").filename().string());
  }
  write_file_atomic(sibling(out, "_manifest.json"), manifest.dump(2) + "\n");
  return result;
}

std::vector<UpsamplerRow> run_upsamplers(const fs::path& bench_dir, std::size_t factor, std::size_t seeds,
                                         const fs::path& out, const RunOptions& opts) {
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  if (factor < 2) throw ConfigError("--factor must be >= 2");
  const auto entries = read_bench_index(bench_dir);
  for (const auto& e : entries) {
    if (e.sample_rate != kBenchRate) throw IoError("benchmark must be sampled at 44100 Hz");
  }

  nlohmann::json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["command"] = "run-upsamplers";
  manifest["bench_dir"] = bench_dir.string();
  manifest["bench_hash"] = bench_hash(bench_dir, entries);
  manifest["factor"] = factor;
  manifest["seeds"] = seeds;
  manifest["seed"] = opts.seed;
  manifest["tonal_probe_dc"] = kProbeDc;
  manifest["configs"] = nlohmann::json::array();

  std::vector<UpsamplerRow> rows;
  std::vector<ModuleResult> all_runs;
  const auto record = [&](const NamedUpsampler& cfg, ModuleResult r) {
    manifest["configs"].push_back({{"name", cfg.name}, {"hash", r.config_hash}, {"text", serialize(cfg)}});
    all_runs.push_back(r);
    return r;
  };

  for (const auto& base : default_upsampler_configs(factor, opts.seed)) {
    UpsamplerRow row;
    row.name = base.name;
    row.seed_std_db = std::nan("");
    row.average_prior_on_db = std::nan("");
    const bool stochastic = base.spec.kind == UpsamplerKind::ConvTranspose;
    const std::size_t n_runs = stochastic ? seeds : 1;
    std::vector<double> averages, probes;
    std::array<std::vector<double>, 3> per_type;
    for (std::size_t s = 0; s < n_runs; ++s) {
      NamedUpsampler cfg = base;
      if (stochastic) {
        cfg.spec.seed = derive_seed(opts.seed, s);
        cfg.name = base.name + "_seed" + std::to_string(s);
      }
      row.runs.push_back(record(cfg, evaluate_upsampler(cfg, entries, opts.threads)));
      const auto& rep = row.runs.back().report;
      averages.push_back(rep.overall_mean_db);
      for (std::size_t t = 0; t < 3; ++t) per_type[t].push_back(rep.per_type_mean_db[t]);
      probes.push_back(probe_upsampler(cfg.spec, kProbeDc).stride_line_db);
    }
    for (std::size_t t = 0; t < 3; ++t) row.per_type_mean_db[t] = mean(per_type[t]);
    row.average_db = mean(averages);
    row.tonal_probe_db = mean(probes);
    if (stochastic) {
      double ss = 0.0;
      for (double a : averages) ss += (a - row.average_db) * (a - row.average_db);
      row.seed_std_db = averages.size() > 1 ? std::sqrt(ss / static_cast<double>(averages.size() - 1)) : 0.0;
    }
    if (base.spec.kind == UpsamplerKind::AntiAliasedResample) {
      NamedUpsampler prior = base;
      prior.name = base.name + "_prior_on";
      prior.spec.noise_prior = true;
      row.average_prior_on_db = record(prior, evaluate_upsampler(prior, entries, opts.threads)).report.overall_mean_db;
    }
    rows.push_back(std::move(row));
  }

  write_file_atomic(out, upsampler_summary_csv(rows));
  write_file_atomic(sibling(out, "_per_signal.csv"), per_signal_csv(all_runs));
  manifest["outputs"] = {out.filename().string(), sibling(out, "_per_signal.csv").filename().string()};
  write_file_atomic(sibling(out, "_manifest.json"), manifest.dump(2) + "\n");
  return rows;
}

std::vector<NamedActivation> default_sweep_panels() {
  const auto make = [](std::string name, ActivationKind k, int o) {
    NamedActivation a;
    a.name = std::move(name);
    a.spec.kind = k;
    a.spec.oversample = o;
    return a;
  };
  return {
      make("no_activation", ActivationKind::Identity, 1),
      make("snakebeta_O1", ActivationKind::SnakeBeta, 1),
      make("snakebeta_O2", ActivationKind::SnakeBeta, 2),
      make("snakebeta_O4", ActivationKind::SnakeBeta, 4),
      make("adaa_snakebeta_O1", ActivationKind::AdaaSnakeBeta, 1),
      make("adaa_snakebeta_O2", ActivationKind::AdaaSnakeBeta, 2),
  };
}

std::vector<SweepPanel> run_sweep(const std::vector<NamedActivation>& panels, const fs::path& dir,
                                  const RunOptions& opts) {
  if (panels.empty()) throw ConfigError("no sweep panels configured");
  ensure_dir(dir);
  AudioBuffer sweep = gen_sweep(kSweepStartHz, kSweepEndHz, kSweepDurationS, kBenchRate);
  for (double& v : sweep.samples()) v *= benchmark_peak();

  std::vector<SweepPanel> out(panels.size());
  parallel_for(panels.size(), opts.threads, [&](std::size_t i) {
    AudioBuffer y = apply_activation(sweep, panels[i].spec);
    check_finite(y, panels[i].name);
    const Spectrogram s = stft(y, kSweepFrame, kSweepHop);
    write_spectrogram(s, dir / panels[i].name);
    out[i] = {panels[i].name, sweep_off_ridge(s, kSweepStartHz, kSweepEndHz, kSweepDurationS)};
  });

  std::string csv = "panel,off_ridge_db,max_off_ridge_cell_db,frames_used\n";
  for (const auto& p : out) {
    csv += p.name + "," + fmt("%.4f", p.stats.off_ridge_db) + "," + fmt("%.4f", p.stats.max_off_ridge_cell_db) +
           "," + std::to_string(p.stats.frames_used) + "\n";
  }
  write_file_atomic(dir / "sweep_summary.csv", csv);
  return out;
}

ResponseKind parse_response_kind(std::string_view name) {
  if (name == "linear") return ResponseKind::Linear;
  if (name == "nearest") return ResponseKind::Nearest;
  if (name == "designed") return ResponseKind::Designed;
  throw ConfigError("unknown filter kind: " + std::string(name));
}

FirKernel response_kernel(ResponseKind kind, std::size_t n) {
  switch (kind) {
    case ResponseKind::Linear:
      if (n < 1) throw ConfigError("linear kernel needs N >= 1");
      return interp_kernel(InterpKind::Linear, n);
    case ResponseKind::Nearest:
      if (n < 1) throw ConfigError("nearest kernel needs N >= 1");
      return interp_kernel(InterpKind::Nearest, n);
    case ResponseKind::Designed:
      if (n < 2) throw ConfigError("designed filter needs N >= 2");
      return resampling_lowpass(n, default_resampling_filter());
  }
  throw ConfigError("unknown filter kind");
}

void write_filter_response(ResponseKind kind, std::size_t n, std::size_t points, const fs::path& out) {
  if (points < 2) throw ConfigError("need at least 2 frequency points");
  const FirKernel h = response_kernel(kind, n);
  const auto resp = frequency_response(h, points);
  const auto to_db = [](double m) { return m > 0.0 ? std::max(-300.0, 20.0 * std::log10(m)) : -300.0; };

  std::string csv = "omega_normalized,magnitude,magnitude_db,phase_rad\n";
  for (const auto& p : resp) {
    // report the zero-phase response: undo the delay of the center tap
    const auto zero_phase =
        p.response * std::polar(1.0, p.omega * std::numbers::pi * static_cast<double>(h.center()));
    const double mag = std::abs(zero_phase);
    csv += fmt("%.10f", p.omega) + "," + fmt("%.12e", mag) + "," + fmt("%.6f", to_db(mag)) + "," +
           fmt("%.10f", std::arg(zero_phase)) + "\n";
  }
  write_file_atomic(out, csv);

  const double gain = std::abs(h.dc_gain());
  const double cutoff = 1.0 / static_cast<double>(n);
  std::string ideal = "omega_normalized,magnitude,magnitude_db\n";
  for (const auto& p : resp) {
    const double mag = p.omega <= cutoff + 1e-12 ? gain : 0.0;
    ideal += fmt("%.10f", p.omega) + "," + fmt("%.12e", mag) + "," + fmt("%.6f", to_db(mag)) + "\n";
  }
  write_file_atomic(sibling(out, "_ideal.csv"), ideal);
}

}  // namespace aliasfree
