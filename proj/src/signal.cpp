#include "aliasfree/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aliasfree {

double peak(const AudioBuffer& x) noexcept {
  double p = 0.0;
  for (double v : x.samples()) p = std::max(p, std::abs(v));
  return p;
}

bool all_finite(const AudioBuffer& x) noexcept {
  return std::all_of(x.samples().begin(), x.samples().end(),
                     [](double v) { return std::isfinite(v); });
}

std::string_view to_string(Waveform w) noexcept {
  switch (w) {
    case Waveform::Sine: return "Sine";
    case Waveform::Sawtooth: return "Sawtooth";
    case Waveform::Triangle: return "Triangle";
  }
  return "?";
}

Waveform parse_waveform(std::string_view name) {
  for (Waveform w : kAllWaveforms) {
    if (to_string(w) == name) return w;
  }
  throw std::invalid_argument("unknown waveform: " + std::string(name));
}

double benchmark_peak() noexcept { return std::pow(10.0, -1.0 / 20.0); }

double midi_to_freq(double note) noexcept {
  return 440.0 * std::exp2((note - 69.0) / 12.0);
}

double TestSignalSpec::f0_hz() const noexcept { return midi_to_freq(pitch); }

std::size_t TestSignalSpec::num_samples() const noexcept {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

double harmonic_cap(int sample_rate, std::size_t n_samples) noexcept {
  const std::size_t analysed =
      n_samples > 2 * kEdgeDiscard + 1024 ? n_samples - 2 * kEdgeDiscard : n_samples;
  const double bin = static_cast<double>(sample_rate) / static_cast<double>(std::max<std::size_t>(analysed, 1));
  return 0.5 * sample_rate - std::max(50.0, kBandHalfWidthBins * bin);
}

double partial_amplitude(Waveform w, int k) noexcept {
  using std::numbers::pi;
  if (k < 1) return 0.0;
  switch (w) {
    case Waveform::Sine:
      return k == 1 ? 1.0 : 0.0;
    case Waveform::Sawtooth:
      return (2.0 / pi) * ((k % 2 == 1) ? 1.0 : -1.0) / k;
    case Waveform::Triangle:
      if (k % 2 == 0) return 0.0;
      return (8.0 / (pi * pi)) * (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) /
             (static_cast<double>(k) * k);
  }
  return 0.0;
}

AudioBuffer gen_bandlimited(const TestSignalSpec& spec) {
  if (spec.sample_rate <= 0) throw std::invalid_argument("gen_bandlimited: sample_rate <= 0");
  if (!(spec.duration_s > 0.0)) throw std::invalid_argument("gen_bandlimited: duration <= 0");
  const double f0 = spec.f0_hz();
  const double nyquist = 0.5 * spec.sample_rate;
  if (!(f0 > 0.0) || f0 >= nyquist) {
    throw std::invalid_argument("gen_bandlimited: f0 must lie in (0, Nyquist)");
  }
  const std::size_t n = spec.num_samples();
  const double cap = harmonic_cap(spec.sample_rate, n);

  std::vector<double> amps;
  for (int k = 1; k * f0 < cap; ++k) amps.push_back(partial_amplitude(spec.waveform, k));
  if (amps.empty()) amps.push_back(partial_amplitude(spec.waveform, 1));

  // sin(k*theta) by the Chebyshev recurrence; theta is reduced per sample so
  // phase error does not accumulate along the buffer.
  std::vector<double> out(n);
  const double cycles_per_sample = f0 / spec.sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    double cyc = cycles_per_sample * static_cast<double>(i);
    cyc -= std::floor(cyc);
    const double theta = 2.0 * std::numbers::pi * cyc;
    const double s1 = std::sin(theta);
    const double two_c = 2.0 * std::cos(theta);
    double prev = 0.0;
    double cur = s1;
    double acc = amps[0] * s1;
    for (std::size_t k = 1; k < amps.size(); ++k) {
      const double next = two_c * cur - prev;
      prev = cur;
      cur = next;
      acc += amps[k] * cur;
    }
    out[i] = acc;
  }

  AudioBuffer buf(std::move(out), spec.sample_rate);
  const double p = peak(buf);
  if (p > 0.0) {
    const double g = spec.amplitude / p;
    for (double& v : buf.samples()) v *= g;
  }
  return buf;
}

double sweep_frequency(double f_start, double f_end, double duration_s, double t) noexcept {
  return f_start * std::pow(f_end / f_start, t / duration_s);
}

AudioBuffer gen_sweep(double f_start, double f_end, double duration_s, int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("gen_sweep: sample_rate <= 0");
  if (!(duration_s > 0.0)) throw std::invalid_argument("gen_sweep: duration must be positive");
  const double nyquist = 0.5 * sample_rate;
  if (!(f_start > 0.0) || !(f_end > 0.0) || f_start >= nyquist || f_end >= nyquist) {
    throw std::invalid_argument("gen_sweep: frequencies must lie in (0, Nyquist)");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> out(n);
  const double two_pi = 2.0 * std::numbers::pi;
  const double log_ratio = std::log(f_end / f_start);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double phase;
    if (log_ratio == 0.0) {
      double cyc = f_start * t;
      phase = two_pi * (cyc - std::floor(cyc));
    } else {
      // integral of f_start * r^(t/T) dt
      const double cyc = f_start * duration_s / log_ratio * std::expm1(log_ratio * t / duration_s);
      phase = two_pi * (cyc - std::floor(cyc));
    }
    out[i] = std::sin(phase);
  }
  return AudioBuffer(std::move(out), sample_rate);
}

std::string_view to_string(NoteGrid g) noexcept {
  return g == NoteGrid::Chromatic ? "chromatic" : "loguniform48";
}

NoteGrid parse_note_grid(std::string_view name) {
  if (name == "chromatic") return NoteGrid::Chromatic;
  if (name == "loguniform48") return NoteGrid::LogUniform48;
  throw std::invalid_argument("unknown note grid: " + std::string(name));
}

std::vector<double> note_grid_pitches(NoteGrid grid) {
  std::vector<double> pitches;
  if (grid == NoteGrid::Chromatic) {
    for (int m = 60; m <= 95; ++m) pitches.push_back(m);
  } else {
    // 48 frequencies log-uniform over [261.63, 3951.04] Hz, endpoints included
    constexpr double f_lo = 261.63;
    constexpr double f_hi = 3951.04;
    constexpr int count = 48;
    const double p_lo = 69.0 + 12.0 * std::log2(f_lo / 440.0);
    const double p_hi = 69.0 + 12.0 * std::log2(f_hi / 440.0);
    for (int i = 0; i < count; ++i) pitches.push_back(p_lo + (p_hi - p_lo) * i / (count - 1));
  }
  return pitches;
}

std::vector<BenchmarkSegment> benchmark_segments(NoteGrid grid, int sample_rate, double duration_s) {
  std::vector<BenchmarkSegment> segs;
  const auto pitches = note_grid_pitches(grid);
  for (Waveform w : kAllWaveforms) {
    for (std::size_t i = 0; i < pitches.size(); ++i) {
      TestSignalSpec s;
      s.waveform = w;
      s.pitch = pitches[i];
      s.duration_s = duration_s;
      s.sample_rate = sample_rate;
      s.amplitude = benchmark_peak();
      segs.push_back({s, i});
    }
  }
  return segs;
}

std::vector<std::pair<TestSignalSpec, AudioBuffer>> build_benchmark(NoteGrid grid) {
  std::vector<std::pair<TestSignalSpec, AudioBuffer>> out;
  for (const auto& seg : benchmark_segments(grid)) {
    out.emplace_back(seg.spec, gen_bandlimited(seg.spec));
  }
  return out;
}

}  // namespace aliasfree
