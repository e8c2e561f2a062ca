#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "aliasfree/audio_buffer.hpp"

namespace aliasfree {

enum class Waveform { Sine, Sawtooth, Triangle };

inline constexpr Waveform kAllWaveforms[] = {Waveform::Sine, Waveform::Sawtooth,
                                             Waveform::Triangle};

std::string_view to_string(Waveform w) noexcept;
Waveform parse_waveform(std::string_view name);

// Samples discarded at each end of a buffer before any spectral metric.
inline constexpr std::size_t kEdgeDiscard = 8192;

// Harmonic and alias bands are +-4 analysis bins wide, where one analysis bin
// is sample_rate / (analysed length).
inline constexpr double kBandHalfWidthBins = 4.0;

// Peak level of every benchmark signal: -1 dBFS.
double benchmark_peak() noexcept;

struct TestSignalSpec {
  Waveform waveform = Waveform::Sine;
  // Fractional MIDI pitch; f0 = 440 * 2^((pitch - 69) / 12).
  double pitch = 69.0;
  double duration_s = 5.0;
  int sample_rate = 44100;
  double amplitude = 1.0;

  [[nodiscard]] double f0_hz() const noexcept;
  [[nodiscard]] std::size_t num_samples() const noexcept;
};

double midi_to_freq(double note) noexcept;

// Highest partial frequency (exclusive) synthesised for a buffer of n samples:
// Nyquist - max(50 Hz, 4 analysis bins).
double harmonic_cap(int sample_rate, std::size_t n_samples) noexcept;

// Fourier-series amplitude of partial k (k >= 1) for a unit waveform; signed.
double partial_amplitude(Waveform w, int k) noexcept;

// Additive synthesis of the partials below harmonic_cap, peak-normalised to
// spec.amplitude. Throws std::invalid_argument when f0 >= Nyquist.
AudioBuffer gen_bandlimited(const TestSignalSpec& spec);

// Exponential sine sweep with continuous phase, unit amplitude, starting at
// phase 0.
AudioBuffer gen_sweep(double f_start, double f_end, double duration_s, int sample_rate);

// Instantaneous frequency of gen_sweep at time t.
double sweep_frequency(double f_start, double f_end, double duration_s, double t) noexcept;

enum class NoteGrid { Chromatic, LogUniform48 };

std::string_view to_string(NoteGrid g) noexcept;
NoteGrid parse_note_grid(std::string_view name);

// Pitches of the benchmark grid, ascending. Chromatic is MIDI 60..95;
// LogUniform48 is 48 log-spaced frequencies from 261.63 Hz (C4) to 3951.04 Hz
// (B7), which lands within a cent of the chromatic notes MIDI 60..107.
std::vector<double> note_grid_pitches(NoteGrid grid);

struct BenchmarkSegment {
  TestSignalSpec spec;
  std::size_t index = 0;  // position within its waveform type
};

// Segment specs sorted by (waveform, pitch). Signals are generated lazily by
// the caller via gen_bandlimited.
std::vector<BenchmarkSegment> benchmark_segments(NoteGrid grid = NoteGrid::LogUniform48,
                                                 int sample_rate = 44100,
                                                 double duration_s = 5.0);

// Segments plus synthesised audio.
std::vector<std::pair<TestSignalSpec, AudioBuffer>> build_benchmark(
    NoteGrid grid = NoteGrid::LogUniform48);

}  // namespace aliasfree
