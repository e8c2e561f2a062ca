#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <variant>
#include <vector>

#include "aliasfree/audio_buffer.hpp"
#include "aliasfree/signal.hpp"

namespace aliasfree {

enum class SpectrumWindow { Hann, Rectangular };

struct SpectrumOptions {
  std::size_t edge_trim = kEdgeDiscard;  // samples dropped at each end
  SpectrumWindow window = SpectrumWindow::Hann;
};

// One-sided power spectrum. Bin powers sum to the window-weighted mean square
// of the analysed segment, so a sinusoid of amplitude A carries A^2/2 and a DC
// offset c carries c^2.
struct SpectrumEstimate {
  std::vector<double> power;
  double bin_hz = 0.0;          // FFT bin spacing (after zero padding)
  double analysis_bin_hz = 0.0; // sample_rate / analysed length
  int sample_rate = 0;
  std::size_t fft_size = 0;
  std::size_t analysed_length = 0;
  SpectrumWindow window = SpectrumWindow::Hann;

  [[nodiscard]] double bin_freq(std::size_t i) const noexcept { return bin_hz * static_cast<double>(i); }
  [[nodiscard]] double total_power() const noexcept;
  [[nodiscard]] double band_half_width() const noexcept { return kBandHalfWidthBins * analysis_bin_hz; }
};

// Single-frame FFT of the edge-trimmed signal, zero-padded to the next power of
// two >= 4x its length. Throws std::invalid_argument when fewer than 1024
// samples remain after trimming.
SpectrumEstimate estimate_spectrum(const AudioBuffer& x, const SpectrumOptions& opts = {});

// Sum of bin powers with |f - center| <= half_width.
double band_energy(const SpectrumEstimate& s, double center_hz, double half_width_hz);

inline constexpr double kAhrFloorDb = -120.0;

// Reflection of f into [0, fs/2] by repeated mirroring about 0 and fs/2.
double fold_frequency(double f, double sample_rate) noexcept;

struct ActivationContext {
  int sample_rate;
};
struct UpsamplerContext {
  std::size_t factor;
  int input_rate;
};
using AhrContext = std::variant<ActivationContext, UpsamplerContext>;

struct AhrDetail {
  double ahr_db = kAhrFloorDb;
  double harmonic_energy = 0.0;
  double alias_energy = 0.0;
  std::vector<double> harmonic_freqs;
  std::vector<double> alias_freqs;
};

// Aliasing-to-harmonic ratio 10 log10(E_alias / E_harmonic), clamped to
// kAhrFloorDb. Activation context: harmonics k f0 < F_N, aliases are the folds
// of k f0 >= F_N for k <= k_max. Upsampler context: harmonics k f0 < fs_in/2,
// aliases from image_frequencies. DC is excluded, and alias bands closer than
// one band width to a harmonic (or DC) are dropped. Throws std::domain_error
// when there are no harmonics or no harmonic energy.
AhrDetail ahr_detail(const AudioBuffer& output, double f0, const AhrContext& ctx,
                     int k_max = 512);
double ahr(const AudioBuffer& output, double f0, const AhrContext& ctx, int k_max = 512);

struct SignalAhr {
  Waveform waveform;
  double f0_hz;
  double ahr_db;
};

struct AhrReport {
  std::vector<SignalAhr> per_signal;
  std::array<double, 3> per_type_mean_db{};  // Sine, Sawtooth, Triangle
  double overall_mean_db = 0.0;             // mean of the three type means
  std::size_t harmonic_band_count = 0;
  std::size_t alias_band_count = 0;
  double floor_db = kAhrFloorDb;
};

// Means are taken over dB values.
AhrReport make_report(std::vector<SignalAhr> per_signal, std::size_t harmonic_bands = 0,
                      std::size_t alias_bands = 0);

// Short-time spectrum; power[frame * n_bins + bin]. Frames start every `hop`
// samples, the last one zero-padded, for ceil((N - frame) / hop) + 1 frames.
struct Spectrogram {
  std::size_t frame = 0;
  std::size_t hop = 0;
  int sample_rate = 0;
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<double> power;

  [[nodiscard]] double at(std::size_t f, std::size_t b) const noexcept { return power[f * n_bins + b]; }
  [[nodiscard]] double bin_hz() const noexcept { return static_cast<double>(sample_rate) / frame; }
};

// Kaiser window (beta 16, sidelobes near -120 dB) so a clean sweep shows
// nothing off its ridge above -100 dB.
Spectrogram stft(const AudioBuffer& x, std::size_t frame, std::size_t hop);

// Writes <stem>.csv (dB re. the loudest cell, one row per bin) and <stem>.pgm
// (8-bit, [-100, 0] dB mapped to [0, 255], high frequencies on top).
void spectrogram_export(const AudioBuffer& x, std::size_t frame, std::size_t hop,
                        const std::filesystem::path& stem);
void write_spectrogram(const Spectrogram& s, const std::filesystem::path& stem);

struct RidgeStats {
  double off_ridge_db = kAhrFloorDb;     // off-ridge power over total power
  double max_off_ridge_cell_db = -300.0; // loudest off-ridge cell re. loudest cell
  std::size_t frames_used = 0;
};

// Energy away from the harmonics k*f(t) (k >= 0, below Nyquist) of an
// exponential sweep, over frames that stay clear of the first and last
// `edge_samples`.
RidgeStats sweep_off_ridge(const Spectrogram& s, double f_start, double f_end,
                           double duration_s, std::size_t edge_samples = kEdgeDiscard,
                           double margin_bins = 8.0);

}  // namespace aliasfree
