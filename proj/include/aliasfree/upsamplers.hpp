#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "aliasfree/audio_buffer.hpp"
#include "aliasfree/filters.hpp"
#include "aliasfree/signal.hpp"

namespace aliasfree {

enum class UpsamplerKind { ConvTranspose, LinearInterp, NearestInterp, AntiAliasedResample };

std::string_view to_string(UpsamplerKind k) noexcept;
UpsamplerKind parse_upsampler_kind(std::string_view name);

struct UpsamplerSpec {
  UpsamplerKind kind = UpsamplerKind::AntiAliasedResample;
  std::size_t factor = 2;
  std::size_t kernel_size = 4;        // ConvTranspose only; >= factor
  std::uint64_t seed = 0;
  bool noise_prior = false;           // AntiAliasedResample only
  std::size_t prior_kernel_size = 7;  // seeded noise convolution of the prior path
  FilterDesignSpec filter = default_resampling_filter();

  void validate() const;
};

// Mono stride-`factor` transposed convolution: tap weights plus a scalar bias.
struct ConvTransposeWeights {
  std::vector<double> taps;
  double bias = 0.0;
};

// Weights and bias uniform in [-1/sqrt(K), 1/sqrt(K)].
ConvTransposeWeights seeded_conv_transpose_weights(std::size_t kernel_size, std::uint64_t seed);

// y[j] = bias + sum_i x[i] * taps[j + p - i*factor], p = (K - factor) / 2,
// j in [0, factor * len(x)).
AudioBuffer conv_transpose_1d(const AudioBuffer& x, std::size_t factor,
                              const ConvTransposeWeights& weights);
AudioBuffer conv_transpose_1d(const AudioBuffer& x, const UpsamplerSpec& spec);

enum class InterpMode { Linear, Nearest };

// zero_interlace then the interpolation kernel: triangle of half-length L
// (linear) or sample-and-hold of width L (nearest).
AudioBuffer interp_upsample(const AudioBuffer& x, InterpMode mode, std::size_t factor);

// Resampling upsampler. Main path is upsample_filtered(x). With noise_prior
// the zero-interlaced prior_source passes a seeded noise convolution and a
// complementary high-pass (cutoff 1/L), is added to the main path, and the sum
// is scaled by a seeded mixing gain.
AudioBuffer aa_resample_upsample(const AudioBuffer& x, const AudioBuffer& prior_source,
                                 const UpsamplerSpec& spec);

// Dispatch on spec.kind; x doubles as the prior source.
AudioBuffer run_upsampler(const AudioBuffer& x, const UpsamplerSpec& spec);

// Image frequencies |n*fs_in +- k*f0| (n = 1..L-1, k = 1..k_max) inside
// (0, L*fs_in/2], sorted and de-duplicated, dropping any within `collision_tol`
// of a harmonic k*f0 < fs_in/2.
std::vector<double> image_frequencies(double f0, std::size_t factor, double input_rate,
                                      int k_max, double collision_tol = 0.0);

// Last partial index whose amplitude is within 120 dB of the fundamental,
// capped at 512.
int k_max_for(Waveform w) noexcept;
inline constexpr int kMaxHarmonicIndex = 512;

struct TonalProbeResult {
  double stride_line_db = -120.0;  // energy at n*fs_in lines over total, dB
  double dc_input_bias = 0.0;
};

// Line energy at multiples of the input rate in a layer output.
TonalProbeResult tonal_probe(const AudioBuffer& layer_output, double input_rate,
                             double dc_input_bias);

// Evaluates the layer on a constant input of `dc_value` and probes it.
TonalProbeResult probe_upsampler(const UpsamplerSpec& spec, double dc_value,
                                 int input_rate = 22050, double duration_s = 2.0);

}  // namespace aliasfree
