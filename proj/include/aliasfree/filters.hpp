#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "aliasfree/audio_buffer.hpp"

namespace aliasfree {

// Finite impulse response. `center` is the tap aligned with the output sample
// (zero delay); dc_gain caches the tap sum.
class FirKernel {
 public:
  FirKernel(std::vector<double> taps, std::size_t center);

  [[nodiscard]] const std::vector<double>& taps() const noexcept { return taps_; }
  [[nodiscard]] std::size_t center() const noexcept { return center_; }
  [[nodiscard]] double dc_gain() const noexcept { return dc_gain_; }
  [[nodiscard]] std::size_t size() const noexcept { return taps_.size(); }

  // Symmetric about `center` (which must then be the middle tap).
  [[nodiscard]] bool is_symmetric(double tol = 1e-12) const noexcept;

  [[nodiscard]] FirKernel scaled(double gain) const;

 private:
  std::vector<double> taps_;
  std::size_t center_;
  double dc_gain_;
};

enum class FilterKind { LowPass, HighPass };

// Frequencies are normalised to the Nyquist of the rate the filter runs at.
struct FilterDesignSpec {
  double cutoff = 0.5;
  double transition_width = 0.05;
  double stopband_atten_db = 100.0;
  FilterKind kind = FilterKind::LowPass;

  void validate() const;
};

// Benchmark default: 100 dB stopband, transition 0.05 x Nyquist.
FilterDesignSpec default_resampling_filter();

double kaiser_beta(double atten_db) noexcept;
std::size_t kaiser_num_taps(double atten_db, double transition_width);
std::vector<double> kaiser_window(std::size_t n, double beta);

// Kaiser-windowed sinc, odd length, unity DC gain (low-pass). High-pass is the
// spectral inversion of the matching low-pass. Throws std::invalid_argument on
// unrealisable specs.
FirKernel design_fir(const FilterDesignSpec& spec);

// Same-length filtering: y[n] = sum_j taps[j] * x[n + j - center], with zeros
// outside x.
AudioBuffer convolve(const AudioBuffer& x, const FirKernel& h);

AudioBuffer zero_interlace(const AudioBuffer& x, std::size_t factor);

// Low-pass used when changing rate by `factor`: cutoff 1/factor at the high
// rate, transition spec.transition_width / factor (so the transition band has
// the same width in Hz for every factor).
FirKernel resampling_lowpass(std::size_t factor, const FilterDesignSpec& spec);

// zero_interlace followed by the resampling low-pass with gain `factor`,
// evaluated polyphase. factor == 1 returns x unchanged.
AudioBuffer upsample_filtered(const AudioBuffer& x, std::size_t factor,
                              const FilterDesignSpec& spec = default_resampling_filter());

// Resampling low-pass then keep every factor-th sample. Output length is
// ceil(len / factor). factor == 1 returns x unchanged.
AudioBuffer downsample_filtered(const AudioBuffer& x, std::size_t factor,
                                const FilterDesignSpec& spec = default_resampling_filter());

struct FreqPoint {
  double omega;  // normalised: 0 = DC, 1 = Nyquist (pi rad/sample)
  std::complex<double> response;
};

// H(w) = sum_n taps[n] e^{-i w n} on n_points uniform samples of [0, pi].
std::vector<FreqPoint> frequency_response(const FirKernel& h, std::size_t n_points);

// Interpolation-equivalent kernels. Linear and Nearest are the symmetric
// length-2N+1 forms (1 - |t/N| and 1 on |t| <= N). NearestHold is the causal
// sample-and-hold of width N used by the nearest-neighbour upsampler.
enum class InterpKind { Linear, Nearest, NearestHold };

FirKernel interp_kernel(InterpKind kind, std::size_t half_length);

}  // namespace aliasfree
