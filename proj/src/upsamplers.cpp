#include "aliasfree/upsamplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aliasfree/metrics.hpp"
#include "aliasfree/random.hpp"

namespace aliasfree {
namespace {
// Independent random streams derived from UpsamplerSpec::seed.
constexpr std::uint64_t kStreamConvT = 1;
constexpr std::uint64_t kStreamPriorConv = 2;
constexpr std::uint64_t kStreamMixGain = 3;
}  // namespace

std::string_view to_string(UpsamplerKind k) noexcept {
  switch (k) {
    case UpsamplerKind::ConvTranspose: return "conv_transpose";
    case UpsamplerKind::LinearInterp: return "linear_interp";
    case UpsamplerKind::NearestInterp: return "nearest_interp";
    case UpsamplerKind::AntiAliasedResample: return "aa_resample";
  }
  return "?";
}

UpsamplerKind parse_upsampler_kind(std::string_view name) {
  for (auto k : {UpsamplerKind::ConvTranspose, UpsamplerKind::LinearInterp,
                 UpsamplerKind::NearestInterp, UpsamplerKind::AntiAliasedResample}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown upsampler kind: " + std::string(name));
}

void UpsamplerSpec::validate() const {
  if (factor < 2) throw std::invalid_argument("upsampler: factor must be >= 2");
  if (kind == UpsamplerKind::ConvTranspose && kernel_size < factor) {
    throw std::invalid_argument("upsampler: kernel_size must be >= factor");
  }
  if (prior_kernel_size < 1) throw std::invalid_argument("upsampler: prior_kernel_size must be >= 1");
  if (kind == UpsamplerKind::AntiAliasedResample) {
    FilterDesignSpec s = filter;
    s.cutoff = 1.0 / static_cast<double>(factor);
    s.transition_width = filter.transition_width / static_cast<double>(factor);
    s.validate();
  }
}

ConvTransposeWeights seeded_conv_transpose_weights(std::size_t kernel_size, std::uint64_t seed) {
  if (kernel_size < 1) throw std::invalid_argument("conv_transpose: kernel_size must be >= 1");
  CounterRng rng(derive_seed(seed, kStreamConvT));
  const double bound = 1.0 / std::sqrt(static_cast<double>(kernel_size));
  ConvTransposeWeights w;
  w.taps.resize(kernel_size);
  for (double& t : w.taps) t = rng.uniform(-bound, bound);
  w.bias = rng.uniform(-bound, bound);
  return w;
}

AudioBuffer conv_transpose_1d(const AudioBuffer& x, std::size_t factor, const ConvTransposeWeights& weights) {
  if (factor < 1) throw std::invalid_argument("conv_transpose: factor must be >= 1");
  const std::size_t K = weights.taps.size();
  if (K < factor) throw std::invalid_argument("conv_transpose: kernel shorter than stride");
  const auto pad = static_cast<std::ptrdiff_t>((K - factor) / 2);
  const auto L = static_cast<std::ptrdiff_t>(factor);
  const auto n_out = static_cast<std::ptrdiff_t>(x.size() * factor);
  std::vector<double> y(static_cast<std::size_t>(n_out), weights.bias);
  // scatter form: input i lands on outputs i*L - pad + k
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(i) * L - pad;
    for (std::size_t k = 0; k < K; ++k) {
      const std::ptrdiff_t j = base + static_cast<std::ptrdiff_t>(k);
      if (j >= 0 && j < n_out) y[static_cast<std::size_t>(j)] += x[i] * weights.taps[k];
    }
  }
  return AudioBuffer(std::move(y), x.sample_rate() * static_cast<int>(factor));
}

AudioBuffer conv_transpose_1d(const AudioBuffer& x, const UpsamplerSpec& spec) {
  spec.validate();
  return conv_transpose_1d(x, spec.factor, seeded_conv_transpose_weights(spec.kernel_size, spec.seed));
}

AudioBuffer interp_upsample(const AudioBuffer& x, InterpMode mode, std::size_t factor) {
  if (factor < 2) throw std::invalid_argument("interp_upsample: factor must be >= 2");
  const FirKernel h = mode == InterpMode::Linear ? interp_kernel(InterpKind::Linear, factor)
                                                 : interp_kernel(InterpKind::NearestHold, factor);
  return convolve(zero_interlace(x, factor), h);
}

AudioBuffer aa_resample_upsample(const AudioBuffer& x, const AudioBuffer& prior_source,
                                 const UpsamplerSpec& spec) {
  spec.validate();
  AudioBuffer main = upsample_filtered(x, spec.factor, spec.filter);
  if (!spec.noise_prior) return main;
  if (prior_source.size() != x.size()) {
    throw std::invalid_argument("aa_resample_upsample: prior_source length must match input");
  }

  CounterRng conv_rng(derive_seed(spec.seed, kStreamPriorConv));
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.prior_kernel_size));
  std::vector<double> taps(spec.prior_kernel_size);
  for (double& t : taps) t = conv_rng.uniform(-bound, bound);
  const FirKernel noise_conv(std::move(taps), spec.prior_kernel_size / 2);

  FilterDesignSpec hp = spec.filter;
  hp.kind = FilterKind::HighPass;
  hp.cutoff = 1.0 / static_cast<double>(spec.factor);
  hp.transition_width = spec.filter.transition_width / static_cast<double>(spec.factor);
  const AudioBuffer prior = convolve(convolve(zero_interlace(prior_source, spec.factor), noise_conv),
                                     design_fir(hp));

  CounterRng gain_rng(derive_seed(spec.seed, kStreamMixGain));
  const double mix_gain = gain_rng.uniform(0.5, 1.5);
  for (std::size_t i = 0; i < main.size(); ++i) main[i] = mix_gain * (main[i] + prior[i]);
  return main;
}

AudioBuffer run_upsampler(const AudioBuffer& x, const UpsamplerSpec& spec) {
  switch (spec.kind) {
    case UpsamplerKind::ConvTranspose: return conv_transpose_1d(x, spec);
    case UpsamplerKind::LinearInterp: return interp_upsample(x, InterpMode::Linear, spec.factor);
    case UpsamplerKind::NearestInterp: return interp_upsample(x, InterpMode::Nearest, spec.factor);
    case UpsamplerKind::AntiAliasedResample: return aa_resample_upsample(x, x, spec);
  }
  throw std::invalid_argument("run_upsampler: unknown kind");
}

std::vector<double> image_frequencies(double f0, std::size_t factor, double input_rate, int k_max,
                                      double collision_tol) {
  if (!(f0 > 0.0) || f0 >= 0.5 * input_rate) {
    throw std::invalid_argument("image_frequencies: f0 must lie in (0, fs_in/2)");
  }
  const double upper = 0.5 * input_rate * static_cast<double>(factor);
  std::vector<double> harmonics;
  for (int k = 1; k * f0 < 0.5 * input_rate; ++k) harmonics.push_back(k * f0);

  std::vector<double> images;
  for (std::size_t n = 1; n < factor; ++n) {
    const double line = static_cast<double>(n) * input_rate;
    for (int k = 1; k <= k_max; ++k) {
      for (double f : {std::abs(line - k * f0), line + k * f0}) {
        if (!(f > 0.0) || f > upper) continue;
        const bool collides = std::any_of(harmonics.begin(), harmonics.end(), [&](double h) {
          return std::abs(h - f) <= collision_tol;
        });
        if (!collides) images.push_back(f);
      }
    }
  }
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-9; }),
               images.end());
  return images;
}

int k_max_for(Waveform w) noexcept {
  const double ref = std::abs(partial_amplitude(w, 1));
  int last = 1;
  for (int k = 1; k <= kMaxHarmonicIndex; ++k) {
    if (std::abs(partial_amplitude(w, k)) >= ref * 1e-6) last = k;
  }
  return last;
}

TonalProbeResult tonal_probe(const AudioBuffer& layer_output, double input_rate, double dc_input_bias) {
  const SpectrumEstimate s = estimate_spectrum(layer_output);
  const double total = s.total_power();
  TonalProbeResult r;
  r.dc_input_bias = dc_input_bias;
  if (!(total > 0.0)) return r;
  const double nyquist = 0.5 * layer_output.sample_rate();
  double line = 0.0;
  for (double f = input_rate; f <= nyquist + 1e-9; f += input_rate) {
    line += band_energy(s, f, s.band_half_width());
  }
  r.stride_line_db = line > 0.0 ? std::max(kAhrFloorDb, 10.0 * std::log10(line / total)) : kAhrFloorDb;
  return r;
}

TonalProbeResult probe_upsampler(const UpsamplerSpec& spec, double dc_value, int input_rate,
                                 double duration_s) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * input_rate));
  const AudioBuffer x(std::vector<double>(n, dc_value), input_rate);
  return tonal_probe(run_upsampler(x, spec), input_rate, dc_value);
}

}  // namespace aliasfree
