#include "aliasfree/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace aliasfree {

namespace {

// Four interleaved partial sums keep the adds independent.
double dot(const double* a, const double* b, std::ptrdiff_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::ptrdiff_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

FirKernel::FirKernel(std::vector<double> taps, std::size_t center)
    : taps_(std::move(taps)), center_(center), dc_gain_(0.0) {
  if (taps_.empty()) throw std::invalid_argument("FirKernel: empty taps");
  if (center_ >= taps_.size()) throw std::invalid_argument("FirKernel: center out of range");
  for (double t : taps_) {
    if (!std::isfinite(t)) throw std::invalid_argument("FirKernel: non-finite tap");
  }
  dc_gain_ = std::accumulate(taps_.begin(), taps_.end(), 0.0);
}

bool FirKernel::is_symmetric(double tol) const noexcept {
  if (2 * center_ + 1 != taps_.size()) return false;
  for (std::size_t i = 0; i < center_; ++i) {
    if (std::abs(taps_[i] - taps_[taps_.size() - 1 - i]) > tol) return false;
  }
  return true;
}

FirKernel FirKernel::scaled(double gain) const {
  auto t = taps_;
  for (double& v : t) v *= gain;
  return FirKernel(std::move(t), center_);
}

void FilterDesignSpec::validate() const {
  if (!(cutoff > 0.0 && cutoff < 1.0)) {
    throw std::invalid_argument("filter cutoff must lie in (0, 1)");
  }
  if (!(transition_width > 0.0)) {
    throw std::invalid_argument("filter transition width must be positive");
  }
  if (cutoff - 0.5 * transition_width <= 0.0 || cutoff + 0.5 * transition_width >= 1.0) {
    throw std::invalid_argument("filter transition band does not fit inside (0, 1)");
  }
  if (!(stopband_atten_db > 0.0)) {
    throw std::invalid_argument("stopband attenuation must be positive");
  }
}

FilterDesignSpec default_resampling_filter() {
  return FilterDesignSpec{0.5, 0.05, 100.0, FilterKind::LowPass};
}

double kaiser_beta(double atten_db) noexcept {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) {
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  }
  return 0.0;
}

std::size_t kaiser_num_taps(double atten_db, double transition_width) {
  if (!(transition_width > 0.0)) throw std::invalid_argument("transition width must be positive");
  const double dw = std::numbers::pi * transition_width;
  const double order = std::ceil((atten_db - 7.95) / (2.285 * dw));
  auto n = static_cast<std::size_t>(std::max(order, 2.0)) + 1;
  if (n % 2 == 0) ++n;
  return n;
}

std::vector<double> kaiser_window(std::size_t n, double beta) {
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  const double denom = std::cyl_bessel_i(0.0, beta);
  const double half = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (static_cast<double>(i) - half) / half;
    w[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
  }
  return w;
}

FirKernel design_fir(const FilterDesignSpec& spec) {
  spec.validate();
  const std::size_t n = kaiser_num_taps(spec.stopband_atten_db, spec.transition_width);
  const std::size_t mid = n / 2;
  const auto win = kaiser_window(n, kaiser_beta(spec.stopband_atten_db));
  std::vector<double> taps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(mid);
    const double arg = std::numbers::pi * spec.cutoff * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(arg) / arg;
    taps[i] = spec.cutoff * sinc * win[i];
  }
  // exact unity DC; mirror so rounding cannot break symmetry
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& v : taps) v /= sum;
  for (std::size_t i = 0; i < mid; ++i) taps[n - 1 - i] = taps[i];
  if (spec.kind == FilterKind::HighPass) {
    for (double& v : taps) v = -v;
    taps[mid] += 1.0;
  }
  return FirKernel(std::move(taps), mid);
}

AudioBuffer convolve(const AudioBuffer& x, const FirKernel& h) {
  const auto& taps = h.taps();
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto c = static_cast<std::ptrdiff_t>(h.center());
  const auto m = static_cast<std::ptrdiff_t>(taps.size());
  std::vector<double> y(x.size(), 0.0);
  const auto xs = x.samples();
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // x index = i + j - c must lie in [0, n)
    const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, c - i);
    const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(m, n - i + c);
    double acc = 0.0;
    for (std::ptrdiff_t j = j0; j < j1; ++j) acc += taps[j] * xs[i + j - c];
    y[i] = acc;
  }
  return AudioBuffer(std::move(y), x.sample_rate());
}

AudioBuffer zero_interlace(const AudioBuffer& x, std::size_t factor) {
  if (factor < 1) throw std::invalid_argument("zero_interlace: factor must be >= 1");
  std::vector<double> y(x.size() * factor, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) y[i * factor] = x[i];
  return AudioBuffer(std::move(y), x.sample_rate() * static_cast<int>(factor));
}

FirKernel resampling_lowpass(std::size_t factor, const FilterDesignSpec& spec) {
  if (factor < 2) throw std::invalid_argument("resampling_lowpass: factor must be >= 2");
  FilterDesignSpec s = spec;
  s.kind = FilterKind::LowPass;
  s.cutoff = 1.0 / static_cast<double>(factor);
  s.transition_width = spec.transition_width / static_cast<double>(factor);
  return design_fir(s);
}

AudioBuffer upsample_filtered(const AudioBuffer& x, std::size_t factor, const FilterDesignSpec& spec) {
  if (factor < 1) throw std::invalid_argument("upsample_filtered: factor must be >= 1");
  if (factor == 1) return x;
  const FirKernel h = resampling_lowpass(factor, spec);
  const auto& taps = h.taps();
  const auto L = static_cast<std::ptrdiff_t>(factor);
  const auto c = static_cast<std::ptrdiff_t>(h.center());
  const auto n_in = static_cast<std::ptrdiff_t>(x.size());
  const double gain = static_cast<double>(factor);
  const auto xs = x.samples();

  // polyphase split: phases[p][i] = taps[p + i*L]
  std::vector<std::vector<double>> phases(factor);
  for (std::size_t j = 0; j < taps.size(); ++j) phases[j % factor].push_back(taps[j]);

  std::vector<double> y(x.size() * factor, 0.0);
  for (std::ptrdiff_t out = 0; out < n_in * L; ++out) {
    // zero-stuffed index out + j - c must be a multiple of L
    const std::ptrdiff_t p = ((c - out) % L + L) % L;
    const std::ptrdiff_t k0 = (out + p - c) / L;
    const auto& ph = phases[static_cast<std::size_t>(p)];
    const std::ptrdiff_t i0 = std::max<std::ptrdiff_t>(0, -k0);
    const std::ptrdiff_t i1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ph.size()), n_in - k0);
    if (i1 <= i0) continue;
    y[out] = gain * dot(ph.data() + i0, xs.data() + k0 + i0, i1 - i0);
  }
  return AudioBuffer(std::move(y), x.sample_rate() * static_cast<int>(factor));
}

AudioBuffer downsample_filtered(const AudioBuffer& x, std::size_t factor, const FilterDesignSpec& spec) {
  if (factor < 1) throw std::invalid_argument("downsample_filtered: factor must be >= 1");
  if (factor == 1) return x;
  if (x.size() < factor) throw std::invalid_argument("downsample_filtered: input shorter than factor");
  if (x.sample_rate() % static_cast<int>(factor) != 0) {
    throw std::invalid_argument("downsample_filtered: sample rate not divisible by factor");
  }
  const FirKernel h = resampling_lowpass(factor, spec);
  const auto& taps = h.taps();
  const auto c = static_cast<std::ptrdiff_t>(h.center());
  const auto m = static_cast<std::ptrdiff_t>(taps.size());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::size_t n_out = (x.size() + factor - 1) / factor;
  const auto xs = x.samples();

  std::vector<double> y(n_out, 0.0);
  for (std::size_t o = 0; o < n_out; ++o) {
    const auto i = static_cast<std::ptrdiff_t>(o * factor);
    const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, c - i);
    const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(m, n - i + c);
    if (j1 > j0) y[o] = dot(taps.data() + j0, xs.data() + i + j0 - c, j1 - j0);
  }
  return AudioBuffer(std::move(y), x.sample_rate() / static_cast<int>(factor));
}

std::vector<FreqPoint> frequency_response(const FirKernel& h, std::size_t n_points) {
  if (n_points < 2) throw std::invalid_argument("frequency_response: need at least 2 points");
  std::vector<FreqPoint> out;
  out.reserve(n_points);
  const auto& taps = h.taps();
  for (std::size_t p = 0; p < n_points; ++p) {
    const double norm = static_cast<double>(p) / static_cast<double>(n_points - 1);
    const double w = std::numbers::pi * norm;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < taps.size(); ++k) {
      const double a = -w * static_cast<double>(k);
      acc += taps[k] * std::complex<double>(std::cos(a), std::sin(a));
    }
    out.push_back({norm, acc});
  }
  return out;
}

FirKernel interp_kernel(InterpKind kind, std::size_t half_length) {
  if (half_length < 1) throw std::invalid_argument("interp_kernel: N must be >= 1");
  const std::size_t N = half_length;
  switch (kind) {
    case InterpKind::Linear: {
      std::vector<double> taps(2 * N + 1);
      for (std::size_t i = 0; i < taps.size(); ++i) {
        const double t = static_cast<double>(i) - static_cast<double>(N);
        taps[i] = 1.0 - std::abs(t / static_cast<double>(N));
      }
      return FirKernel(std::move(taps), N);
    }
    case InterpKind::Nearest:
      return FirKernel(std::vector<double>(2 * N + 1, 1.0), N);
    case InterpKind::NearestHold:
      return FirKernel(std::vector<double>(N, 1.0), N - 1);
  }
  throw std::invalid_argument("interp_kernel: unknown kind");
}

}  // namespace aliasfree
