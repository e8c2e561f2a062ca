#include "aliasfree/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "aliasfree/errors.hpp"
#include "aliasfree/filters.hpp"
#include "aliasfree/upsamplers.hpp"

namespace aliasfree {
namespace {

// The FFTW planner is not reentrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

// |X[k]|^2 for k = 0..n/2 of the real input zero-padded to n.
std::vector<double> power_rfft(std::span<const double> input, std::size_t n) {
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(
      reinterpret_cast<fftw_complex*>(fftw_alloc_complex(n / 2 + 1)));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  }
  std::fill(in.get(), in.get() + n, 0.0);
  std::copy(input.begin(), input.end(), in.get());
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = out.get()[k][0] * out.get()[k][0] + out.get()[k][1] * out.get()[k][1];
  }
  return p;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double to_db_clamped(double ratio) {
  if (!(ratio > 0.0)) return kAhrFloorDb;
  return std::max(kAhrFloorDb, 10.0 * std::log10(ratio));
}

}  // namespace

double SpectrumEstimate::total_power() const noexcept {
  return std::accumulate(power.begin(), power.end(), 0.0);
}

SpectrumEstimate estimate_spectrum(const AudioBuffer& x, const SpectrumOptions& opts) {
  if (x.size() < 2 * opts.edge_trim + 1024) {
    throw std::invalid_argument("estimate_spectrum: fewer than 1024 samples after edge trim");
  }
  const std::size_t n = x.size() - 2 * opts.edge_trim;
  const std::size_t nfft = next_pow2(4 * n);
  std::vector<double> seg(n);
  double wsum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = opts.window == SpectrumWindow::Hann
                         ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n))
                         : 1.0;
    seg[i] = x[opts.edge_trim + i] * w;
    wsum2 += w * w;
  }
  SpectrumEstimate s;
  s.power = power_rfft(seg, nfft);
  const double norm = 1.0 / (static_cast<double>(nfft) * wsum2);
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    const bool edge_bin = k == 0 || k == s.power.size() - 1;
    s.power[k] *= (edge_bin ? 1.0 : 2.0) * norm;
  }
  s.sample_rate = x.sample_rate();
  s.fft_size = nfft;
  s.analysed_length = n;
  s.bin_hz = static_cast<double>(x.sample_rate()) / static_cast<double>(nfft);
  s.analysis_bin_hz = static_cast<double>(x.sample_rate()) / static_cast<double>(n);
  s.window = opts.window;
  return s;
}

double band_energy(const SpectrumEstimate& s, double center_hz, double half_width_hz) {
  if (s.power.empty()) return 0.0;
  const double lo = std::max(0.0, center_hz - half_width_hz);
  const double hi = center_hz + half_width_hz;
  const auto first = static_cast<std::size_t>(std::ceil(lo / s.bin_hz - 1e-9));
  const auto last_f = std::floor(hi / s.bin_hz + 1e-9);
  const std::size_t last = std::min(s.power.size() - 1, static_cast<std::size_t>(std::max(0.0, last_f)));
  double e = 0.0;
  for (std::size_t k = first; k <= last && k < s.power.size(); ++k) e += s.power[k];
  return e;
}

double fold_frequency(double f, double sample_rate) noexcept {
  f = std::fmod(std::abs(f), sample_rate);
  return f > 0.5 * sample_rate ? sample_rate - f : f;
}

AhrDetail ahr_detail(const AudioBuffer& output, double f0, const AhrContext& ctx, int k_max) {
  if (!(f0 > 0.0)) throw NumericError("ahr: f0 must be positive");
  const SpectrumEstimate s = estimate_spectrum(output);
  const double hw = s.band_half_width();

  AhrDetail d;
  if (const auto* a = std::get_if<ActivationContext>(&ctx)) {
    if (a->sample_rate != output.sample_rate()) throw std::invalid_argument("ahr: sample rate mismatch");
    const double fs = a->sample_rate;
    const double fn = 0.5 * fs;
    for (int k = 1; k * f0 < fn; ++k) d.harmonic_freqs.push_back(k * f0);
    for (int k = 1; k <= k_max; ++k) {
      if (k * f0 < fn) continue;
      d.alias_freqs.push_back(fold_frequency(k * f0, fs));
    }
  } else {
    const auto& u = std::get<UpsamplerContext>(ctx);
    if (static_cast<long long>(u.input_rate) * static_cast<long long>(u.factor) != output.sample_rate()) {
      throw std::invalid_argument("ahr: output rate must be factor * input rate");
    }
    for (int k = 1; k * f0 < 0.5 * u.input_rate; ++k) d.harmonic_freqs.push_back(k * f0);
    d.alias_freqs = image_frequencies(f0, u.factor, u.input_rate, k_max, 0.0);
  }
  if (d.harmonic_freqs.empty()) throw NumericError("ahr: empty harmonic set");

  // drop aliases whose band would overlap DC or a harmonic band
  std::erase_if(d.alias_freqs, [&](double f) {
    if (f < 2.0 * hw) return true;
    const auto it = std::lower_bound(d.harmonic_freqs.begin(), d.harmonic_freqs.end(), f);
    if (it != d.harmonic_freqs.end() && *it - f < 2.0 * hw) return true;
    if (it != d.harmonic_freqs.begin() && f - *std::prev(it) < 2.0 * hw) return true;
    return false;
  });
  std::sort(d.alias_freqs.begin(), d.alias_freqs.end());

  // bin masks so overlapping alias bands are counted once
  std::vector<char> harmonic_mask(s.power.size(), 0), alias_mask(s.power.size(), 0);
  const auto mark = [&](std::vector<char>& mask, double f) {
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil((f - hw) / s.bin_hz - 1e-9));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor((f + hw) / s.bin_hz + 1e-9));
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(lo, 0);
         k <= hi && k < static_cast<std::ptrdiff_t>(mask.size()); ++k) {
      mask[static_cast<std::size_t>(k)] = 1;
    }
  };
  for (double f : d.harmonic_freqs) mark(harmonic_mask, f);
  for (double f : d.alias_freqs) mark(alias_mask, f);
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (harmonic_mask[k]) d.harmonic_energy += s.power[k];
    else if (alias_mask[k]) d.alias_energy += s.power[k];
  }
  if (!(d.harmonic_energy > 0.0)) throw NumericError("ahr: no energy in harmonic bands");
  d.ahr_db = to_db_clamped(d.alias_energy / d.harmonic_energy);
  return d;
}

double ahr(const AudioBuffer& output, double f0, const AhrContext& ctx, int k_max) {
  return ahr_detail(output, f0, ctx, k_max).ahr_db;
}

AhrReport make_report(std::vector<SignalAhr> per_signal, std::size_t harmonic_bands, std::size_t alias_bands) {
  AhrReport r;
  r.per_signal = std::move(per_signal);
  r.harmonic_band_count = harmonic_bands;
  r.alias_band_count = alias_bands;
  std::array<double, 3> sum{};
  std::array<std::size_t, 3> count{};
  for (const auto& s : r.per_signal) {
    const auto t = static_cast<std::size_t>(s.waveform);
    sum[t] += s.ahr_db;
    ++count[t];
  }
  double total = 0.0;
  std::size_t types = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    if (count[t] == 0) {
      r.per_type_mean_db[t] = std::nan("");
      continue;
    }
    r.per_type_mean_db[t] = sum[t] / static_cast<double>(count[t]);
    total += r.per_type_mean_db[t];
    ++types;
  }
  r.overall_mean_db = types ? total / static_cast<double>(types) : std::nan("");
  return r;
}

Spectrogram stft(const AudioBuffer& x, std::size_t frame, std::size_t hop) {
  if (frame < 2 || hop < 1 || frame < hop) throw std::invalid_argument("stft: need frame >= hop >= 1");
  Spectrogram s;
  s.frame = frame;
  s.hop = hop;
  s.sample_rate = x.sample_rate();
  s.n_bins = frame / 2 + 1;
  s.n_frames = x.size() <= frame ? 1 : (x.size() - frame + hop - 1) / hop + 1;
  s.power.assign(s.n_frames * s.n_bins, 0.0);
  const auto win = kaiser_window(frame, 16.0);
  std::vector<double> seg(frame);
  for (std::size_t f = 0; f < s.n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < frame; ++i) {
      seg[i] = start + i < x.size() ? x[start + i] * win[i] : 0.0;
    }
    const auto p = power_rfft(seg, frame);
    std::copy(p.begin(), p.end(), s.power.begin() + static_cast<std::ptrdiff_t>(f * s.n_bins));
  }
  return s;
}

void write_spectrogram(const Spectrogram& s, const std::filesystem::path& stem) {
  const double max_p = s.power.empty() ? 0.0 : *std::max_element(s.power.begin(), s.power.end());
  const auto db = [&](double p) {
    if (!(max_p > 0.0) || !(p > 0.0)) return -300.0;
    return std::max(-300.0, 10.0 * std::log10(p / max_p));
  };

  auto csv_path = stem;
  csv_path += ".csv";
  std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot open for writing: " + csv_path.string());
  csv << "freq_hz";
  for (std::size_t f = 0; f < s.n_frames; ++f) csv << ",frame_" << f;
  csv << '\n';
  char buf[32];
  for (std::size_t b = 0; b < s.n_bins; ++b) {
    std::snprintf(buf, sizeof buf, "%.3f", s.bin_hz() * static_cast<double>(b));
    csv << buf;
    for (std::size_t f = 0; f < s.n_frames; ++f) {
      std::snprintf(buf, sizeof buf, ",%.2f", db(s.at(f, b)));
      csv << buf;
    }
    csv << '\n';
  }
  if (!csv) throw IoError("write failed: " + csv_path.string());

  auto pgm_path = stem;
  pgm_path += ".pgm";
  std::ofstream pgm(pgm_path, std::ios::binary | std::ios::trunc);
  if (!pgm) throw IoError("cannot open for writing: " + pgm_path.string());
  pgm << "P5\n" << s.n_frames << ' ' << s.n_bins << "\n255\n";
  std::vector<char> row(s.n_frames);
  for (std::size_t r = 0; r < s.n_bins; ++r) {
    const std::size_t b = s.n_bins - 1 - r;
    for (std::size_t f = 0; f < s.n_frames; ++f) {
      const double v = std::clamp((db(s.at(f, b)) + 100.0) / 100.0 * 255.0, 0.0, 255.0);
      row[f] = static_cast<char>(static_cast<unsigned char>(std::lround(v)));
    }
    pgm.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!pgm) throw IoError("write failed: " + pgm_path.string());
}

void spectrogram_export(const AudioBuffer& x, std::size_t frame, std::size_t hop,
                        const std::filesystem::path& stem) {
  write_spectrogram(stft(x, frame, hop), stem);
}

RidgeStats sweep_off_ridge(const Spectrogram& s, double f_start, double f_end, double duration_s,
                           std::size_t edge_samples, double margin_bins) {
  RidgeStats r;
  const double fs = s.sample_rate;
  const double nyquist = 0.5 * fs;
  const double bin = s.bin_hz();
  const double rate = std::log(f_end / f_start) / duration_s;  // d ln f / dt
  const auto total_samples = static_cast<std::size_t>(std::llround(duration_s * fs));
  const double max_p = s.power.empty() ? 0.0 : *std::max_element(s.power.begin(), s.power.end());

  double off = 0.0, total = 0.0, max_off = 0.0;
  std::vector<char> mask(s.n_bins);
  for (std::size_t f = 0; f < s.n_frames; ++f) {
    const std::size_t start = f * s.hop;
    if (start < edge_samples || start + s.frame + edge_samples > total_samples) continue;
    const double t_mid = (static_cast<double>(start) + 0.5 * static_cast<double>(s.frame)) / fs;
    const double f_mid = sweep_frequency(f_start, f_end, duration_s, t_mid);
    const double spread = f_mid * std::abs(rate) * static_cast<double>(s.frame) / fs;
    std::fill(mask.begin(), mask.end(), 0);
    for (int k = 0; k * f_mid < nyquist + margin_bins * bin; ++k) {
      const double c = k * f_mid;
      const double hw = 0.5 * k * spread + margin_bins * bin;
      const auto lo = static_cast<std::ptrdiff_t>(std::floor((c - hw) / bin));
      const auto hi = static_cast<std::ptrdiff_t>(std::ceil((c + hw) / bin));
      for (std::ptrdiff_t b = std::max<std::ptrdiff_t>(lo, 0);
           b <= hi && b < static_cast<std::ptrdiff_t>(s.n_bins); ++b) {
        mask[static_cast<std::size_t>(b)] = 1;
      }
    }
    for (std::size_t b = 0; b < s.n_bins; ++b) {
      const double p = s.at(f, b);
      total += p;
      if (!mask[b]) {
        off += p;
        max_off = std::max(max_off, p);
      }
    }
    ++r.frames_used;
  }
  r.off_ridge_db = total > 0.0 ? to_db_clamped(off / total) : kAhrFloorDb;
  r.max_off_ridge_cell_db = (max_p > 0.0 && max_off > 0.0) ? 10.0 * std::log10(max_off / max_p) : -300.0;
  return r;
}

}  // namespace aliasfree
