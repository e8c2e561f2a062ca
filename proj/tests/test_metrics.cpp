#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "aliasfree/activations.hpp"
#include "aliasfree/metrics.hpp"
#include "aliasfree/signal.hpp"

using namespace aliasfree;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

AudioBuffer sine(double f, int rate, std::size_t n, double amp = 1.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * pi * f * i / rate);
  return AudioBuffer(std::move(v), rate);
}

AudioBuffer bench_signal(Waveform w, double pitch) {
  return gen_bandlimited({w, pitch, 5.0, 44100, benchmark_peak()});
}

}  // namespace

TEST_CASE("spectrum of a unit sine") {
  const auto s = estimate_spectrum(sine(1000, 44100, 60000));
  CHECK(s.total_power() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(band_energy(s, 1000, 5) / s.total_power() > 0.99);
  CHECK(10 * std::log10(band_energy(s, 5000, 5) / s.total_power()) <= -100.0);
  CHECK(band_energy(s, 10000, 1e6) == doctest::Approx(s.total_power()).epsilon(1e-12));
  CHECK(s.fft_size >= 4 * s.analysed_length);
  CHECK((s.fft_size & (s.fft_size - 1)) == 0);
}

TEST_CASE("silence and short input") {
  const auto s = estimate_spectrum(AudioBuffer(std::vector<double>(30000, 0.0), 44100));
  for (double p : s.power) CHECK(p <= 1e-30);
  CHECK_THROWS_AS(estimate_spectrum(AudioBuffer(std::vector<double>(17000, 0.0), 44100)), std::invalid_argument);
}

TEST_CASE("Parseval, rectangular window") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> v(5000);
  for (double& x : v) x = nd(rng);
  const AudioBuffer x(v, 8000);
  SpectrumOptions o;
  o.edge_trim = 0;
  o.window = SpectrumWindow::Rectangular;
  const auto s = estimate_spectrum(x, o);
  // the one-sided sum counts every padded bin except DC and Nyquist twice,
  // which equals the two-sided sum over the padded FFT
  double ms = 0.0;
  for (double d : v) ms += d * d;
  ms /= static_cast<double>(v.size());
  CHECK(s.total_power() == doctest::Approx(ms).epsilon(1e-9));
}

TEST_CASE("Parseval, Hann window: known window gain") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<double> v(5000);
  for (double& x : v) x = nd(rng);
  SpectrumOptions o;
  o.edge_trim = 0;
  const auto s = estimate_spectrum(AudioBuffer(v, 8000), o);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = 0.5 - 0.5 * std::cos(2 * pi * i / v.size());
    num += w * w * v[i] * v[i];
    den += w * w;
  }
  CHECK(s.total_power() == doctest::Approx(num / den).epsilon(1e-9));
}

TEST_CASE("two tones add") {
  const auto a = sine(1000, 44100, 60000, 0.8), b = sine(3700, 44100, 60000, 0.3);
  std::vector<double> v(60000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  const auto s = estimate_spectrum(AudioBuffer(v, 44100));
  const double hw = s.band_half_width();
  CHECK(band_energy(s, 1000, hw) == doctest::Approx(0.32).epsilon(0.01));
  CHECK(band_energy(s, 3700, hw) == doctest::Approx(0.045).epsilon(0.01));
  CHECK(s.total_power() == doctest::Approx(0.32 + 0.045).epsilon(0.01));
}

TEST_CASE("fold_frequency") {
  CHECK(fold_frequency(24000, 44100) == doctest::Approx(20100));
  CHECK(fold_frequency(1000, 44100) == 1000);
  CHECK(fold_frequency(44100 + 300, 44100) == doctest::Approx(300));
  CHECK(fold_frequency(66150 + 10, 44100) == doctest::Approx(22040));
}

TEST_CASE("AHR of an identity system sits on the floor") {
  for (Waveform w : kAllWaveforms) {
    const auto x = bench_signal(w, 72);
    CHECK(ahr(x, midi_to_freq(72), ActivationContext{44100}) == kAhrFloorDb);
  }
}

TEST_CASE("AHR is gain and circular-shift invariant") {
  ActivationSpec spec;
  spec.kind = ActivationKind::LeakyReLU;
  const double f0 = midi_to_freq(79.3);
  const auto y = apply_activation(bench_signal(Waveform::Sawtooth, 79.3), spec);
  const double base = ahr(y, f0, ActivationContext{44100});
  CHECK(base > -60.0);
  for (double g : {1e-3, 0.5, 7.0}) {
    auto v = y.vec();
    for (double& s : v) s *= g;
    CHECK(ahr(AudioBuffer(v, 44100), f0, ActivationContext{44100}) == doctest::Approx(base).epsilon(1e-9));
  }
  for (std::size_t shift : {1u, 37u, 1000u}) {
    auto v = y.vec();
    std::rotate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(shift), v.end());
    CHECK(ahr(AudioBuffer(v, 44100), f0, ActivationContext{44100}) == doctest::Approx(base).epsilon(0.01));
  }
}

TEST_CASE("more out-of-band noise means a less negative AHR") {
  const auto x = bench_signal(Waveform::Triangle, 72);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> n(x.size());
  for (double& v : n) v = nd(rng);
  std::vector<double> seen;
  for (double level_db : {-200.0, -140.0, -120.0, -100.0, -80.0, -60.0}) {
    const double g = std::pow(10.0, level_db / 20.0);
    auto v = x.vec();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += g * n[i];
    seen.push_back(ahr(AudioBuffer(v, 44100), midi_to_freq(72), ActivationContext{44100}));
  }
  CHECK(seen.front() == kAhrFloorDb);
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] >= seen[i - 1]);
  // once above the floor every 20 dB of noise shows up
  for (std::size_t i = 4; i < seen.size(); ++i) CHECK(seen[i] > seen[i - 1] + 15.0);
  CHECK(seen[3] > kAhrFloorDb);
}

TEST_CASE("harmonic and alias sets are disjoint") {
  ActivationSpec spec;
  for (Waveform w : kAllWaveforms) {
    for (double pitch : {60.0, 83.0, 95.0}) {
      const auto x = bench_signal(w, pitch);
      const auto d = ahr_detail(apply_activation(x, spec), midi_to_freq(pitch), ActivationContext{44100});
      const double hw = 4.0 * 44100.0 / (x.size() - 2 * kEdgeDiscard);
      for (double a : d.alias_freqs) {
        for (double h : d.harmonic_freqs) CHECK(std::abs(a - h) >= 2 * hw);
        CHECK(a >= 2 * hw);
      }
      CHECK(d.ahr_db >= kAhrFloorDb);
    }
  }
}

TEST_CASE("upsampler-context AHR uses image frequencies") {
  // an upsampler that only zero-interlaces leaves an image as loud as the signal
  const auto x = gen_bandlimited({Waveform::Sine, 69, 5.0, 22050, benchmark_peak()});
  std::vector<double> v(2 * x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) v[2 * i] = x[i];
  const auto d = ahr_detail(AudioBuffer(v, 44100), 440, UpsamplerContext{2, 22050}, 1);
  CHECK(d.alias_freqs == std::vector<double>{21610});
  CHECK(d.ahr_db == doctest::Approx(0.0).epsilon(1e-3));
  CHECK_THROWS_AS(ahr(AudioBuffer(v, 48000), 440, UpsamplerContext{2, 22050}), std::invalid_argument);
}

TEST_CASE("AHR reports average in the dB domain") {
  std::vector<SignalAhr> s = {{Waveform::Sine, 100, -100}, {Waveform::Sine, 200, -80},
                              {Waveform::Sawtooth, 100, -30}, {Waveform::Triangle, 100, -60}};
  const auto r = make_report(s, 3, 4);
  CHECK(r.per_type_mean_db[0] == -90);
  CHECK(r.per_type_mean_db[1] == -30);
  CHECK(r.overall_mean_db == doctest::Approx(-60));
  CHECK(r.floor_db == kAhrFloorDb);
  CHECK(r.harmonic_band_count == 3);
}

TEST_CASE("STFT shape and export") {
  const auto sweep = gen_sweep(20, 20000, 4.0, 44100);
  const auto s = stft(sweep, 1024, 256);
  CHECK(s.n_bins == 513);
  CHECK(s.n_frames == (176400 - 1024 + 255) / 256 + 1);
  CHECK_THROWS_AS(stft(sweep, 256, 1024), std::invalid_argument);

  const fs::path stem = fs::temp_directory_path() / "aliasfree_spec_test";
  spectrogram_export(AudioBuffer(std::vector<double>(5000, 0.0), 44100), 512, 128, stem);
  std::ifstream pgm(stem.string() + ".pgm", std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxv = 0;
  pgm >> magic >> w >> h >> maxv;
  pgm.get();
  CHECK(magic == "P5");
  CHECK(h == 257);
  CHECK(w == (5000 - 512 + 127) / 128 + 1);
  CHECK(maxv == 255);
  std::string pixels((std::istreambuf_iterator<char>(pgm)), {});
  CHECK(pixels.size() == w * h);
  CHECK(pixels.find_first_not_of('\0') == std::string::npos);

  std::ifstream csv(stem.string() + ".csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("freq_hz,frame_0,", 0) == 0);
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 257);
  fs::remove(stem.string() + ".pgm");
  fs::remove(stem.string() + ".csv");
}

TEST_CASE("clean sweep has nothing off its ridge") {
  auto sweep = gen_sweep(20, 20000, 4.0, 44100);
  const auto s = stft(sweep, 1024, 256);
  const auto r = sweep_off_ridge(s, 20, 20000, 4.0);
  CHECK(r.frames_used > 500);
  CHECK(r.max_off_ridge_cell_db <= -100.0);
}
