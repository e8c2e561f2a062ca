#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "aliasfree/filters.hpp"
#include "aliasfree/metrics.hpp"
#include "aliasfree/signal.hpp"

using namespace aliasfree;
using std::numbers::pi;

namespace {

double mag_db(const FirKernel& h, double omega_norm) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) acc += h.taps()[n] * std::polar(1.0, -pi * omega_norm * n);
  return 20.0 * std::log10(std::abs(acc));
}

AudioBuffer sine(double f, int rate, std::size_t n, double amp = 1.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * pi * f * i / rate);
  return AudioBuffer(std::move(v), rate);
}

// Welch PSD (Hann, 50% overlap), bins 0..seg/2, arbitrary common scale.
std::vector<double> welch(const std::vector<double>& x, std::size_t seg) {
  std::vector<double> psd(seg / 2 + 1, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += seg / 2, ++count) {
    for (std::size_t k = 0; k <= seg / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2 * pi * i / seg);
        acc += w * x[start + i] * std::polar(1.0, -2 * pi * double(k) * double(i) / double(seg));
      }
      psd[k] += std::norm(acc);
    }
  }
  for (double& p : psd) p /= static_cast<double>(count);
  return psd;
}

}  // namespace

TEST_CASE("kaiser design parameters") {
  CHECK(kaiser_beta(100.0) == doctest::Approx(0.1102 * (100 - 8.7)));
  CHECK(kaiser_num_taps(100.0, 0.05) % 2 == 1);
  CHECK(kaiser_num_taps(100.0, 0.05) >= static_cast<std::size_t>(std::ceil((100 - 7.95) / (2.285 * pi * 0.05))));
  const auto w = kaiser_window(11, 5.0);
  CHECK(w[5] == doctest::Approx(1.0));
  CHECK(w[0] == doctest::Approx(w[10]));
}

TEST_CASE("low-pass 80 dB design meets its stopband") {
  const auto h = design_fir({0.5, 0.05, 80.0, FilterKind::LowPass});
  CHECK(h.is_symmetric(1e-12));
  CHECK(std::abs(20 * std::log10(h.dc_gain())) <= 0.1);
  CHECK(mag_db(h, 0.575) <= -77.0);
  for (double w = 0.5 + 0.025; w <= 1.0; w += 0.001) CHECK(mag_db(h, w) <= -77.0);
  for (double w = 0.0; w <= 0.475; w += 0.001) CHECK(std::abs(mag_db(h, w)) <= 0.1);
}

TEST_CASE("high-pass by spectral inversion") {
  const auto h = design_fir({0.5, 0.05, 80.0, FilterKind::HighPass});
  CHECK(mag_db(h, 0.0) <= -77.0);
  CHECK(std::abs(mag_db(h, 1.0)) <= 0.1);
  CHECK(h.is_symmetric(1e-12));
}

TEST_CASE("designs are symmetric with unity DC across parameters") {
  for (double cut : {0.1, 0.25, 0.5, 0.8}) {
    for (double atten : {40.0, 80.0, 120.0}) {
      const auto h = design_fir({cut, 0.04, atten, FilterKind::LowPass});
      CHECK(h.is_symmetric(1e-12));
      CHECK(h.dc_gain() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(h.center() == h.size() / 2);
    }
  }
  CHECK_THROWS_AS(design_fir({0.5, 0.0, 80.0, FilterKind::LowPass}), std::invalid_argument);
  CHECK_THROWS_AS(design_fir({1.2, 0.05, 80.0, FilterKind::LowPass}), std::invalid_argument);
  CHECK_THROWS_AS(design_fir({0.99, 0.05, 80.0, FilterKind::LowPass}), std::invalid_argument);
}

TEST_CASE("convolve: hand examples") {
  const AudioBuffer x(std::vector<double>{1, 0, 0}, 1000);
  CHECK(convolve(x, FirKernel({1.0}, 0)).vec() == std::vector<double>{1, 0, 0});
  const AudioBuffer ones(std::vector<double>{1, 1, 1, 1}, 1000);
  CHECK(convolve(ones, FirKernel({0.5, 0.5}, 0)).vec() == std::vector<double>{1, 1, 1, 0.5});
}

TEST_CASE("convolve: output spectrum follows |H|^2 (Welch)") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  std::vector<double> v(1 << 15);
  for (double& s : v) s = nd(rng);
  const AudioBuffer x(v, 48000);
  const auto h = design_fir({0.3, 0.1, 60.0, FilterKind::LowPass});
  const auto y = convolve(x, h);
  const std::size_t seg = 256;
  const auto px = welch(x.vec(), seg);
  const auto py = welch(y.vec(), seg);
  for (std::size_t k = 0; k < px.size(); ++k) {
    const double w = 2.0 * double(k) / double(seg);
    const double h2 = std::pow(10.0, mag_db(h, w) / 10.0);
    if (h2 < 1e-2) continue;  // leakage dominates deep in the stopband
    INFO("bin " << k);
    CHECK(py[k] / px[k] == doctest::Approx(h2).epsilon(0.1));
  }
}

TEST_CASE("convolve energy bound") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(500), taps(1 + trial);
    for (double& s : v) s = ud(rng);
    for (double& t : taps) t = ud(rng);
    const FirKernel h(taps, taps.size() / 2);
    double hmax = 0.0;
    for (const auto& p : frequency_response(h, 4096)) hmax = std::max(hmax, std::abs(p.response));
    const auto y = convolve(AudioBuffer(v, 1), h);
    double ex = 0.0, ey = 0.0;
    for (double s : v) ex += s * s;
    for (double s : y.samples()) ey += s * s;
    CHECK(ey <= ex * hmax * hmax * (1 + 1e-3) + 1e-9);
  }
}

TEST_CASE("zero_interlace") {
  const AudioBuffer x(std::vector<double>{1, 2}, 100);
  const auto y = zero_interlace(x, 2);
  CHECK(y.vec() == std::vector<double>{1, 0, 2, 0});
  CHECK(y.sample_rate() == 200);
  CHECK(zero_interlace(x, 1) == x);

  // image at fs_in - f with the same magnitude
  const auto s = zero_interlace(sine(1000, 22050, 44100), 2);
  const auto spec = estimate_spectrum(s);
  const double a = band_energy(spec, 1000, spec.band_half_width());
  const double b = band_energy(spec, 21050, spec.band_half_width());
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("upsample_filtered") {
  const AudioBuffer dc(std::vector<double>(40000, 1.0), 22050);
  const auto y = upsample_filtered(dc, 2);
  CHECK(y.size() == 80000);
  CHECK(y.sample_rate() == 44100);
  for (std::size_t i = kEdgeDiscard; i + kEdgeDiscard < y.size(); ++i) CHECK(std::abs(y[i] - 1.0) <= 0.01);

  const auto up = upsample_filtered(sine(1000, 22050, 110250), 2);
  const auto spec = estimate_spectrum(up);
  const double sig = band_energy(spec, 1000, spec.band_half_width());
  const double img = band_energy(spec, 21050, spec.band_half_width());
  CHECK(sig == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(10 * std::log10(img / sig) <= -77.0);

  const auto x = sine(440, 44100, 1000);
  CHECK(upsample_filtered(x, 1) == x);
}

TEST_CASE("up then down reconstructs band-limited input") {
  // random multitone inside the resampling passband
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uf(20.0, 20000.0), ua(0.01, 0.2), uph(0, 2 * pi);
  std::vector<double> v(44100, 0.0);
  for (int tone = 0; tone < 30; ++tone) {
    const double f = uf(rng), a = ua(rng), ph = uph(rng);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * std::sin(2 * pi * f * i / 44100.0 + ph);
  }
  const AudioBuffer x(v, 44100);
  for (std::size_t L : {2u, 4u, 8u}) {
    const auto y = downsample_filtered(upsample_filtered(x, L), L);
    REQUIRE(y.size() == x.size());
    double es = 0.0, ee = 0.0;
    for (std::size_t i = kEdgeDiscard; i + kEdgeDiscard < x.size(); ++i) {
      es += x[i] * x[i];
      ee += (x[i] - y[i]) * (x[i] - y[i]);
    }
    INFO("L = " << L);
    CHECK(10 * std::log10(es / ee) >= 80.0);
  }
}

TEST_CASE("polyphase resampling equals the direct zero-stuff / decimate form") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t L : {2u, 3u, 5u, 64u}) {
    std::vector<double> v(L == 64 ? 300 : 2000);
    for (double& s : v) s = u(rng);
    const AudioBuffer x(v, 8000);
    const FirKernel h = resampling_lowpass(L, default_resampling_filter());

    const auto up = upsample_filtered(x, L);
    const auto ref = convolve(zero_interlace(x, L), h.scaled(static_cast<double>(L)));
    REQUIRE(up.size() == ref.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < up.size(); ++i) worst = std::max(worst, std::abs(up[i] - ref[i]));
    INFO("L = " << L);
    CHECK(worst <= 1e-12);

    const AudioBuffer& hi = ref;
    const auto down = downsample_filtered(hi, L);
    const auto full = convolve(hi, h);
    REQUIRE(down.size() == (hi.size() + L - 1) / L);
    worst = 0.0;
    for (std::size_t o = 0; o < down.size(); ++o) worst = std::max(worst, std::abs(down[o] - full[o * L]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("downsample_filtered: DC and length") {
  const AudioBuffer dc(std::vector<double>(30001, 1.0), 44100);
  const auto y = downsample_filtered(dc, 2);
  CHECK(y.size() == 15001);
  CHECK(y.sample_rate() == 22050);
  for (std::size_t i = 4096; i + 4096 < y.size(); ++i) CHECK(std::abs(y[i] - 1.0) <= 0.01);
  CHECK(downsample_filtered(dc, 1) == dc);
  CHECK_THROWS_AS(downsample_filtered(AudioBuffer(std::vector<double>(10, 1.0), 44101), 2), std::invalid_argument);
}

TEST_CASE("upsampling reproduces analytic sinc interpolation") {
  const double f = 3100.0;
  const auto x = sine(f, 22050, 60000, 0.8);
  const auto y = upsample_filtered(x, 2);
  const auto ref = sine(f, 44100, y.size(), 0.8);
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = kEdgeDiscard; i + kEdgeDiscard < y.size(); ++i) {
    xy += y[i] * ref[i];
    xx += y[i] * y[i];
    yy += ref[i] * ref[i];
  }
  CHECK(xy / std::sqrt(xx * yy) >= 0.9999);
}

TEST_CASE("frequency_response basics") {
  for (const auto& p : frequency_response(FirKernel({1.0}, 0), 64)) CHECK(std::abs(p.response) == doctest::Approx(1.0));
  const auto near = frequency_response(interp_kernel(InterpKind::Nearest, 1), 2);
  CHECK(std::abs(near.front().response) == doctest::Approx(3.0));
  CHECK(std::abs(near.back().response) == doctest::Approx(1.0));
  CHECK(near.back().omega == 1.0);
}

TEST_CASE("interpolation kernels") {
  CHECK(interp_kernel(InterpKind::Linear, 2).taps() == std::vector<double>{0, 0.5, 1, 0.5, 0});
  CHECK(interp_kernel(InterpKind::Nearest, 1).taps() == std::vector<double>{1, 1, 1});
  CHECK(interp_kernel(InterpKind::Linear, 1).taps() == std::vector<double>{0, 1, 0});
  const AudioBuffer x(std::vector<double>{0.3, -1.2, 4.0}, 10);
  CHECK(convolve(x, interp_kernel(InterpKind::Linear, 1)) == x);
  CHECK_THROWS_AS(interp_kernel(InterpKind::Linear, 0), std::invalid_argument);
}

TEST_CASE("linear kernel: Fejer closed form, nulls at multiples of 2pi/N, monotone passband") {
  for (std::size_t N : {2u, 3u, 4u, 8u}) {
    const auto h = interp_kernel(InterpKind::Linear, N);
    const auto resp = frequency_response(h, 4096);
    double prev = 1e300;
    for (const auto& p : resp) {
      const double w = pi * p.omega;
      const double s = std::sin(w / 2);
      const double closed = s == 0.0 ? double(N) : std::pow(std::sin(N * w / 2) / s, 2) / double(N);
      CHECK(std::abs(std::abs(p.response) - closed) <= 1e-9);
      if (p.omega <= 2.0 / double(N)) {
        CHECK(std::abs(p.response) <= prev + 1e-12);
        prev = std::abs(p.response);
      }
    }
    for (std::size_t m = 1; 2 * m <= N; ++m) {
      const double null = 2.0 * double(m) / double(N);
      const auto single = frequency_response(h, 2 * N + 1);  // grid contains 2m/N
      for (const auto& p : single) {
        if (std::abs(p.omega - null) < 1e-12) CHECK(std::abs(p.response) <= 1e-12);
      }
    }
  }
}
