#include "aliasfree/activations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aliasfree {

std::string_view to_string(ActivationKind k) noexcept {
  switch (k) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::ELU: return "elu";
    case ActivationKind::SnakeBeta: return "snakebeta";
    case ActivationKind::AdaaSnakeBeta: return "adaa_snakebeta";
    case ActivationKind::AdaaGeneric: return "adaa_generic";
  }
  return "?";
}

ActivationKind parse_activation_kind(std::string_view name) {
  for (auto k : {ActivationKind::Identity, ActivationKind::LeakyReLU, ActivationKind::ELU,
                 ActivationKind::SnakeBeta, ActivationKind::AdaaSnakeBeta,
                 ActivationKind::AdaaGeneric}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown activation kind: " + std::string(name));
}

void ActivationSpec::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("activation: alpha and beta must be positive");
  }
  if (oversample != 1 && oversample != 2 && oversample != 4 && oversample != 8) {
    throw std::invalid_argument("activation: oversample must be 1, 2, 4 or 8");
  }
  if (!(adaa_tol > 0.0)) throw std::invalid_argument("activation: adaa_tol must be positive");
  if (!std::isfinite(slope) || !(elu_a > 0.0)) {
    throw std::invalid_argument("activation: invalid slope or ELU scale");
  }
  if (kind == ActivationKind::AdaaGeneric &&
      (base == ActivationKind::AdaaGeneric || base == ActivationKind::AdaaSnakeBeta)) {
    throw std::invalid_argument("activation: adaa_generic needs a plain base nonlinearity");
  }
  if (oversample > 1) filter.validate();
}

namespace {
constexpr double kSeriesLimit = 1e-4;
}

double sinc(double u) noexcept {
  if (std::abs(u) < kSeriesLimit) {
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0));
  }
  return std::sin(u) / u;
}

double sinc_derivative(double u) noexcept {
  if (std::abs(u) < kSeriesLimit) {
    const double u2 = u * u;
    return u * (-1.0 / 3.0 + u2 / 30.0 - u2 * u2 / 840.0 + u2 * u2 * u2 / 45360.0);
  }
  return (std::cos(u) - std::sin(u) / u) / u;
}

double snakebeta(double x, double alpha, double beta) noexcept {
  const double s = std::sin(alpha * x);
  return x + s * s / beta;
}

double snakebeta_antiderivative(double x, double alpha, double beta) noexcept {
  return 0.5 * x * x + x / (2.0 * beta) - std::sin(2.0 * alpha * x) / (4.0 * alpha * beta);
}

double adaa_snakebeta(double x_t, double x_prev, double alpha, double beta) noexcept {
  const double sum = x_t + x_prev;
  const double diff = x_t - x_prev;
  return 0.5 / beta + 0.5 * sum - std::cos(alpha * sum) * sinc(alpha * diff) / (2.0 * beta);
}

AdaaGradient adaa_snakebeta_grad(double x_t, double x_prev, double alpha, double beta) noexcept {
  const double a = alpha * (x_t + x_prev);
  const double u = alpha * (x_t - x_prev);
  const double scale = alpha / (2.0 * beta);
  const double common = scale * std::sin(a) * sinc(u);
  const double odd = scale * std::cos(a) * sinc_derivative(u);
  // sinc^2 + sinc'^2 <= 1, so |common -+ odd| <= scale; the clamp only absorbs
  // rounding where that bound is tight (u -> 0).
  const auto bound = [scale](double v) { return std::clamp(v, -scale, scale); };
  return {0.5 + bound(common - odd), 0.5 + bound(common + odd)};
}

AdaaPair make_adaa_pair(std::function<double(double)> f, std::function<double(double)> F) {
  if (!f || !F) throw std::invalid_argument("make_adaa_pair: empty function");
  constexpr double h = 1e-6;
  constexpr int points = 97;
  for (int i = 0; i < points; ++i) {
    const double x = -4.0 + 8.0 * i / (points - 1);
    const double numeric = (F(x + h) - F(x - h)) / (2.0 * h);
    const double expected = f(x);
    if (!(std::abs(numeric - expected) <= 1e-6 * std::max(1.0, std::abs(expected)))) {
      throw std::invalid_argument("make_adaa_pair: antiderivative does not match f at x=" +
                                  std::to_string(x));
    }
  }
  return AdaaPair{std::move(f), std::move(F)};
}

AdaaPair builtin_adaa_pair(ActivationKind base, const ActivationSpec& spec) {
  switch (base) {
    case ActivationKind::Identity:
      return make_adaa_pair([](double x) { return x; }, [](double x) { return 0.5 * x * x; });
    case ActivationKind::LeakyReLU: {
      const double s = spec.slope;
      return make_adaa_pair([s](double x) { return x > 0.0 ? x : s * x; },
                            [s](double x) { return x > 0.0 ? 0.5 * x * x : 0.5 * s * x * x; });
    }
    case ActivationKind::ELU: {
      const double a = spec.elu_a;
      return make_adaa_pair([a](double x) { return x > 0.0 ? x : a * std::expm1(x); },
                            [a](double x) { return x > 0.0 ? 0.5 * x * x : a * (std::expm1(x) - x); });
    }
    case ActivationKind::SnakeBeta: {
      const double al = spec.alpha, be = spec.beta;
      return make_adaa_pair([al, be](double x) { return snakebeta(x, al, be); },
                            [al, be](double x) { return snakebeta_antiderivative(x, al, be); });
    }
    default:
      throw std::invalid_argument("builtin_adaa_pair: no antiderivative for this kind");
  }
}

double adaa_generic(const AdaaPair& pair, double x_t, double x_prev, double tol) {
  const double diff = x_t - x_prev;
  if (std::abs(diff) < tol) return pair.f(0.5 * (x_t + x_prev));
  return (pair.antiderivative(x_t) - pair.antiderivative(x_prev)) / diff;
}

void process_block(std::span<double> block, const ActivationSpec& spec, AdaaState& state) {
  switch (spec.kind) {
    case ActivationKind::Identity:
      return;
    case ActivationKind::LeakyReLU:
      for (double& v : block) v = v > 0.0 ? v : spec.slope * v;
      return;
    case ActivationKind::ELU:
      for (double& v : block) v = v > 0.0 ? v : spec.elu_a * std::expm1(v);
      return;
    case ActivationKind::SnakeBeta:
      for (double& v : block) v = snakebeta(v, spec.alpha, spec.beta);
      return;
    case ActivationKind::AdaaSnakeBeta: {
      double prev = state.prev_sample;
      for (double& v : block) {
        const double cur = v;
        v = adaa_snakebeta(cur, prev, spec.alpha, spec.beta);
        prev = cur;
      }
      state.prev_sample = prev;
      return;
    }
    case ActivationKind::AdaaGeneric: {
      const AdaaPair pair = builtin_adaa_pair(spec.base, spec);
      double prev = state.prev_sample;
      for (double& v : block) {
        const double cur = v;
        v = adaa_generic(pair, cur, prev, spec.adaa_tol);
        prev = cur;
      }
      state.prev_sample = prev;
      return;
    }
  }
}

AudioBuffer apply_activation(const AudioBuffer& x, const ActivationSpec& spec) {
  spec.validate();
  const auto factor = static_cast<std::size_t>(spec.oversample);
  AudioBuffer high = upsample_filtered(x, factor, spec.filter);
  AdaaState state;
  process_block(high.samples(), spec, state);
  AudioBuffer y = downsample_filtered(high, factor, spec.filter);
  return y;
}

double relu_sine_fourier(int m) noexcept {
  using std::numbers::pi;
  if (m < 0) return 0.0;
  if (m == 0) return 1.0 / pi;
  if (m == 1) return 0.5;
  if (m % 2 == 1) return 0.0;
  const double k = m / 2;
  return 2.0 / (pi * (2.0 * k - 1.0) * (2.0 * k + 1.0));
}

}  // namespace aliasfree
