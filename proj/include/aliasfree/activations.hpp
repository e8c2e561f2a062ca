#pragma once

#include <functional>
#include <span>
#include <string_view>

#include "aliasfree/audio_buffer.hpp"
#include "aliasfree/filters.hpp"

namespace aliasfree {

enum class ActivationKind { Identity, LeakyReLU, ELU, SnakeBeta, AdaaSnakeBeta, AdaaGeneric };

std::string_view to_string(ActivationKind k) noexcept;
ActivationKind parse_activation_kind(std::string_view name);

struct ActivationSpec {
  ActivationKind kind = ActivationKind::SnakeBeta;
  // Nonlinearity wrapped by AdaaGeneric; ignored otherwise.
  ActivationKind base = ActivationKind::LeakyReLU;
  double slope = 0.1;     // LeakyReLU negative-side slope (0 gives ReLU)
  double elu_a = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  int oversample = 1;     // one of 1, 2, 4, 8
  double adaa_tol = 1e-5;
  FilterDesignSpec filter = default_resampling_filter();

  void validate() const;
  [[nodiscard]] bool is_adaa() const noexcept {
    return kind == ActivationKind::AdaaSnakeBeta || kind == ActivationKind::AdaaGeneric;
  }
};

// Unnormalised sinc, sin(u)/u with sinc(0) = 1, and its derivative. Both use
// a Taylor series for |u| < 1e-4.
double sinc(double u) noexcept;
double sinc_derivative(double u) noexcept;

// x + sin^2(alpha x) / beta
double snakebeta(double x, double alpha, double beta) noexcept;

// First antiderivative of snakebeta with zero integration constant.
double snakebeta_antiderivative(double x, double alpha, double beta) noexcept;

// Closed-form first-order ADAA of SnakeBeta over the segment [x_prev, x_t]:
//   1/(2b) + (x_t + x_prev)/2 - cos(a(x_t + x_prev)) sinc(a(x_t - x_prev)) / (2b)
// No division by x_t - x_prev, so there is no tolerance switch.
double adaa_snakebeta(double x_t, double x_prev, double alpha, double beta) noexcept;

struct AdaaGradient {
  double d_current;   // dy/dx_t
  double d_previous;  // dy/dx_prev
};

// Both partials lie in [(beta - alpha)/(2 beta), (beta + alpha)/(2 beta)].
AdaaGradient adaa_snakebeta_grad(double x_t, double x_prev, double alpha, double beta) noexcept;

// A nonlinearity together with its first antiderivative.
struct AdaaPair {
  std::function<double(double)> f;
  std::function<double(double)> antiderivative;
};

// Checks dF/dx == f (central difference, 1e-6) on a grid over [-4, 4] and
// throws std::invalid_argument on mismatch.
AdaaPair make_adaa_pair(std::function<double(double)> f, std::function<double(double)> F);

// Built-in pair for Identity, LeakyReLU, ELU or SnakeBeta with spec's parameters.
AdaaPair builtin_adaa_pair(ActivationKind base, const ActivationSpec& spec);

// (F(x_t) - F(x_prev)) / (x_t - x_prev), or f(midpoint) when
// |x_t - x_prev| < tol.
double adaa_generic(const AdaaPair& pair, double x_t, double x_prev, double tol);

// Memory of the previous input sample for streamed ADAA; starts at 0.
struct AdaaState {
  double prev_sample = 0.0;
};

// Applies the nonlinearity in place at the current rate (no oversampling).
// ADAA kinds read and update `state`, so splitting a stream into blocks gives
// the same result as one call.
void process_block(std::span<double> block, const ActivationSpec& spec, AdaaState& state);

// Oversampled application: upsample by spec.oversample, process_block at the
// high rate from a fresh AdaaState, downsample back. Length and rate preserved.
AudioBuffer apply_activation(const AudioBuffer& x, const ActivationSpec& spec);

// Magnitude of the m-th multiple of the input frequency in relu(sin(wt)).
double relu_sine_fourier(int m) noexcept;

}  // namespace aliasfree
