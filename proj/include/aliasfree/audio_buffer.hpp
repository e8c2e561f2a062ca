#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace aliasfree {

// Mono signal at a fixed integer sample rate. Samples are float64 throughout
// the library; only WAV I/O narrows to float32.
class AudioBuffer {
 public:
  AudioBuffer() = default;

  AudioBuffer(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) {
      throw std::invalid_argument("AudioBuffer: sample_rate must be positive");
    }
  }

  static AudioBuffer zeros(std::size_t n, int sample_rate) {
    return AudioBuffer(std::vector<double>(n, 0.0), sample_rate);
  }

  [[nodiscard]] int sample_rate() const noexcept { return sample_rate_; }
  [[nodiscard]] double nyquist() const noexcept { return 0.5 * sample_rate_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  [[nodiscard]] std::span<const double> samples() const noexcept { return samples_; }
  [[nodiscard]] std::span<double> samples() noexcept { return samples_; }
  [[nodiscard]] const std::vector<double>& vec() const noexcept { return samples_; }

  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  double& operator[](std::size_t i) noexcept { return samples_[i]; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 1;
};

// Largest absolute sample value; 0 for an empty buffer.
double peak(const AudioBuffer& x) noexcept;

// True when every sample is finite.
bool all_finite(const AudioBuffer& x) noexcept;

}  // namespace aliasfree
