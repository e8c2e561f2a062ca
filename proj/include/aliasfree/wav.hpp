#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aliasfree/audio_buffer.hpp"

namespace aliasfree {

// Mono RIFF/WAVE. Writing always emits IEEE float32 (format tag 3). Reading
// accepts float32 and 16-bit PCM (scaled by 1/32768). Failures throw IoError.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

void wav_write(const AudioBuffer& buffer, const std::filesystem::path& path);
AudioBuffer wav_read(const std::filesystem::path& path);

}  // namespace aliasfree
