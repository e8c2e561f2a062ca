#include "aliasfree/wav.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "aliasfree/errors.hpp"

namespace aliasfree {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

static_assert(std::endian::native == std::endian::little,
              "WAV codec assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }
  [[nodiscard]] std::size_t pos() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw IoError(std::string("WAV truncated while reading ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  bool tag(const char* expected, const char* what) {
    need(4, what);
    const bool ok = std::memcmp(bytes_.data() + pos_, expected, 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::string tag_str(const char* what) {
    need(4, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }
  void skip(std::size_t n, const char* what) {
    need(n, what);
    pos_ += n;
  }
  [[nodiscard]] std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  const auto n = static_cast<std::uint32_t>(buffer.size());
  const std::uint32_t data_bytes = n * 4;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatFloat);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()) * 4);
  put_u16(out, 4);
  put_u16(out, 32);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double v : buffer.samples()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (!r.tag("RIFF", "RIFF header")) throw IoError("not a RIFF file");
  r.u32("RIFF size");
  if (!r.tag("WAVE", "WAVE tag")) throw IoError("RIFF file is not WAVE");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  while (r.remaining() >= 8) {
    const std::string id = r.tag_str("chunk id");
    const std::uint32_t size = r.u32("chunk size");
    if (id == "fmt ") {
      if (size < 16) throw IoError("fmt chunk too small");
      format = r.u16("format tag");
      channels = r.u16("channel count");
      rate = r.u32("sample rate");
      r.u32("byte rate");
      r.u16("block align");
      bits = r.u16("bits per sample");
      r.skip(size - 16 + (size & 1u), "fmt chunk");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError("data chunk before fmt chunk");
      if (channels != 1) throw IoError("only mono WAV is supported");
      if (rate == 0 || rate > 0x7fffffffu) throw IoError("invalid sample rate");
      std::vector<double> samples;
      if (format == kFormatFloat && bits == 32) {
        auto raw = r.take(size - size % 4, "float32 samples");
        samples.resize(raw.size() / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          std::uint32_t u = 0;
          std::memcpy(&u, raw.data() + 4 * i, 4);
          samples[i] = static_cast<double>(std::bit_cast<float>(u));
        }
      } else if (format == kFormatPcm && bits == 16) {
        auto raw = r.take(size - size % 2, "pcm16 samples");
        samples.resize(raw.size() / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const auto s = static_cast<std::int16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
          samples[i] = static_cast<double>(s) / 32768.0;
        }
      } else {
        throw IoError("unsupported WAV format tag " + std::to_string(format) + " with " +
                      std::to_string(bits) + " bits");
      }
      return AudioBuffer(std::move(samples), static_cast<int>(rate));
    } else {
      r.skip(std::min<std::size_t>(size + (size & 1u), r.remaining()), "chunk");
    }
  }
  throw IoError("WAV has no data chunk");
}

void wav_write(const AudioBuffer& buffer, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buffer);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

AudioBuffer wav_read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace aliasfree
