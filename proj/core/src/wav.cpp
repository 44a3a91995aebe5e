#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "spkid/corpus.hpp"
#include "spkid/error.hpp"

namespace spkid {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open audio file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "error reading '" + path.string() + "'");
  return bytes;
}

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::vector<std::int16_t> decode_le16(std::span<const std::uint8_t> bytes) {
  std::vector<std::int16_t> pcm(bytes.size() / 2);
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    pcm[i] = static_cast<std::int16_t>(le16(bytes.data() + 2 * i));
  }
  return pcm;
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

PcmAudio parse_wav(std::span<const std::uint8_t> bytes, const std::string& origin) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorKind::format, "'" + origin + "': " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  PcmAudio audio;
  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus data length when streaming; clamp it.
      if (std::memcmp(chunk, "data", 4) != 0) throw fail("truncated chunk");
    }
    const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw fail("fmt chunk too short");
      std::uint16_t format = le16(chunk + 8);
      audio.channels = le16(chunk + 10);
      audio.sample_rate = static_cast<int>(le32(chunk + 12));
      bits = le16(chunk + 22);
      if (format == kFormatExtensible && available >= 40) {
        format = le16(chunk + 8 + 24);  // first two bytes of the subformat GUID
      }
      if (format != kFormatPcm) throw fail("unsupported encoding (only linear PCM)");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      if (bits != 16) throw fail("unsupported sample width " + std::to_string(bits) + " bits");
      audio.samples = decode_le16(bytes.subspan(body, available - available % 2));
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!have_data) throw fail("missing data chunk");
  return audio;
}

PcmAudio read_wav(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return parse_wav(bytes, path.string());
}

std::vector<std::int16_t> read_raw_pcm(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() % 2 != 0) {
    throw Error(ErrorKind::format, "'" + path.string() + "': odd byte count for 16-bit PCM");
  }
  return decode_le16(bytes);
}

void write_wav(const std::filesystem::path& path, std::span<const std::int16_t> samples,
               int sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (std::int16_t s : samples) put16(out, static_cast<std::uint16_t>(s));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::io, "short write to '" + path.string() + "'");
}

std::vector<double> pcm_to_samples(std::span<const std::int16_t> pcm) {
  std::vector<double> out(pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) out[i] = pcm[i] / 32768.0;
  return out;
}

std::vector<std::int16_t> samples_to_pcm(std::span<const double> samples) {
  std::vector<std::int16_t> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = std::nearbyint(samples[i] * 32768.0);
    out[i] = static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
  }
  return out;
}

}  // namespace spkid
