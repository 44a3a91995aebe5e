#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "spkid/corpus.hpp"
#include "spkid/error.hpp"
#include "spkid/json_util.hpp"
#include "spkid/parallel.hpp"

namespace spkid {

const char* to_string(Role role) noexcept { return role == Role::train ? "train" : "test"; }

Role role_from_string(const std::string& s) {
  if (s == "train") return Role::train;
  if (s == "test") return Role::test;
  throw Error(ErrorKind::format, "manifest role must be 'train' or 'test', got '" + s + "'");
}

void CorpusManifest::validate(bool require_both_roles) const {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : entries) {
    if (e.speaker.empty() || e.sentence.empty() || e.path.empty()) {
      throw Error(ErrorKind::format, "manifest entry with empty path, speaker or sentence");
    }
    if (!seen.emplace(e.speaker, e.sentence).second) {
      throw Error(ErrorKind::format,
                  "duplicate manifest entry (" + e.speaker + ", " + e.sentence + ")");
    }
  }
  if (!require_both_roles) return;
  for (const auto& spk : speakers()) {
    bool train = false;
    bool test = false;
    for (const auto& e : entries) {
      if (e.speaker != spk) continue;
      train |= e.role == Role::train;
      test |= e.role == Role::test;
    }
    if (!train || !test) {
      throw Error(ErrorKind::format,
                  "speaker '" + spk + "' needs both train and test sentences");
    }
  }
}

std::vector<std::string> CorpusManifest::speakers() const {
  std::set<std::string> s;
  for (const auto& e : entries) s.insert(e.speaker);
  return {s.begin(), s.end()};
}

std::filesystem::path CorpusManifest::resolve(const ManifestEntry& entry) const {
  std::filesystem::path p(entry.path);
  return p.is_absolute() ? p : base_dir / p;
}

nlohmann::json to_json(const CorpusManifest& manifest) {
  auto doc = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json rec = {{"path", e.path},
                          {"speaker", e.speaker},
                          {"sentence", e.sentence},
                          {"role", to_string(e.role)}};
    if (e.rate != 0) rec["rate"] = e.rate;
    doc.push_back(std::move(rec));
  }
  return doc;
}

CorpusManifest manifest_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir) {
  if (!doc.is_array()) throw Error(ErrorKind::format, "manifest must be a JSON array");
  CorpusManifest m;
  m.base_dir = base_dir;
  for (const auto& rec : doc) {
    if (!rec.is_object()) throw Error(ErrorKind::format, "manifest records must be objects");
    ManifestEntry e;
    try {
      e.path = rec.at("path").get<std::string>();
      e.speaker = rec.at("speaker").get<std::string>();
      e.sentence = rec.at("sentence").get<std::string>();
      e.role = role_from_string(rec.at("role").get<std::string>());
      if (rec.contains("rate")) e.rate = rec.at("rate").get<int>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::format, std::string("bad manifest record: ") + ex.what());
    }
    m.entries.push_back(std::move(e));
  }
  m.validate(false);
  return m;
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_json_file(path), path.parent_path());
}

void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
  write_text_file(path, dump_json(to_json(manifest)));
}

Utterance load_utterance(const std::filesystem::path& path, const ManifestEntry& entry) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw Error(ErrorKind::io, "cannot open audio file '" + path.string() + "'");
  char magic[4] = {};
  probe.read(magic, 4);
  const bool is_riff = probe.gcount() == 4 && std::equal(magic, magic + 4, "RIFF");
  probe.close();

  int rate = 0;
  std::vector<std::int16_t> pcm;
  if (is_riff) {
    PcmAudio audio = read_wav(path);
    if (audio.channels != 1) {
      throw Error(ErrorKind::format, "'" + path.string() + "': expected mono, got " +
                                         std::to_string(audio.channels) + " channels");
    }
    rate = audio.sample_rate;
    pcm = std::move(audio.samples);
  } else {
    if (entry.rate == 0) {
      throw Error(ErrorKind::format,
                  "'" + path.string() + "': headerless PCM needs a 'rate' in the manifest");
    }
    rate = entry.rate;
    pcm = read_raw_pcm(path);
  }
  if (rate != 8000 && rate != 16000) {
    throw Error(ErrorKind::format, "'" + path.string() + "': unsupported sample rate " +
                                       std::to_string(rate) + " Hz (need 8000 or 16000)");
  }

  Utterance u;
  u.speaker_id = entry.speaker;
  u.sentence_id = entry.sentence;
  u.sample_rate = kTargetRate;
  u.samples = pcm_to_samples(pcm);
  if (rate == 16000) {
    if (u.samples.size() < decimation_filter().size()) {
      throw Error(ErrorKind::format, "'" + path.string() + "': too short to resample");
    }
    u.samples = resample_2to1(u.samples);
    for (double& s : u.samples) s = std::clamp(s, -1.0, 1.0);
  }
  const double dur = u.duration();
  if (dur < kMinDurationSeconds || dur > kMaxDurationSeconds) {
    throw Error(ErrorKind::format, "'" + path.string() + "': duration " + std::to_string(dur) +
                                       " s outside [0.5, 10] s");
  }
  return u;
}

std::vector<Utterance> load_corpus(const CorpusManifest& manifest, Role role,
                                   std::size_t threads) {
  std::vector<const ManifestEntry*> picked;
  for (const auto& e : manifest.entries) {
    if (e.role == role) picked.push_back(&e);
  }
  std::vector<Utterance> out(picked.size());
  parallel_for(picked.size(), threads, [&](std::size_t i) {
    out[i] = load_utterance(manifest.resolve(*picked[i]), *picked[i]);
  });
  return out;
}

std::span<const double> decimation_filter() {
  static const std::vector<double> taps = [] {
    constexpr int kTaps = 127;
    constexpr double kCutoff = 0.25;  // cycles per input sample: 4 kHz at 16 kHz
    constexpr int mid = (kTaps - 1) / 2;
    std::vector<double> h(kTaps);
    double sum = 0.0;
    for (int n = 0; n < kTaps; ++n) {
      const double t = n - mid;
      const double sinc =
          t == 0 ? 2.0 * kCutoff
                 : std::sin(2.0 * std::numbers::pi * kCutoff * t) / (std::numbers::pi * t);
      const double phase = 2.0 * std::numbers::pi * n / (kTaps - 1);
      const double blackman = 0.42 - 0.5 * std::cos(phase) + 0.08 * std::cos(2.0 * phase);
      h[n] = sinc * blackman;
      sum += h[n];
    }
    for (double& v : h) v /= sum;
    return h;
  }();
  return taps;
}

std::vector<double> resample_2to1(std::span<const double> x) {
  const auto h = decimation_filter();
  if (x.size() < h.size()) {
    throw Error(ErrorKind::invalid_argument,
                "resample_2to1: input shorter than the anti-alias filter (" +
                    std::to_string(h.size()) + " taps)");
  }
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto taps = static_cast<std::ptrdiff_t>(h.size());
  const std::ptrdiff_t mid = (taps - 1) / 2;
  std::vector<double> y(x.size() / 2);
  for (std::size_t m = 0; m < y.size(); ++m) {
    const std::ptrdiff_t centre = 2 * static_cast<std::ptrdiff_t>(m);
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < taps; ++k) {
      const std::ptrdiff_t idx = centre + mid - k;
      if (idx >= 0 && idx < n) acc += h[k] * x[idx];
    }
    y[m] = acc;
  }
  return y;
}

}  // namespace spkid
