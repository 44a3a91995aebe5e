#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace spkid {

/// Sample rate every utterance carries after ingestion.
inline constexpr int kTargetRate = 8000;
inline constexpr double kMinDurationSeconds = 0.5;
inline constexpr double kMaxDurationSeconds = 10.0;

/// One spoken sentence at 8 kHz with samples in [-1, 1].
struct Utterance {
  std::string speaker_id;
  std::string sentence_id;
  int sample_rate = kTargetRate;
  std::vector<double> samples;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

enum class Role { train, test };

const char* to_string(Role role) noexcept;
Role role_from_string(const std::string& s);

/// Manifest record. `rate` is only consulted for headerless raw PCM files.
struct ManifestEntry {
  std::string path;
  std::string speaker;
  std::string sentence;
  Role role = Role::train;
  int rate = 0;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  /// Relative entry paths resolve against this directory.
  std::filesystem::path base_dir;

  /// Checks (speaker, sentence) uniqueness and, when `require_both_roles`,
  /// that every speaker has at least one train and one test sentence.
  void validate(bool require_both_roles) const;

  /// Sorted, de-duplicated speaker labels.
  std::vector<std::string> speakers() const;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

nlohmann::json to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir);
CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

// --- PCM / WAV -------------------------------------------------------------

struct PcmAudio {
  int sample_rate = 0;
  int channels = 0;
  std::vector<std::int16_t> samples;
};

/// Parses a RIFF/WAVE file holding 16-bit linear PCM.
PcmAudio read_wav(const std::filesystem::path& path);
PcmAudio parse_wav(std::span<const std::uint8_t> bytes, const std::string& origin);
void write_wav(const std::filesystem::path& path, std::span<const std::int16_t> samples,
               int sample_rate);
/// Headerless little-endian 16-bit PCM.
std::vector<std::int16_t> read_raw_pcm(const std::filesystem::path& path);

/// value / 32768.
std::vector<double> pcm_to_samples(std::span<const std::int16_t> pcm);
/// Rounds to the nearest 16-bit code, saturating.
std::vector<std::int16_t> samples_to_pcm(std::span<const double> samples);

/// Reads one manifest entry from `path`, scales to [-1, 1] and brings it to
/// 8 kHz. Accepts mono 16-bit WAV or raw PCM at 8 or 16 kHz.
Utterance load_utterance(const std::filesystem::path& path, const ManifestEntry& entry);

/// Loads every entry with the given role, in manifest order.
std::vector<Utterance> load_corpus(const CorpusManifest& manifest, Role role,
                                   std::size_t threads = 0);

// --- Decimation ------------------------------------------------------------

/// Windowed-sinc (Blackman) half-band anti-alias filter used by resample_2to1.
/// Linear phase, odd length, unity DC gain, cutoff at a quarter of the input
/// rate.
std::span<const double> decimation_filter();

/// 16 kHz -> 8 kHz: anti-alias FIR then keep every other sample. Output
/// length is floor(n/2); the filter is centred so output sample m aligns with
/// input sample 2m.
std::vector<double> resample_2to1(std::span<const double> x);

// --- Synthetic corpus ------------------------------------------------------

struct SynthOptions {
  int train_sentences = 5;
  int test_sentences = 5;
  double min_seconds = 1.0;
  double max_seconds = 2.0;
  double pole_radius_min = 0.75;
  double pole_radius_max = 0.95;
};

/// Ground truth for one generated speaker.
struct SyntheticSpeaker {
  std::string id;
  /// Order-10 predictor coefficients a[1..10] of the all-pole vocal tract.
  std::vector<double> lpc;
  std::vector<double> pole_radii;
  std::vector<double> pole_angles;
  int pitch_period = 0;
  double voicing = 0.0;
};

struct SyntheticCorpus {
  CorpusManifest manifest;
  /// Same order as manifest.entries. Samples are exact multiples of 1/32768,
  /// so a write/load cycle through WAV reproduces them bit for bit.
  std::vector<Utterance> utterances;
  std::vector<SyntheticSpeaker> speakers;

  std::vector<Utterance> with_role(Role role) const;
};

/// Speakers are distinct stable all-pole filters driven by a mix of white
/// noise and a periodic pulse train. Deterministic in `seed`.
SyntheticCorpus generate_synthetic_corpus(int n_speakers, std::uint64_t seed,
                                          const SynthOptions& options = {});

/// Writes `<dir>/<speaker>/<sentence>.wav` files plus `<dir>/manifest.json`.
void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace spkid
