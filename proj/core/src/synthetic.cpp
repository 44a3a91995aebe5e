#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "spkid/corpus.hpp"
#include "spkid/error.hpp"
#include "spkid/rng.hpp"

namespace spkid {
namespace {

constexpr int kPolePairs = 5;  // order-10 all-pole filter
constexpr double kMinAngle = 0.06 * std::numbers::pi;
constexpr double kMaxAngle = 0.94 * std::numbers::pi;
constexpr double kMinPoleGap = 0.06 * std::numbers::pi;
constexpr double kMinSpeakerDistance = 0.35;  // L1 over sorted pole angles, radians
constexpr int kWarmup = 200;

/// Predictor coefficients a[1..2K] of prod_k (1 - 2 r cos(w) z^-1 + r^2 z^-2).
std::vector<double> poles_to_lpc(const std::vector<double>& radii,
                                 const std::vector<double>& angles) {
  std::vector<double> poly{1.0};
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double c1 = -2.0 * radii[k] * std::cos(angles[k]);
    const double c2 = radii[k] * radii[k];
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] += c1 * poly[i];
      next[i + 2] += c2 * poly[i];
    }
    poly = std::move(next);
  }
  std::vector<double> a(poly.size() - 1);
  for (std::size_t i = 1; i < poly.size(); ++i) a[i - 1] = -poly[i];
  return a;
}

std::string label(const char* prefix, int index, int count) {
  const int width = count >= 100 ? 3 : 2;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, index + 1);
  return buf;
}

SyntheticSpeaker draw_speaker(std::mt19937_64& rng, const SynthOptions& opt,
                              const std::vector<SyntheticSpeaker>& existing) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<double> angles(kPolePairs);
    for (double& w : angles) w = uniform(rng, kMinAngle, kMaxAngle);
    std::sort(angles.begin(), angles.end());
    bool spread = true;
    for (int k = 1; k < kPolePairs; ++k) spread &= angles[k] - angles[k - 1] >= kMinPoleGap;
    if (!spread) continue;

    bool distinct = true;
    for (const auto& other : existing) {
      double d = 0.0;
      for (int k = 0; k < kPolePairs; ++k) d += std::abs(angles[k] - other.pole_angles[k]);
      distinct &= d >= kMinSpeakerDistance;
    }
    if (!distinct) continue;

    SyntheticSpeaker spk;
    spk.pole_angles = angles;
    spk.pole_radii.resize(kPolePairs);
    for (double& r : spk.pole_radii) r = uniform(rng, opt.pole_radius_min, opt.pole_radius_max);
    spk.lpc = poles_to_lpc(spk.pole_radii, spk.pole_angles);
    spk.pitch_period = uniform_int(rng, 32, 100);
    spk.voicing = uniform(rng, 0.3, 0.7);
    return spk;
  }
  throw Error(ErrorKind::invalid_argument,
              "synthetic corpus: could not place distinct speakers; too many requested");
}

std::vector<double> render_sentence(const SyntheticSpeaker& spk, std::mt19937_64& rng,
                                    const SynthOptions& opt) {
  const auto length = static_cast<std::size_t>(
      std::lround(uniform(rng, opt.min_seconds, opt.max_seconds) * kTargetRate));

  // Small per-sentence variation so test sentences never replay training data.
  std::vector<double> angles = spk.pole_angles;
  for (double& w : angles) w *= 1.0 + uniform(rng, -0.01, 0.01);
  const std::vector<double> a = poles_to_lpc(spk.pole_radii, angles);
  const int period = std::max(
      20, static_cast<int>(std::lround(spk.pitch_period * (1.0 + uniform(rng, -0.05, 0.05)))));
  const int phase = uniform_int(rng, 0, period - 1);

  const double pulse_gain = std::sqrt(spk.voicing * period);
  const double noise_gain = std::sqrt(1.0 - spk.voicing);
  const std::size_t total = length + kWarmup;
  std::vector<double> y(total, 0.0);
  for (std::size_t n = 0; n < total; ++n) {
    double v = noise_gain * standard_normal(rng);
    if ((static_cast<int>(n) + phase) % period == 0) v += pulse_gain;
    for (std::size_t k = 1; k <= a.size() && k <= n; ++k) v += a[k - 1] * y[n - k];
    y[n] = v;
  }
  y.erase(y.begin(), y.begin() + kWarmup);

  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  const double target = uniform(rng, 0.5, 0.9);
  const double scale = peak > 0.0 ? target / peak : 0.0;
  for (double& v : y) v *= scale;
  return pcm_to_samples(samples_to_pcm(y));
}

}  // namespace

std::vector<Utterance> SyntheticCorpus::with_role(Role role) const {
  std::vector<Utterance> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].role == role) out.push_back(utterances[i]);
  }
  return out;
}

SyntheticCorpus generate_synthetic_corpus(int n_speakers, std::uint64_t seed,
                                          const SynthOptions& options) {
  if (n_speakers < 2) {
    throw Error(ErrorKind::invalid_argument, "synthetic corpus needs at least 2 speakers");
  }
  if (options.train_sentences < 1 || options.test_sentences < 0) {
    throw Error(ErrorKind::invalid_argument, "synthetic corpus: bad sentence counts");
  }
  if (options.min_seconds < kMinDurationSeconds || options.max_seconds > kMaxDurationSeconds ||
      options.min_seconds > options.max_seconds) {
    throw Error(ErrorKind::invalid_argument, "synthetic corpus: bad sentence duration range");
  }
  if (!(options.pole_radius_min > 0.0 && options.pole_radius_min <= options.pole_radius_max &&
        options.pole_radius_max <= 0.95)) {
    throw Error(ErrorKind::invalid_argument, "synthetic corpus: pole radii must lie in (0, 0.95]");
  }

  SyntheticCorpus corpus;
  std::mt19937_64 speaker_rng(derive_seed(seed, {0x5350ull}));
  const int sentences = options.train_sentences + options.test_sentences;
  for (int s = 0; s < n_speakers; ++s) {
    SyntheticSpeaker spk = draw_speaker(speaker_rng, options, corpus.speakers);
    spk.id = label("spk", s, n_speakers);
    for (int j = 0; j < sentences; ++j) {
      std::mt19937_64 rng(derive_seed(seed, {0x5345ull, static_cast<std::uint64_t>(s),
                                             static_cast<std::uint64_t>(j)}));
      Utterance u;
      u.speaker_id = spk.id;
      u.sentence_id = label("s", j, sentences);
      u.samples = render_sentence(spk, rng, options);

      ManifestEntry e;
      e.speaker = u.speaker_id;
      e.sentence = u.sentence_id;
      e.path = spk.id + "/" + u.sentence_id + ".wav";
      e.role = j < options.train_sentences ? Role::train : Role::test;
      corpus.manifest.entries.push_back(std::move(e));
      corpus.utterances.push_back(std::move(u));
    }
    corpus.speakers.push_back(std::move(spk));
  }
  return corpus;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    const auto path = dir / corpus.manifest.entries[i].path;
    std::filesystem::create_directories(path.parent_path());
    write_wav(path, samples_to_pcm(corpus.utterances[i].samples), kTargetRate);
  }
  CorpusManifest m = corpus.manifest;
  m.base_dir = dir;
  write_manifest(m, dir / "manifest.json");
}

}  // namespace spkid
