#pragma once

// Small trained system shared by the recognition tests. Built once per
// process.

#include <cmath>
#include <numbers>
#include <vector>

#include "spkid/corpus.hpp"
#include "spkid/lpc.hpp"
#include "spkid/recognition.hpp"

namespace fixture {

struct System {
  spkid::SyntheticCorpus corpus;
  spkid::TrainingConfig cfg;
  std::vector<spkid::UtteranceFeatures> train;
  std::vector<spkid::UtteranceFeatures> test;
  std::vector<spkid::SpeakerModel> models;
};

inline spkid::TrainingConfig quick_config() {
  spkid::TrainingConfig cfg;
  cfg.bits = {3, 4};
  cfg.neural = true;
  cfg.neural_bits = {3};
  cfg.neural_options.iterations = 1;
  cfg.neural_options.multistart.random_starts = 2;
  cfg.neural_options.multistart.lm.epochs = 3;
  cfg.neural_options.max_frames_per_cluster = 6;
  cfg.seed = 11;
  return cfg;
}

inline const System& small_system() {
  static const System sys = [] {
    System s;
    spkid::SynthOptions opt;
    opt.train_sentences = 3;
    opt.test_sentences = 3;
    s.corpus = spkid::generate_synthetic_corpus(6, 21, opt);
    s.cfg = quick_config();
    const auto train = s.corpus.with_role(spkid::Role::train);
    const auto test = s.corpus.with_role(spkid::Role::test);
    s.train = spkid::analyze_utterances(train, s.cfg.frontend);
    s.test = spkid::analyze_utterances(test, s.cfg.frontend);
    s.models = spkid::train_speakers(s.train, s.cfg);
    return s;
  }();
  return sys;
}

/// Low-amplitude periodic utterance whose period divides the hop, so every
/// frame carries the same LPCC vector.
inline spkid::UtteranceFeatures periodic_utterance(const std::string& speaker) {
  spkid::Utterance u;
  u.speaker_id = speaker;
  u.sentence_id = "planted";
  for (int n = 0; n < 2000; ++n) {
    const double t = 2.0 * std::numbers::pi * n / 40.0;
    u.samples.push_back(0.01 * (std::sin(t) + 0.5 * std::sin(3.0 * t + 0.3)));
  }
  spkid::FrontendConfig cfg;
  cfg.preemphasis = 0.0;
  return spkid::analyze_utterance(u, cfg);
}

/// Speaker whose single-size linear codebook sits `offset` away from the
/// utterance's LPCC in every dimension (so M1 = offset^2 per frame) and
/// whose nets all predict the constant `level` (so the MAD per frame is
/// about |level| when the signal is small).
inline spkid::SpeakerModel planted_model(const std::string& speaker,
                                         const spkid::UtteranceFeatures& utt, double m1_per_frame,
                                         double level, int bits = 2) {
  spkid::SpeakerModel m;
  m.speaker = speaker;
  spkid::LinearCodebook cb;
  cb.bits = bits;
  spkid::Codeword cw;
  cw.lpcc = utt.frames[1].lpcc;
  for (double& c : cw.lpcc) c += std::sqrt(m1_per_frame);
  cw.lpc = utt.frames[1].lpc.a;
  cw.population = 1;
  cb.codewords.assign(std::size_t{1} << bits, cw);
  m.linear.push_back(cb);
  spkid::NeuralCodebook nn;
  nn.bits = bits;
  nn.source_bits = bits;
  spkid::MlpPredictor net;
  net.params[spkid::MlpPredictor::kB3] = level;
  nn.nets.assign(std::size_t{1} << bits, net);
  m.neural.push_back(nn);
  return m;
}

}  // namespace fixture
