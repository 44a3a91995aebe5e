#include "spkid/recognition.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>

#include "spkid/error.hpp"
#include "spkid/parallel.hpp"
#include "spkid/rng.hpp"

namespace spkid {
namespace {

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::vector<int> json_ints(const nlohmann::json& j, const char* key) {
  std::vector<int> out;
  if (!j.is_array()) throw Error(ErrorKind::config, std::string(key) + " must be an array");
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      throw Error(ErrorKind::config, std::string(key) + " must hold integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

const SpeakerModel& model_of(std::span<const SpeakerModel> models, const std::string& speaker) {
  for (const auto& m : models) {
    if (m.speaker == speaker) return m;
  }
  throw Error(ErrorKind::missing_model, "no model for speaker '" + speaker + "'");
}

void require_models(std::span<const SpeakerModel> models) {
  if (models.empty()) throw Error(ErrorKind::invalid_argument, "identify: no speaker models");
}

std::vector<SpeakerScore> linear_scores(const UtteranceFeatures& u,
                                        std::span<const SpeakerModel> models, int bits,
                                        MeasureKind kind, const FrontendConfig& cfg) {
  std::vector<SpeakerScore> out;
  out.reserve(models.size());
  for (const auto& m : models) {
    out.push_back({m.speaker, score_sentence(u.frames, m.linear_codebook(bits), kind, cfg).total});
  }
  return out;
}

IdentificationResult decide(std::vector<SpeakerScore> scores, Scheme scheme) {
  IdentificationResult r;
  r.scheme = scheme;
  r.predicted = scores[argmin_speaker(scores)].speaker;
  r.scores = std::move(scores);
  return r;
}

void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) {
    throw Error(ErrorKind::invalid_argument,
                "K must be in 1.." + std::to_string(n) + ", got " + std::to_string(k));
  }
}

}  // namespace

// --- Configuration ---------------------------------------------------------

void TrainingConfig::validate() const {
  frontend.validate();
  if (bits.empty()) throw Error(ErrorKind::config, "codebook_bits must not be empty");
  for (int b : bits) {
    if (b < 1 || b > 10) {
      throw Error(ErrorKind::config, "codebook bits must be in 1..10, got " + std::to_string(b));
    }
  }
  if (!(vq.epsilon > 0.0)) throw Error(ErrorKind::config, "vq.epsilon must be > 0");
  if (!(vq.tolerance >= 0.0)) throw Error(ErrorKind::config, "vq.tolerance must be >= 0");
  if (vq.max_iterations < 1) throw Error(ErrorKind::config, "vq.max_iterations must be >= 1");
  if (!neural) return;
  if (frontend.lpc_order < kMlpInputs) {
    throw Error(ErrorKind::config, "the neural stage needs lpc_order >= 10 history samples");
  }
  if (neural_bits.empty()) throw Error(ErrorKind::config, "neural.bits must not be empty");
  for (int b : neural_bits) {
    if (!contains(bits, b)) {
      throw Error(ErrorKind::config, "neural bits " + std::to_string(b) +
                                         " has no linear codebook of the same size");
    }
  }
  if (neural_options.iterations < 0) throw Error(ErrorKind::config, "neural.iterations < 0");
  if (neural_options.multistart.random_starts < 1) {
    throw Error(ErrorKind::config, "neural.random_starts must be >= 1");
  }
  if (neural_options.multistart.lm.epochs < 0) throw Error(ErrorKind::config, "neural.epochs < 0");
  for (int s : neural_snapshots) {
    if (s < 0 || s > neural_options.iterations) {
      throw Error(ErrorKind::config, "neural snapshot " + std::to_string(s) + " out of range");
    }
  }
}

bool TrainingConfig::keeps_snapshot(int iteration) const {
  return neural_snapshots.empty() || contains(neural_snapshots, iteration);
}

nlohmann::json to_json(const TrainingConfig& cfg) {
  return {
      {"frontend", to_json(cfg.frontend)},
      {"codebook_bits", cfg.bits},
      {"split_method", to_string(cfg.split)},
      {"vq",
       {{"epsilon", cfg.vq.epsilon},
        {"tolerance", cfg.vq.tolerance},
        {"max_iterations", cfg.vq.max_iterations}}},
      {"neural",
       {{"enabled", cfg.neural},
        {"bits", cfg.neural_bits},
        {"iterations", cfg.neural_options.iterations},
        {"snapshots", cfg.neural_snapshots},
        {"epochs", cfg.neural_options.multistart.lm.epochs},
        {"random_starts", cfg.neural_options.multistart.random_starts},
        {"max_frames_per_cluster", cfg.neural_options.max_frames_per_cluster}}},
      {"seed", cfg.seed},
  };
}

TrainingConfig training_config_from_json(const nlohmann::json& j) {
  TrainingConfig cfg;
  if (!j.is_object()) throw Error(ErrorKind::config, "training config must be an object");
  try {
    if (j.contains("frontend")) cfg.frontend = frontend_from_json(j.at("frontend"));
    if (j.contains("codebook_bits")) cfg.bits = json_ints(j.at("codebook_bits"), "codebook_bits");
    if (j.contains("split_method")) {
      cfg.split = split_method_from_string(j.at("split_method").get<std::string>());
    }
    if (j.contains("vq")) {
      const auto& v = j.at("vq");
      cfg.vq.epsilon = v.value("epsilon", cfg.vq.epsilon);
      cfg.vq.tolerance = v.value("tolerance", cfg.vq.tolerance);
      cfg.vq.max_iterations = v.value("max_iterations", cfg.vq.max_iterations);
    }
    if (j.contains("neural")) {
      const auto& n = j.at("neural");
      cfg.neural = n.value("enabled", cfg.neural);
      if (n.contains("bits")) cfg.neural_bits = json_ints(n.at("bits"), "neural.bits");
      cfg.neural_options.iterations = n.value("iterations", cfg.neural_options.iterations);
      if (n.contains("snapshots")) {
        cfg.neural_snapshots = json_ints(n.at("snapshots"), "neural.snapshots");
      }
      cfg.neural_options.multistart.lm.epochs =
          n.value("epochs", cfg.neural_options.multistart.lm.epochs);
      cfg.neural_options.multistart.random_starts =
          n.value("random_starts", cfg.neural_options.multistart.random_starts);
      cfg.neural_options.max_frames_per_cluster =
          n.value("max_frames_per_cluster", cfg.neural_options.max_frames_per_cluster);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("training config: ") + e.what());
  }
  return cfg;
}

// --- Models ----------------------------------------------------------------

const LinearCodebook& SpeakerModel::linear_codebook(int bits) const {
  for (const auto& cb : linear) {
    if (cb.bits == bits) return cb;
  }
  throw Error(ErrorKind::missing_model, "speaker '" + speaker + "' has no " +
                                            std::to_string(bits) + "-bit linear codebook");
}

const NeuralCodebook& SpeakerModel::neural_codebook(int bits, int iteration) const {
  for (const auto& cb : neural) {
    if (cb.bits == bits && cb.lloyd_iteration == iteration) return cb;
  }
  throw Error(ErrorKind::missing_model,
              "speaker '" + speaker + "' has no " + std::to_string(bits) +
                  "-bit neural codebook at iteration " + std::to_string(iteration));
}

bool SpeakerModel::has_linear(int bits) const {
  return std::any_of(linear.begin(), linear.end(), [&](const auto& cb) { return cb.bits == bits; });
}

bool SpeakerModel::has_neural(int bits, int iteration) const {
  return std::any_of(neural.begin(), neural.end(), [&](const auto& cb) {
    return cb.bits == bits && cb.lloyd_iteration == iteration;
  });
}

std::uint64_t speaker_seed(std::uint64_t global_seed, const std::string& speaker) {
  return derive_seed(global_seed, {hash_label(speaker)});
}

SpeakerModel train_speaker(const std::string& speaker, std::span<const UtteranceFeatures> train,
                           const TrainingConfig& cfg, SpeakerTrainingTrace* trace) {
  cfg.validate();
  if (train.empty()) {
    throw Error(ErrorKind::insufficient_data, "speaker '" + speaker + "' has no training sentences");
  }
  std::vector<FrameFeatures> frames;
  for (const auto& u : train) frames.insert(frames.end(), u.frames.begin(), u.frames.end());
  std::vector<Vec> lpcc;
  std::vector<Vec> lpc;
  lpcc.reserve(frames.size());
  lpc.reserve(frames.size());
  for (const auto& f : frames) {
    lpcc.push_back(f.lpcc);
    lpc.push_back(f.lpc.a);
  }

  SpeakerModel model;
  model.speaker = speaker;
  model.config = to_json(cfg);
  model.seed = speaker_seed(cfg.seed, speaker);

  std::vector<int> sizes = cfg.bits;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (int b : sizes) {
    if (frames.size() < (std::size_t{1} << b)) {
      throw Error(ErrorKind::insufficient_data,
                  "speaker '" + speaker + "' has " + std::to_string(frames.size()) +
                      " training frames, fewer than the " + std::to_string(1 << b) +
                      " codewords of a " + std::to_string(b) + "-bit codebook");
    }
    VqTrace* vt = trace ? &trace->vq[b] : nullptr;
    model.linear.push_back(train_codebook(lpcc, lpc, b, cfg.split, cfg.vq, vt));
  }

  if (cfg.neural) {
    std::vector<int> nbits = cfg.neural_bits;
    std::sort(nbits.begin(), nbits.end());
    nbits.erase(std::unique(nbits.begin(), nbits.end()), nbits.end());
    for (int b : nbits) {
      NeuralBuild build = build_neural_codebook(frames, model.linear_codebook(b),
                                                derive_seed(model.seed, {static_cast<std::uint64_t>(b)}),
                                                cfg.neural_options);
      if (trace) trace->neural_total_mad[b] = build.total_mad;
      for (auto& cb : build.iterations) {
        if (cfg.keeps_snapshot(cb.lloyd_iteration)) model.neural.push_back(std::move(cb));
      }
    }
  }
  return model;
}

std::vector<SpeakerModel> train_speakers(std::span<const UtteranceFeatures> train,
                                         const TrainingConfig& cfg,
                                         std::vector<SpeakerTrainingTrace>* traces) {
  cfg.validate();
  std::map<std::string, std::vector<UtteranceFeatures>> by_speaker;
  for (const auto& u : train) by_speaker[u.speaker].push_back(u);
  std::vector<std::string> speakers;
  for (const auto& [s, _] : by_speaker) speakers.push_back(s);

  std::vector<SpeakerModel> models(speakers.size());
  std::vector<SpeakerTrainingTrace> local(speakers.size());
  parallel_for(speakers.size(), cfg.threads, [&](std::size_t i) {
    models[i] = train_speaker(speakers[i], by_speaker.at(speakers[i]), cfg,
                              traces ? &local[i] : nullptr);
  });
  if (traces) *traces = std::move(local);
  return models;
}

// --- Identification --------------------------------------------------------

const char* to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::linear: return "linear";
    case Scheme::linear_combined: return "linear_combined";
    case Scheme::s1: return "s1";
    case Scheme::s2: return "s2";
    case Scheme::s3: return "s3";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "linear" || t == "l") return Scheme::linear;
  if (t == "linear_combined" || t == "lc") return Scheme::linear_combined;
  if (t == "s1") return Scheme::s1;
  if (t == "s2") return Scheme::s2;
  if (t == "s3") return Scheme::s3;
  throw Error(ErrorKind::config, "unknown scheme '" + s + "'");
}

nlohmann::json to_json(const SchemeSpec& spec) {
  return {
      {"scheme", to_string(spec.scheme)},
      {"measure", measure_number(spec.measure)},
      {"residual_measure", measure_number(spec.residual_measure)},
      {"k", spec.k},
      {"alpha", spec.alpha},
      {"linear_bits", spec.linear_bits},
      {"neural_bits", spec.neural_bits},
      {"neural_iteration", spec.neural_iteration},
  };
}

std::size_t argmin_speaker(std::span<const SpeakerScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::invalid_argument, "argmin over no speakers");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.score < b.score || (a.score == b.score && a.speaker < b.speaker)) best = i;
  }
  return best;
}

std::vector<std::size_t> preselect(std::span<const SpeakerScore> scores, std::size_t k) {
  check_k(k, scores.size());
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].score != scores[b].score) return scores[a].score < scores[b].score;
    return scores[a].speaker < scores[b].speaker;
  });
  order.resize(k);
  return order;
}

double neural_total(const UtteranceFeatures& u, const NeuralCodebook& codebook,
                    ScoringCounters* counters) {
  if (codebook.nets.empty()) throw Error(ErrorKind::invalid_argument, "empty neural codebook");
  if (u.frames.empty()) throw Error(ErrorKind::invalid_argument, "neural scoring: no frames");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(u.frames.size(), inf);
  const bool whole = !u.signal.empty();
  for (const auto& net : codebook.nets) {
    if (whole) {
      const auto e = signal_mlp_residual(u.signal, net);
      for (std::size_t f = 0; f < u.frames.size(); ++f) {
        const auto& fr = u.frames[f].frame;
        best[f] = std::min(best[f], slice_mad(e, fr.offset, fr.samples.size()));
      }
    } else {
      for (std::size_t f = 0; f < u.frames.size(); ++f) {
        best[f] = std::min(best[f], mlp_residual_mad(u.frames[f].frame, net));
      }
    }
  }
  if (counters) {
    counters->mlp_frame_evaluations += u.frames.size() * codebook.nets.size();
    ++counters->neural_speakers;
  }
  double total = 0.0;
  for (double b : best) total += b;
  return total;
}

IdentificationResult identify_linear(const UtteranceFeatures& u,
                                     std::span<const SpeakerModel> models, int bits,
                                     MeasureKind measure, const FrontendConfig& cfg) {
  require_models(models);
  return decide(linear_scores(u, models, bits, measure, cfg), Scheme::linear);
}

IdentificationResult identify_linear_combined(const UtteranceFeatures& u,
                                              std::span<const SpeakerModel> models, int bits,
                                              MeasureKind coefficient, MeasureKind residual,
                                              double alpha, const FrontendConfig& cfg) {
  require_models(models);
  auto coeff = linear_scores(u, models, bits, coefficient, cfg);
  const auto res = linear_scores(u, models, bits, residual, cfg);
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    coeff[i].score = combine_totals(coeff[i].score, res[i].score, alpha);
  }
  return decide(std::move(coeff), Scheme::linear_combined);
}

IdentificationResult identify_scheme1(const UtteranceFeatures& u,
                                      std::span<const SpeakerModel> models, int neural_bits,
                                      int iteration, ScoringCounters* counters) {
  require_models(models);
  std::vector<SpeakerScore> scores;
  for (const auto& m : models) {
    scores.push_back({m.speaker, neural_total(u, m.neural_codebook(neural_bits, iteration), counters)});
  }
  return decide(std::move(scores), Scheme::s1);
}

namespace {

IdentificationResult preselected(const UtteranceFeatures& u, std::span<const SpeakerModel> models,
                                 int linear_bits, int neural_bits, int iteration, std::size_t k,
                                 std::optional<double> alpha, const FrontendConfig& cfg,
                                 ScoringCounters* counters) {
  require_models(models);
  check_k(k, models.size());
  const auto lpcc = linear_scores(u, models, linear_bits, MeasureKind::m1, cfg);
  const auto shortlist = preselect(lpcc, k);
  std::vector<SpeakerScore> scores;
  std::vector<std::string> names;
  for (std::size_t i : shortlist) {
    const auto& m = models[i];
    const double nt = neural_total(u, m.neural_codebook(neural_bits, iteration), counters);
    const double s = alpha ? combine_totals(lpcc[i].score, nt, *alpha) : nt;
    scores.push_back({m.speaker, s});
    names.push_back(m.speaker);
  }
  auto r = decide(std::move(scores), alpha ? Scheme::s3 : Scheme::s2);
  r.shortlist = std::move(names);
  return r;
}

}  // namespace

IdentificationResult identify_scheme2(const UtteranceFeatures& u,
                                      std::span<const SpeakerModel> models, int linear_bits,
                                      int neural_bits, int iteration, std::size_t k,
                                      const FrontendConfig& cfg, ScoringCounters* counters) {
  return preselected(u, models, linear_bits, neural_bits, iteration, k, std::nullopt, cfg,
                     counters);
}

IdentificationResult identify_scheme3(const UtteranceFeatures& u,
                                      std::span<const SpeakerModel> models, int linear_bits,
                                      int neural_bits, int iteration, std::size_t k, double alpha,
                                      const FrontendConfig& cfg, ScoringCounters* counters) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::invalid_argument, "alpha must be >= 0");
  return preselected(u, models, linear_bits, neural_bits, iteration, k, alpha, cfg, counters);
}

IdentificationResult identify(const UtteranceFeatures& u, std::span<const SpeakerModel> models,
                              const SchemeSpec& spec, const FrontendConfig& cfg,
                              ScoringCounters* counters) {
  switch (spec.scheme) {
    case Scheme::linear:
      return identify_linear(u, models, spec.linear_bits, spec.measure, cfg);
    case Scheme::linear_combined:
      return identify_linear_combined(u, models, spec.linear_bits, spec.measure,
                                      spec.residual_measure, spec.alpha, cfg);
    case Scheme::s1:
      return identify_scheme1(u, models, spec.neural_bits, spec.neural_iteration, counters);
    case Scheme::s2:
      return identify_scheme2(u, models, spec.linear_bits, spec.neural_bits,
                              spec.neural_iteration, spec.k, cfg, counters);
    case Scheme::s3:
      return identify_scheme3(u, models, spec.linear_bits, spec.neural_bits,
                              spec.neural_iteration, spec.k, spec.alpha, cfg, counters);
  }
  throw Error(ErrorKind::invalid_argument, "unknown scheme");
}

EvaluationReport summarize(const SchemeSpec& spec, std::vector<std::string> speakers,
                           std::vector<SentenceDecision> decisions) {
  if (decisions.empty()) throw Error(ErrorKind::invalid_argument, "evaluate: empty test set");
  std::sort(speakers.begin(), speakers.end());
  auto index_of = [&](const std::string& s) {
    const auto it = std::lower_bound(speakers.begin(), speakers.end(), s);
    if (it == speakers.end() || *it != s) {
      throw Error(ErrorKind::missing_model, "no model for speaker '" + s + "'");
    }
    return static_cast<std::size_t>(it - speakers.begin());
  };
  EvaluationReport r;
  r.spec = spec;
  r.confusion.assign(speakers.size(), std::vector<std::size_t>(speakers.size(), 0));
  for (const auto& d : decisions) {
    ++r.confusion[index_of(d.truth)][index_of(d.result.predicted)];
    if (d.truth != d.result.predicted) ++r.errors;
  }
  r.total = decisions.size();
  r.error_rate = 100.0 * static_cast<double>(r.errors) / static_cast<double>(r.total);
  r.speakers = std::move(speakers);
  r.decisions = std::move(decisions);
  return r;
}

EvaluationReport evaluate(std::span<const UtteranceFeatures> tests,
                          std::span<const SpeakerModel> models, const SchemeSpec& spec,
                          const FrontendConfig& cfg, ScoringCounters* counters,
                          std::size_t threads) {
  if (tests.empty()) throw Error(ErrorKind::invalid_argument, "evaluate: empty test set");
  require_models(models);
  for (const auto& t : tests) model_of(models, t.speaker);

  std::vector<SentenceDecision> decisions(tests.size());
  std::vector<ScoringCounters> local(tests.size());
  parallel_for(tests.size(), threads, [&](std::size_t i) {
    decisions[i] = {tests[i].sentence, tests[i].speaker,
                    identify(tests[i], models, spec, cfg, &local[i])};
  });
  if (counters) {
    for (const auto& c : local) {
      counters->mlp_frame_evaluations += c.mlp_frame_evaluations;
      counters->neural_speakers += c.neural_speakers;
    }
  }
  std::vector<std::string> speakers;
  for (const auto& m : models) speakers.push_back(m.speaker);
  return summarize(spec, std::move(speakers), std::move(decisions));
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json decisions = nlohmann::json::array();
  for (const auto& d : r.decisions) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : d.result.scores) scores.push_back({{"speaker", s.speaker}, {"score", s.score}});
    nlohmann::json entry = {{"sentence", d.sentence},
                            {"truth", d.truth},
                            {"predicted", d.result.predicted},
                            {"scores", scores}};
    if (!d.result.shortlist.empty()) entry["shortlist"] = d.result.shortlist;
    decisions.push_back(std::move(entry));
  }
  return {
      {"spec", to_json(r.spec)},
      {"speakers", r.speakers},
      {"confusion", r.confusion},
      {"errors", r.errors},
      {"total", r.total},
      {"error_rate", r.error_rate},
      {"decisions", decisions},
  };
}

}  // namespace spkid
