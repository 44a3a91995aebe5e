#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkid/lpc.hpp"
#include "spkid/measures.hpp"
#include "spkid/neural_codebook.hpp"
#include "spkid/vq.hpp"

namespace spkid {

/// Everything needed to turn one speaker's training sentences into a model.
struct TrainingConfig {
  FrontendConfig frontend;
  std::vector<int> bits{4, 5, 6, 7};
  SplitMethod split = SplitMethod::hyperplane;
  VqOptions vq;
  bool neural = false;
  /// Each neural size is clustered by the linear codebook of the same size,
  /// so these must also appear in `bits`.
  std::vector<int> neural_bits{4, 5, 6};
  NeuralOptions neural_options;
  /// Lloyd iterations whose codebooks are kept; empty keeps all of them.
  std::vector<int> neural_snapshots;
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  void validate() const;
  bool keeps_snapshot(int iteration) const;
};

nlohmann::json to_json(const TrainingConfig& cfg);
TrainingConfig training_config_from_json(const nlohmann::json& j);

struct SpeakerModel {
  std::string speaker;
  std::vector<LinearCodebook> linear;
  std::vector<NeuralCodebook> neural;
  nlohmann::json config;
  std::uint64_t seed = 0;

  /// Throw Error(missing_model) when absent.
  const LinearCodebook& linear_codebook(int bits) const;
  const NeuralCodebook& neural_codebook(int bits, int iteration) const;
  bool has_linear(int bits) const;
  bool has_neural(int bits, int iteration) const;
};

/// Diagnostics gathered while training one speaker.
struct SpeakerTrainingTrace {
  std::map<int, VqTrace> vq;
  /// Per neural size: total residual MAD after each Lloyd iteration.
  std::map<int, std::vector<double>> neural_total_mad;
};

/// Seed of a speaker's training streams.
std::uint64_t speaker_seed(std::uint64_t global_seed, const std::string& speaker);

/// Pools the frames of all training sentences, trains one linear codebook per
/// configured size and, when enabled, the neural codebooks.
SpeakerModel train_speaker(const std::string& speaker, std::span<const UtteranceFeatures> train,
                           const TrainingConfig& cfg, SpeakerTrainingTrace* trace = nullptr);

/// Groups sentences by speaker and trains every speaker (in parallel when
/// cfg.threads allows). Models come back sorted by speaker label.
std::vector<SpeakerModel> train_speakers(std::span<const UtteranceFeatures> train,
                                         const TrainingConfig& cfg,
                                         std::vector<SpeakerTrainingTrace>* traces = nullptr);

// --- Model files -----------------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

nlohmann::json to_json(const SpeakerModel& model);
SpeakerModel model_from_json(const nlohmann::json& j);

/// Model restricted to one size: the linear codebook of `bits` and any neural
/// codebooks of that size.
SpeakerModel model_for_bits(const SpeakerModel& model, int bits);
/// Merges per-size models of the same speaker.
SpeakerModel merge_models(std::span<const SpeakerModel> parts);

std::string model_file_name(const std::string& speaker, int bits);
void write_model_file(const SpeakerModel& model, const std::filesystem::path& path);
SpeakerModel read_model_file(const std::filesystem::path& path);
/// Reads every `*.json` model in a directory and merges them per speaker.
std::vector<SpeakerModel> read_model_dir(const std::filesystem::path& dir);

// --- Identification --------------------------------------------------------

enum class Scheme {
  linear,           // VQ with one measure
  linear_combined,  // coefficient measure + alpha * linear residual measure
  s1,               // nonlinear codebook alone
  s2,               // LPCC preselection of K, then nonlinear MAD
  s3,               // LPCC preselection of K, then LPCC + alpha * nonlinear MAD
};

const char* to_string(Scheme s) noexcept;
Scheme scheme_from_string(const std::string& s);

struct SchemeSpec {
  Scheme scheme = Scheme::linear;
  MeasureKind measure = MeasureKind::m1;
  /// Residual term of linear_combined.
  MeasureKind residual_measure = MeasureKind::m3;
  std::size_t k = 2;
  double alpha = 0.0;
  int linear_bits = 5;
  int neural_bits = 4;
  int neural_iteration = 0;
};

nlohmann::json to_json(const SchemeSpec& spec);

struct SpeakerScore {
  std::string speaker;
  double score = 0.0;
};

/// Lowest score wins; equal scores go to the lexicographically smaller label.
std::size_t argmin_speaker(std::span<const SpeakerScore> scores);

/// Indices of the k best entries in winning order.
std::vector<std::size_t> preselect(std::span<const SpeakerScore> scores, std::size_t k);

struct IdentificationResult {
  std::string predicted;
  /// Scores of the speakers that took part in the final decision.
  std::vector<SpeakerScore> scores;
  /// Preselected speakers (schemes 2 and 3), in ranking order.
  std::vector<std::string> shortlist;
  Scheme scheme = Scheme::linear;
};

/// Counts MLP work: every (frame, net) residual evaluation and every speaker
/// whose neural codebook was run.
struct ScoringCounters {
  std::size_t mlp_frame_evaluations = 0;
  std::size_t neural_speakers = 0;
};

/// Sum over frames of the lowest MAD of any net.
double neural_total(const UtteranceFeatures& utterance, const NeuralCodebook& codebook,
                    ScoringCounters* counters = nullptr);

IdentificationResult identify_linear(const UtteranceFeatures& utterance,
                                     std::span<const SpeakerModel> models, int bits,
                                     MeasureKind measure, const FrontendConfig& cfg);

IdentificationResult identify_linear_combined(const UtteranceFeatures& utterance,
                                              std::span<const SpeakerModel> models, int bits,
                                              MeasureKind coefficient, MeasureKind residual,
                                              double alpha, const FrontendConfig& cfg);

IdentificationResult identify_scheme1(const UtteranceFeatures& utterance,
                                      std::span<const SpeakerModel> models, int neural_bits,
                                      int iteration, ScoringCounters* counters = nullptr);

IdentificationResult identify_scheme2(const UtteranceFeatures& utterance,
                                      std::span<const SpeakerModel> models, int linear_bits,
                                      int neural_bits, int iteration, std::size_t k,
                                      const FrontendConfig& cfg,
                                      ScoringCounters* counters = nullptr);

IdentificationResult identify_scheme3(const UtteranceFeatures& utterance,
                                      std::span<const SpeakerModel> models, int linear_bits,
                                      int neural_bits, int iteration, std::size_t k, double alpha,
                                      const FrontendConfig& cfg,
                                      ScoringCounters* counters = nullptr);

IdentificationResult identify(const UtteranceFeatures& utterance,
                              std::span<const SpeakerModel> models, const SchemeSpec& spec,
                              const FrontendConfig& cfg, ScoringCounters* counters = nullptr);

struct SentenceDecision {
  std::string sentence;
  std::string truth;
  IdentificationResult result;
};

struct EvaluationReport {
  SchemeSpec spec;
  std::vector<std::string> speakers;
  /// confusion[truth][predicted], indexed like `speakers`.
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t errors = 0;
  std::size_t total = 0;
  double error_rate = 0.0;  // percent
  std::vector<SentenceDecision> decisions;
};

/// Error rate = 100 * misidentified / total.
EvaluationReport summarize(const SchemeSpec& spec, std::vector<std::string> speakers,
                           std::vector<SentenceDecision> decisions);

EvaluationReport evaluate(std::span<const UtteranceFeatures> tests,
                          std::span<const SpeakerModel> models, const SchemeSpec& spec,
                          const FrontendConfig& cfg, ScoringCounters* counters = nullptr,
                          std::size_t threads = 0);

nlohmann::json to_json(const EvaluationReport& report);

}  // namespace spkid
