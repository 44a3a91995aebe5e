#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkid/recognition.hpp"

namespace spkid {

struct NeuralKey {
  int bits = 0;
  int iteration = 0;

  friend auto operator<=>(const NeuralKey&, const NeuralKey&) = default;
};

/// One test sentence scored against one speaker's models.
struct PairScores {
  std::string speaker;
  /// Accumulated totals of M1..M6 per linear codebook size.
  std::map<int, MeasureValues> linear;
  /// Accumulated lowest-net MAD per neural codebook.
  std::map<NeuralKey, double> neural;
};

struct SentenceScores {
  std::string sentence;
  std::string truth;
  std::size_t n_frames = 0;
  /// One entry per speaker, in ScoreTable::speakers order.
  std::vector<PairScores> models;
};

/// Every score an evaluation sweep needs, computed once. Decisions taken from
/// the table match the identify_* functions exactly.
struct ScoreTable {
  std::vector<std::string> speakers;
  std::vector<int> linear_bits;
  std::vector<NeuralKey> neural_keys;
  std::vector<SentenceScores> rows;
};

ScoreTable compute_score_table(std::span<const UtteranceFeatures> tests,
                               std::span<const SpeakerModel> models, const FrontendConfig& cfg,
                               std::vector<int> linear_bits, std::vector<NeuralKey> neural_keys,
                               std::size_t threads = 0, ScoringCounters* counters = nullptr);

/// Scheme decision for one row, using only stored totals. For S2 and S3 the
/// counters receive the MLP work the direct path would have done.
IdentificationResult decide_from_scores(const SentenceScores& row, const SchemeSpec& spec,
                                        ScoringCounters* counters = nullptr);

EvaluationReport evaluate_table(const ScoreTable& table, const SchemeSpec& spec,
                                ScoringCounters* counters = nullptr);

/// Alpha-search trials for a combined scheme (linear_combined or s3). For s3
/// only the preselected speakers compete.
std::vector<AlphaTrial> alpha_trials(const ScoreTable& table, const SchemeSpec& spec);

/// Held-out scores over the training sentences: fold f withholds the f-th
/// training sentence of every speaker, trains on the rest and scores the
/// withheld sentences. Every speaker needs at least two training sentences.
ScoreTable heldout_score_table(std::span<const UtteranceFeatures> train, const TrainingConfig& cfg,
                               std::vector<int> linear_bits, std::vector<NeuralKey> neural_keys);

nlohmann::json to_json(const ScoreTable& table);
ScoreTable score_table_from_json(const nlohmann::json& j);

/// Long format: one line per (sentence, speaker) with every stored total.
std::string score_table_csv(const ScoreTable& table);

}  // namespace spkid
