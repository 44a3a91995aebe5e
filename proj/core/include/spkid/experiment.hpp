#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spkid/corpus.hpp"
#include "spkid/recognition.hpp"
#include "spkid/score_table.hpp"

namespace spkid {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "SPKID_OUTPUT_DIR";

/// One experiment sweep. `training` carries the frontend, codebook sizes,
/// split rule, neural settings, seed and thread count.
struct ExperimentConfig {
  TrainingConfig training;
  std::vector<MeasureKind> measures{kAllMeasures.begin(), kAllMeasures.end()};
  /// (coefficient measure, residual measure) pairs fused additively.
  std::vector<std::pair<MeasureKind, MeasureKind>> combinations{
      {MeasureKind::m2, MeasureKind::m3}, {MeasureKind::m2, MeasureKind::m4}};
  /// Neural schemes to evaluate (s1, s2, s3).
  std::vector<Scheme> schemes;
  std::size_t k = 2;
  /// Empty means "auto": grid search on held-out training sentences.
  std::optional<double> alpha;
  std::vector<double> alpha_grid = default_alpha_grid();
  /// Codebook sizes exported by export-stats (empty = all).
  std::vector<int> stats_bits;
  std::size_t histogram_bins = 50;
  std::filesystem::path corpus;
  std::filesystem::path output_dir = "spkid_out";

  /// Checks everything that does not need the manifest.
  void validate() const;
  /// Also checks K against the manifest's speakers and the role coverage.
  void validate(const CorpusManifest& manifest) const;

  bool needs_neural_scores() const { return !schemes.empty(); }
  bool has_scheme(Scheme s) const;
  /// Neural codebooks evaluated: every (neural bits, kept iteration).
  std::vector<NeuralKey> neural_keys() const;
  std::vector<int> neural_iterations() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Relative corpus and output paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Command-line overrides; unset fields leave the config alone.
struct ConfigOverrides {
  std::optional<std::vector<int>> bits;
  std::optional<std::vector<std::string>> schemes;
  std::optional<std::size_t> k;
  std::optional<std::string> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> output_dir;
};

/// Applies, in order, the output-directory environment variable and then the
/// flags.
void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& overrides);

/// "auto" or a non-negative number.
std::optional<double> parse_alpha(const std::string& text);

struct RunArtifacts {
  std::vector<std::filesystem::path> files;
};

/// Layout of an output directory.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path calibration() const { return root / "calibration.json"; }
  std::filesystem::path scores_json() const { return root / "scores.json"; }
  std::filesystem::path scores_csv() const { return root / "scores.csv"; }
  std::filesystem::path report() const { return root / "report.json"; }
  std::filesystem::path tables() const { return root / "tables"; }
  std::filesystem::path stats() const { return root / "stats"; }
  std::filesystem::path log(const std::string& command) const { return root / (command + ".log"); }
};

/// Trains every speaker and writes one model file per speaker per size, plus
/// held-out calibration scores when alpha is "auto" and a combined scheme is
/// configured.
RunArtifacts cmd_train(const ExperimentConfig& cfg);

/// Scores the test sentences and writes the error-rate grids, report.json and
/// the score tables. `models_dir` defaults to the output directory's models.
RunArtifacts cmd_evaluate(const ExperimentConfig& cfg,
                          const std::optional<std::filesystem::path>& models_dir = std::nullopt);

/// Correlation, histogram and dispersion CSVs from the retained score table.
RunArtifacts cmd_export_stats(const ExperimentConfig& cfg,
                              const std::optional<std::filesystem::path>& scores = std::nullopt);

RunArtifacts cmd_synth_corpus(int n_speakers, std::uint64_t seed,
                              const std::filesystem::path& out_dir,
                              const SynthOptions& options = {});

// --- Report builders -------------------------------------------------------

/// Error-rate grid as CSV: header "<corner>,<col>..." then one row per label.
std::string grid_csv(const std::string& corner, const std::vector<std::string>& columns,
                     const std::vector<std::string>& rows,
                     const std::vector<std::vector<double>>& cells);

/// Mean score (total / frames) per (sentence, speaker) row, one column per
/// measure, for one linear codebook size.
std::vector<std::vector<double>> mean_score_columns(const ScoreTable& table, int bits);

std::string correlation_csv(const CorrelationMatrix& matrix,
                            const std::vector<std::string>& labels);

struct HistogramSeries {
  std::string name;
  Histogram histogram;
};
std::string histogram_csv(const std::vector<HistogramSeries>& series);

/// Scatter points of two measures, one line per (sentence, speaker) pair.
std::string dispersion_csv(const ScoreTable& table, int bits, MeasureKind a, MeasureKind b);

}  // namespace spkid
