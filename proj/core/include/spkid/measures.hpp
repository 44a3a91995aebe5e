#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spkid/lpc.hpp"
#include "spkid/vq.hpp"

namespace spkid {

/// The six frame distances.
///   M1 mean squared LPCC difference     M2 mean absolute LPCC difference
///   M3 mean square of the residual      M4 mean absolute residual
///   M5 maximum absolute residual        M6 variance of the residual
/// Residual measures filter the frame with the codeword's mean LPC vector.
enum class MeasureKind { m1 = 1, m2, m3, m4, m5, m6 };

inline constexpr std::size_t kMeasureCount = 6;
inline constexpr std::array<MeasureKind, kMeasureCount> kAllMeasures = {
    MeasureKind::m1, MeasureKind::m2, MeasureKind::m3,
    MeasureKind::m4, MeasureKind::m5, MeasureKind::m6};

constexpr int measure_number(MeasureKind k) { return static_cast<int>(k); }
constexpr std::size_t measure_index(MeasureKind k) { return static_cast<std::size_t>(k) - 1; }
constexpr bool is_coefficient_measure(MeasureKind k) {
  return k == MeasureKind::m1 || k == MeasureKind::m2;
}
/// Accepts 1..6; throws Error(config) otherwise.
MeasureKind measure_from_number(int n);

using MeasureValues = std::array<double, kMeasureCount>;

double coefficient_distance(std::span<const double> c, std::span<const double> centroid,
                            MeasureKind kind);

double residual_measure(std::span<const double> e, MeasureKind kind);

/// M3..M6 of one residual in a single pass; slots 0 and 1 are unused (0).
/// M6 is computed two-pass and capped at M3, which it can only exceed by
/// rounding.
MeasureValues residual_measures(std::span<const double> e);

double frame_distance(const FrameFeatures& frame, const Codeword& codeword, MeasureKind kind,
                      const FrontendConfig& cfg);

struct SentenceScore {
  std::string speaker;
  double total = 0.0;
  std::size_t n_frames = 0;

  double mean() const { return total / static_cast<double>(n_frames); }
};

/// Accumulates, over frames, the minimum distance to any codeword.
SentenceScore score_sentence(std::span<const FrameFeatures> frames,
                             const LinearCodebook& codebook, MeasureKind kind,
                             const FrontendConfig& cfg);

/// Totals for all six measures at once. Residuals are filtered once per
/// codeword over the whole signal and sliced per frame, which is bit-identical
/// to per-frame filtering when window_before_residual is off.
MeasureValues score_sentence_all(const UtteranceFeatures& utterance,
                                 const LinearCodebook& codebook, const FrontendConfig& cfg);

/// coefficient.total + alpha * residual.total. Throws for negative alpha.
double combine_scores(const SentenceScore& coefficient, const SentenceScore& residual,
                      double alpha);
double combine_totals(double coefficient, double residual, double alpha);

/// 13 points, 1e-3 .. 1e3, half a decade apart.
std::vector<double> default_alpha_grid();

struct AlphaCandidate {
  std::string speaker;
  double coefficient = 0.0;
  double residual = 0.0;
};

/// One held-out sentence: its true speaker and the competing speakers' totals.
struct AlphaTrial {
  std::string truth;
  std::vector<AlphaCandidate> candidates;
};

/// Number of trials misidentified at this alpha (argmin of the combined
/// score, ties to the lexicographically smaller speaker).
std::size_t alpha_errors(std::span<const AlphaTrial> trials, double alpha);

/// Grid value with the fewest held-out errors; ties go to the smaller alpha.
double grid_search_alpha(std::span<const AlphaTrial> trials, std::span<const double> grid);

/// Pearson matrix between columns. An entry is empty when either column has
/// zero variance (the diagonal of such a column included).
using CorrelationMatrix = std::vector<std::vector<std::optional<double>>>;
CorrelationMatrix correlation_matrix(std::span<const std::vector<double>> columns);

struct Histogram {
  std::vector<double> intra;
  std::vector<double> inter;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> intra_counts;
  std::vector<std::size_t> inter_counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(intra_counts.size()); }
};

struct LabeledScore {
  std::string truth;
  std::string speaker;
  double value = 0.0;
};

/// Splits scores into intra-speaker (model speaker == truth) and
/// inter-speaker lists and bins both over the pooled range.
Histogram distortion_histograms(std::span<const LabeledScore> scores, std::size_t bins = 50);

}  // namespace spkid
