#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spkid {

using Vec = std::vector<double>;

enum class SplitMethod { std_deviation, hyperplane };

const char* to_string(SplitMethod m) noexcept;
SplitMethod split_method_from_string(const std::string& s);

/// A codeword keeps both its LPCC centroid and the mean LPC vector of the
/// training frames it owns; the latter is the inverse filter used by the
/// residual measures.
struct Codeword {
  Vec lpcc;
  Vec lpc;
  std::size_t population = 0;
};

struct LinearCodebook {
  int bits = 0;
  std::vector<Codeword> codewords;
  double training_distortion = 0.0;
  /// Training data had too few distinct vectors to fill every cell.
  bool degenerate = false;

  std::size_t size() const { return codewords.size(); }
};

struct VqOptions {
  double epsilon = 0.2;
  /// Lloyd stops when the relative distortion decrease drops below this.
  double tolerance = 1e-4;
  int max_iterations = 50;
};

/// One Lloyd pass as recorded during training.
struct LloydStep {
  int stage = 0;  // number of splits performed so far
  std::size_t codebook_size = 0;
  int iteration = 0;
  double distortion = 0.0;
  bool repaired = false;
};

struct VqTrace {
  std::vector<LloydStep> steps;
};

/// Mean squared difference (measure 1) used for training assignments.
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Per-dimension population standard deviation split: centroid +/- eps*sigma.
/// With sigma == 0 the children are centroid +/- eps*1e-4 along dimension 0.
std::pair<Vec, Vec> split_stddev(std::span<const double> centroid,
                                 std::span<const Vec> assigned, double epsilon);

/// Dominant-eigenvector split: centroid +/- eps*sqrt(lambda1)*v1 of the
/// population covariance. Falls back to split_stddev with fewer than two
/// members or a zero covariance.
std::pair<Vec, Vec> split_hyperplane(std::span<const double> centroid,
                                     std::span<const Vec> assigned, double epsilon);

struct EigenPair {
  double value = 0.0;
  Vec vector;
};

/// Power iteration (100 iterations, tolerance 1e-10) on a symmetric PSD
/// matrix given row-major. The eigenvector sign makes its largest-magnitude
/// component positive.
EigenPair dominant_eigenpair(std::span<const double> matrix, std::size_t dim);

struct LloydOutcome {
  LinearCodebook codebook;
  std::vector<std::size_t> assignment;
  /// Mean measure-1 distance of every vector to its updated centroid.
  double distortion = 0.0;
  bool repaired = false;
};

/// Nearest-centroid assignment, empty-cell repair, centroid update. Only the
/// LPCC centroids and populations change; `lpc` means are left as they were.
LloydOutcome lloyd_iterate(const LinearCodebook& codebook, std::span<const Vec> vectors);

/// LBG: global centroid, then `bits` rounds of split + Lloyd to convergence.
/// `lpc` holds the companion LPC vector of each training vector; codeword lpc
/// means are computed from the final assignment. The procedure has no random
/// step, so identical inputs always give identical codebooks.
LinearCodebook train_codebook(std::span<const Vec> lpcc, std::span<const Vec> lpc, int bits,
                              SplitMethod method, const VqOptions& options = {},
                              VqTrace* trace = nullptr);

enum class CoefficientMetric { mse, mad };

struct Quantized {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Nearest codeword under MSE (measure 1) or MAD (measure 2); ties go to the
/// lowest index.
Quantized quantize(std::span<const double> v, const LinearCodebook& codebook,
                   CoefficientMetric metric = CoefficientMetric::mse);

}  // namespace spkid
