#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spkid/lpc.hpp"
#include "spkid/mlp.hpp"
#include "spkid/vq.hpp"

namespace spkid {

/// 2^bits nonlinear predictors, one per cluster of training frames.
struct NeuralCodebook {
  int bits = 0;
  /// Size of the linear codebook that produced the initial clustering.
  int source_bits = 0;
  /// 0 = trained on the linear clustering only.
  int lloyd_iteration = 0;
  std::vector<MlpPredictor> nets;

  std::size_t size() const { return nets.size(); }
};

struct NeuralOptions {
  /// Generalized Lloyd iterations after the initial training.
  int iterations = 3;
  MultistartOptions multistart;
  /// Cap on frames used to train one cluster's predictor (0 = no cap). Larger
  /// clusters are subsampled at an even stride.
  std::size_t max_frames_per_cluster = 64;
};

/// Per-frame mean absolute residual of every net: result[f][j].
std::vector<std::vector<double>> frame_mad_table(std::span<const FrameFeatures> frames,
                                                 const NeuralCodebook& codebook);

/// Index of the lowest-MAD net for each frame (ties to the lowest index),
/// and the sum of those minima.
struct NeuralPartition {
  std::vector<std::size_t> assignment;
  double total_mad = 0.0;
};
NeuralPartition partition_by_mad(std::span<const FrameFeatures> frames,
                                 const NeuralCodebook& codebook);

struct NeuralBuild {
  /// Codebook after the initial training (index 0) and after each Lloyd
  /// iteration (index i).
  std::vector<NeuralCodebook> iterations;
  /// Sum over training frames of the lowest net MAD, per iteration.
  std::vector<double> total_mad;
  /// Cluster populations used to train each iteration's nets.
  std::vector<std::vector<std::size_t>> cluster_sizes;
};

/// Iteration 0 clusters frames by LPCC quantization against `linear` and
/// trains one predictor per cluster from random starts. Each further
/// iteration re-clusters by lowest residual MAD and retrains with the previous
/// net as an extra start; empty clusters keep their previous net.
NeuralBuild build_neural_codebook(std::span<const FrameFeatures> frames,
                                  const LinearCodebook& linear, std::uint64_t seed,
                                  const NeuralOptions& options = {});

}  // namespace spkid
