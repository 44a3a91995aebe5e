#include "spkid/neural_codebook.hpp"

#include <limits>

#include "spkid/error.hpp"
#include "spkid/rng.hpp"

namespace spkid {
namespace {

std::vector<const AnalysisFrame*> subsample(const std::vector<const AnalysisFrame*>& members,
                                            std::size_t cap) {
  if (cap == 0 || members.size() <= cap) return members;
  std::vector<const AnalysisFrame*> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i) out.push_back(members[i * members.size() / cap]);
  return out;
}

}  // namespace

std::vector<std::vector<double>> frame_mad_table(std::span<const FrameFeatures> frames,
                                                 const NeuralCodebook& codebook) {
  std::vector<std::vector<double>> table(frames.size(), std::vector<double>(codebook.size()));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (std::size_t j = 0; j < codebook.size(); ++j) {
      table[f][j] = mlp_residual_mad(frames[f].frame, codebook.nets[j]);
    }
  }
  return table;
}

NeuralPartition partition_by_mad(std::span<const FrameFeatures> frames,
                                 const NeuralCodebook& codebook) {
  if (codebook.nets.empty()) throw Error(ErrorKind::invalid_argument, "empty neural codebook");
  NeuralPartition p;
  p.assignment.resize(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < codebook.size(); ++j) {
      const double mad = mlp_residual_mad(frames[f].frame, codebook.nets[j]);
      if (mad < best) {
        best = mad;
        p.assignment[f] = j;
      }
    }
    p.total_mad += best;
  }
  return p;
}

NeuralBuild build_neural_codebook(std::span<const FrameFeatures> frames,
                                  const LinearCodebook& linear, std::uint64_t seed,
                                  const NeuralOptions& options) {
  if (frames.empty()) {
    throw Error(ErrorKind::insufficient_data, "build_neural_codebook: no training frames");
  }
  if (linear.codewords.empty()) {
    throw Error(ErrorKind::invalid_argument, "build_neural_codebook: empty linear codebook");
  }
  if (options.iterations < 0) {
    throw Error(ErrorKind::invalid_argument, "build_neural_codebook: negative iteration count");
  }
  const std::size_t k = linear.size();

  std::vector<std::size_t> assignment(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    assignment[f] = quantize(frames[f].lpcc, linear).index;
  }

  NeuralBuild build;
  std::vector<MlpPredictor> nets(k);
  for (int it = 0; it <= options.iterations; ++it) {
    std::vector<std::vector<const AnalysisFrame*>> members(k);
    for (std::size_t f = 0; f < frames.size(); ++f) members[assignment[f]].push_back(&frames[f].frame);

    std::vector<std::size_t> sizes(k);
    for (std::size_t c = 0; c < k; ++c) {
      sizes[c] = members[c].size();
      if (members[c].empty()) {
        if (it > 0) continue;  // keep the previous net
        // No previous net yet: train on the frame closest to the centroid.
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < frames.size(); ++f) {
          const double d = squared_distance(frames[f].lpcc, linear.codewords[c].lpcc);
          if (d < best) {
            best = d;
            nearest = f;
          }
        }
        members[c].push_back(&frames[nearest].frame);
      }
      const TrainSet data = build_train_set(subsample(members[c], options.max_frames_per_cluster));
      std::optional<MlpPredictor> previous;
      if (it > 0) previous = nets[c];
      const auto result =
          multistart_train(data, previous,
                           derive_seed(seed, {static_cast<std::uint64_t>(it), c}),
                           options.multistart);
      nets[c] = result.net;
    }

    NeuralCodebook cb;
    cb.bits = linear.bits;
    cb.source_bits = linear.bits;
    cb.lloyd_iteration = it;
    cb.nets = nets;
    NeuralPartition partition = partition_by_mad(frames, cb);
    assignment = std::move(partition.assignment);
    build.total_mad.push_back(partition.total_mad);
    build.cluster_sizes.push_back(std::move(sizes));
    build.iterations.push_back(std::move(cb));
  }
  return build;
}

}  // namespace spkid
