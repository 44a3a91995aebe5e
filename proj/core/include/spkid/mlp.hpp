#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "spkid/frontend.hpp"

namespace spkid {

inline constexpr std::size_t kMlpInputs = 10;
inline constexpr std::size_t kMlpHidden1 = 4;
inline constexpr std::size_t kMlpHidden2 = 2;

/// 10-4-2-1 predictor: tanh hidden layers, linear output.
///
/// Parameters are stored flat in the model-file order
///   W1[4x10] (row-major) | b1[4] | W2[2x4] | b2[2] | W3[2] | b3[1]
/// for a total of 57.
struct MlpPredictor {
  static constexpr std::size_t kW1 = 0;
  static constexpr std::size_t kB1 = kW1 + kMlpHidden1 * kMlpInputs;
  static constexpr std::size_t kW2 = kB1 + kMlpHidden1;
  static constexpr std::size_t kB2 = kW2 + kMlpHidden2 * kMlpHidden1;
  static constexpr std::size_t kW3 = kB2 + kMlpHidden2;
  static constexpr std::size_t kB3 = kW3 + kMlpHidden2;
  static constexpr std::size_t kParams = kB3 + 1;

  std::array<double, kParams> params{};

  /// Uniform in [-0.5, 0.5] scaled by 1/sqrt(fan-in), biases included.
  static MlpPredictor random(std::mt19937_64& rng);

  bool finite() const;

  friend bool operator==(const MlpPredictor&, const MlpPredictor&) = default;
};

inline constexpr std::size_t kMlpParams = MlpPredictor::kParams;
static_assert(kMlpParams == 57);

/// Context is most-recent first: x[0] = s[n-1], ..., x[9] = s[n-10].
using MlpContext = std::span<const double, kMlpInputs>;

double mlp_forward(const MlpPredictor& net, MlpContext x);

/// Output and its gradient with respect to every parameter.
double mlp_forward_gradient(const MlpPredictor& net, MlpContext x,
                            std::span<double, kMlpParams> gradient);

struct MlpResidual {
  std::vector<double> e;
  double mad = 0.0;
};

/// e[n] = s[n] - net(s[n-1..n-10]) over a frame, using its true history.
MlpResidual mlp_residual(const AnalysisFrame& frame, const MlpPredictor& net);

/// Mean absolute residual only, without materializing e.
double mlp_residual_mad(const AnalysisFrame& frame, const MlpPredictor& net);

/// Residual of the net over a whole pre-emphasized signal with zero initial
/// context. The mean of |e| over a frame's slice equals mlp_residual_mad on
/// that frame bit for bit.
std::vector<double> signal_mlp_residual(std::span<const double> signal, const MlpPredictor& net);

/// Mean |e| over e[offset, offset + length).
double slice_mad(std::span<const double> e, std::size_t offset, std::size_t length);

/// Sliding-window training pairs. Each frame of N samples with at least ten
/// history samples contributes N pairs.
struct TrainSet {
  std::vector<std::array<double, kMlpInputs>> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  void append_frame(const AnalysisFrame& frame);
};

TrainSet build_train_set(std::span<const AnalysisFrame* const> frames);

/// Mean squared prediction error over a training set.
double mlp_mse(const MlpPredictor& net, const TrainSet& data);

struct LmOptions {
  int epochs = 8;
  double lambda_initial = 1e-3;
  double lambda_factor = 10.0;
  double lambda_max = 1e10;
  int max_retries = 10;
};

struct LmResult {
  MlpPredictor net;
  double mse = 0.0;
  /// Training MSE before the first epoch, then after every accepted step.
  std::vector<double> accepted_mse;
  int epochs_run = 0;
  /// Damping reached its ceiling without finding a descending step.
  bool stalled = false;
};

/// Full-batch Levenberg-Marquardt. One epoch builds the Jacobian, solves
/// (J'J + lambda I) d = J'r and accepts d only if the MSE drops (lambda /= 10)
/// or retries with lambda *= 10, at most `max_retries` times.
LmResult lm_train(const MlpPredictor& net, const TrainSet& data, const LmOptions& options = {});

struct MultistartOptions {
  int random_starts = 4;
  LmOptions lm;
};

struct MultistartResult {
  MlpPredictor net;
  double mse = 0.0;
  /// Final MSE of every candidate; random starts first, then the previous net.
  std::vector<double> candidate_mse;
  std::size_t winner = 0;
  bool from_previous = false;
};

/// Trains `random_starts` fresh nets (+ `previous` when given) and keeps the
/// one with the lowest final training MSE (ties to the earlier candidate).
/// Candidate c draws its initialization from derive_seed(seed, {c}).
MultistartResult multistart_train(const TrainSet& data, const std::optional<MlpPredictor>& previous,
                                  std::uint64_t seed, const MultistartOptions& options = {});

}  // namespace spkid
