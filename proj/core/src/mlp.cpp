#include "spkid/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "spkid/error.hpp"
#include "spkid/rng.hpp"

namespace spkid {
namespace {

using P = MlpPredictor;

struct Activations {
  std::array<double, kMlpHidden1> h1;
  std::array<double, kMlpHidden2> h2;
  double y;
};

inline Activations run(const MlpPredictor& net, const double* x) {
  const auto& w = net.params;
  Activations a;
  for (std::size_t i = 0; i < kMlpHidden1; ++i) {
    double s = w[P::kB1 + i];
    const double* row = &w[P::kW1 + i * kMlpInputs];
    for (std::size_t j = 0; j < kMlpInputs; ++j) s += row[j] * x[j];
    a.h1[i] = std::tanh(s);
  }
  for (std::size_t i = 0; i < kMlpHidden2; ++i) {
    double s = w[P::kB2 + i];
    const double* row = &w[P::kW2 + i * kMlpHidden1];
    for (std::size_t j = 0; j < kMlpHidden1; ++j) s += row[j] * a.h1[j];
    a.h2[i] = std::tanh(s);
  }
  double y = w[P::kB3];
  for (std::size_t i = 0; i < kMlpHidden2; ++i) y += w[P::kW3 + i] * a.h2[i];
  a.y = y;
  return a;
}

inline double gradient(const MlpPredictor& net, const double* x, double* g) {
  const auto& w = net.params;
  const Activations a = run(net, x);
  g[P::kB3] = 1.0;
  std::array<double, kMlpHidden2> d2;
  for (std::size_t i = 0; i < kMlpHidden2; ++i) {
    g[P::kW3 + i] = a.h2[i];
    d2[i] = w[P::kW3 + i] * (1.0 - a.h2[i] * a.h2[i]);
    g[P::kB2 + i] = d2[i];
    for (std::size_t j = 0; j < kMlpHidden1; ++j) g[P::kW2 + i * kMlpHidden1 + j] = d2[i] * a.h1[j];
  }
  for (std::size_t j = 0; j < kMlpHidden1; ++j) {
    double back = 0.0;
    for (std::size_t i = 0; i < kMlpHidden2; ++i) back += d2[i] * w[P::kW2 + i * kMlpHidden1 + j];
    const double d1 = back * (1.0 - a.h1[j] * a.h1[j]);
    g[P::kB1 + j] = d1;
    for (std::size_t k = 0; k < kMlpInputs; ++k) g[P::kW1 + j * kMlpInputs + k] = d1 * x[k];
  }
  return a.y;
}

/// history (last ten samples, oldest first) followed by the frame.
std::vector<double> contiguous(const AnalysisFrame& frame) {
  if (frame.history.size() < kMlpInputs) {
    throw Error(ErrorKind::invalid_argument, "MLP residual needs at least 10 history samples");
  }
  std::vector<double> buf;
  buf.reserve(kMlpInputs + frame.samples.size());
  buf.insert(buf.end(), frame.history.end() - kMlpInputs, frame.history.end());
  buf.insert(buf.end(), frame.samples.begin(), frame.samples.end());
  return buf;
}

/// Context for predicting buf[t], most recent first.
inline void fill_context(const std::vector<double>& buf, std::size_t t, double* x) {
  for (std::size_t j = 0; j < kMlpInputs; ++j) x[j] = buf[t - 1 - j];
}

constexpr std::size_t kJacobianBlock = 4096;

struct NormalEquations {
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;
  double mse = 0.0;
};

NormalEquations normal_equations(const MlpPredictor& net, const TrainSet& data) {
  NormalEquations ne;
  ne.jtj = Eigen::MatrixXd::Zero(kMlpParams, kMlpParams);
  ne.jtr = Eigen::VectorXd::Zero(kMlpParams);
  Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kMlpParams), Eigen::RowMajor> j;
  Eigen::VectorXd r;
  double sse = 0.0;
  for (std::size_t start = 0; start < data.size(); start += kJacobianBlock) {
    const std::size_t rows = std::min(kJacobianBlock, data.size() - start);
    j.resize(static_cast<Eigen::Index>(rows), kMlpParams);
    r.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      const double y = gradient(net, data.inputs[start + i].data(), j.row(idx).data());
      r[idx] = data.targets[start + i] - y;
      sse += r[idx] * r[idx];
    }
    ne.jtj.selfadjointView<Eigen::Lower>().rankUpdate(j.transpose());
    ne.jtr.noalias() += j.transpose() * r;
  }
  ne.jtj = ne.jtj.selfadjointView<Eigen::Lower>();
  ne.mse = sse / static_cast<double>(data.size());
  return ne;
}

}  // namespace

MlpPredictor MlpPredictor::random(std::mt19937_64& rng) {
  MlpPredictor net;
  auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) net.params[begin + i] = uniform(rng, -0.5, 0.5) * scale;
  };
  fill(kW1, kMlpHidden1 * kMlpInputs, kMlpInputs);
  fill(kB1, kMlpHidden1, kMlpInputs);
  fill(kW2, kMlpHidden2 * kMlpHidden1, kMlpHidden1);
  fill(kB2, kMlpHidden2, kMlpHidden1);
  fill(kW3, kMlpHidden2, kMlpHidden2);
  fill(kB3, 1, kMlpHidden2);
  return net;
}

bool MlpPredictor::finite() const {
  return std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); });
}

double mlp_forward(const MlpPredictor& net, MlpContext x) { return run(net, x.data()).y; }

double mlp_forward_gradient(const MlpPredictor& net, MlpContext x,
                            std::span<double, kMlpParams> g) {
  return gradient(net, x.data(), g.data());
}

MlpResidual mlp_residual(const AnalysisFrame& frame, const MlpPredictor& net) {
  const auto buf = contiguous(frame);
  MlpResidual out;
  out.e.resize(frame.samples.size());
  double x[kMlpInputs];
  double abs_sum = 0.0;
  for (std::size_t n = 0; n < out.e.size(); ++n) {
    fill_context(buf, n + kMlpInputs, x);
    out.e[n] = buf[n + kMlpInputs] - run(net, x).y;
    abs_sum += std::abs(out.e[n]);
  }
  out.mad = abs_sum / static_cast<double>(out.e.size());
  return out;
}

double mlp_residual_mad(const AnalysisFrame& frame, const MlpPredictor& net) {
  const auto buf = contiguous(frame);
  double x[kMlpInputs];
  double abs_sum = 0.0;
  const std::size_t n_samples = frame.samples.size();
  for (std::size_t n = 0; n < n_samples; ++n) {
    fill_context(buf, n + kMlpInputs, x);
    abs_sum += std::abs(buf[n + kMlpInputs] - run(net, x).y);
  }
  return abs_sum / static_cast<double>(n_samples);
}

std::vector<double> signal_mlp_residual(std::span<const double> signal, const MlpPredictor& net) {
  std::vector<double> e(signal.size());
  double x[kMlpInputs];
  for (std::size_t n = 0; n < signal.size(); ++n) {
    for (std::size_t j = 0; j < kMlpInputs; ++j) x[j] = n > j ? signal[n - 1 - j] : 0.0;
    e[n] = signal[n] - run(net, x).y;
  }
  return e;
}

double slice_mad(std::span<const double> e, std::size_t offset, std::size_t length) {
  double abs_sum = 0.0;
  for (std::size_t n = 0; n < length; ++n) abs_sum += std::abs(e[offset + n]);
  return abs_sum / static_cast<double>(length);
}

void TrainSet::append_frame(const AnalysisFrame& frame) {
  const auto buf = contiguous(frame);
  for (std::size_t n = 0; n < frame.samples.size(); ++n) {
    std::array<double, kMlpInputs> x;
    fill_context(buf, n + kMlpInputs, x.data());
    inputs.push_back(x);
    targets.push_back(buf[n + kMlpInputs]);
  }
}

TrainSet build_train_set(std::span<const AnalysisFrame* const> frames) {
  TrainSet set;
  for (const AnalysisFrame* f : frames) set.append_frame(*f);
  return set;
}

double mlp_mse(const MlpPredictor& net, const TrainSet& data) {
  if (data.size() == 0) return 0.0;
  double sse = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.targets[i] - run(net, data.inputs[i].data()).y;
    sse += r * r;
  }
  return sse / static_cast<double>(data.size());
}

LmResult lm_train(const MlpPredictor& net, const TrainSet& data, const LmOptions& options) {
  LmResult out;
  out.net = net;
  if (data.size() == 0) {
    throw Error(ErrorKind::insufficient_data, "lm_train: empty training set");
  }
  out.mse = mlp_mse(net, data);
  out.accepted_mse.push_back(out.mse);

  double lambda = options.lambda_initial;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (out.mse == 0.0) break;
    const NormalEquations ne = normal_equations(out.net, data);
    ++out.epochs_run;
    bool accepted = false;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      Eigen::MatrixXd a = ne.jtj;
      a.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> solver(a);
      if (solver.info() == Eigen::Success) {
        const Eigen::VectorXd step = solver.solve(ne.jtr);
        MlpPredictor candidate = out.net;
        for (std::size_t i = 0; i < kMlpParams; ++i) {
          candidate.params[i] += step[static_cast<Eigen::Index>(i)];
        }
        const double mse = candidate.finite() ? mlp_mse(candidate, data)
                                              : std::numeric_limits<double>::infinity();
        if (mse < out.mse) {
          out.net = candidate;
          out.mse = mse;
          out.accepted_mse.push_back(mse);
          lambda = std::max(lambda / options.lambda_factor, 1e-20);
          accepted = true;
          break;
        }
      }
      lambda *= options.lambda_factor;
      if (lambda > options.lambda_max) break;
    }
    if (!accepted && lambda > options.lambda_max) {
      out.stalled = true;
      break;
    }
  }
  return out;
}

MultistartResult multistart_train(const TrainSet& data, const std::optional<MlpPredictor>& previous,
                                  std::uint64_t seed, const MultistartOptions& options) {
  MultistartResult out;
  bool have = false;
  auto consider = [&](const LmResult& r, bool from_prev) {
    out.candidate_mse.push_back(r.mse);
    if (!have || r.mse < out.mse) {
      out.net = r.net;
      out.mse = r.mse;
      out.winner = out.candidate_mse.size() - 1;
      out.from_previous = from_prev;
      have = true;
    }
  };
  for (int c = 0; c < options.random_starts; ++c) {
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    consider(lm_train(MlpPredictor::random(rng), data, options.lm), false);
  }
  if (previous) consider(lm_train(*previous, data, options.lm), true);
  if (!have) throw Error(ErrorKind::invalid_argument, "multistart_train: no candidates");
  return out;
}

}  // namespace spkid
