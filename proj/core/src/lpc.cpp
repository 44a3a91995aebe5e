#include "spkid/lpc.hpp"

#include <cmath>
#include <limits>

#include "spkid/error.hpp"
#include "spkid/parallel.hpp"

namespace spkid {
namespace {

/// One output sample of the analysis filter; `past(k)` returns s[n-k].
template <class Past>
inline double filter_sample(double current, std::span<const double> a, Past&& past) {
  double pred = 0.0;
  for (std::size_t k = 1; k <= a.size(); ++k) pred += a[k - 1] * past(k);
  return current - pred;
}

bool run_levinson(std::span<const double> r, double r0, LpcModel& m) {
  const std::size_t p = r.size() - 1;
  m.a.assign(p, 0.0);
  m.reflection.assign(p, 0.0);
  std::vector<double> prev(p, 0.0);
  double err = r0;
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc -= m.a[j - 1] * r[i - j];
    const double k = acc / err;
    prev = m.a;
    m.a[i - 1] = k;
    for (std::size_t j = 1; j < i; ++j) m.a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    m.reflection[i - 1] = k;
    err *= (1.0 - k) * (1.0 + k);
    if (!(err > 0.0) || !(std::abs(k) < 1.0)) return false;
  }
  m.error = err;
  return true;
}

}  // namespace

std::vector<double> autocorrelate(std::span<const double> x, std::size_t order) {
  std::vector<double> r(order + 1, 0.0);
  for (std::size_t k = 0; k <= order && k < x.size(); ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n + k < x.size(); ++n) acc += x[n] * x[n + k];
    r[k] = acc;
  }
  return r;
}

std::vector<double> autocorrelate(const AnalysisFrame& frame, std::size_t order) {
  return autocorrelate(hamming_window(frame.samples, frame.samples.size()), order);
}

LpcModel levinson(std::span<const double> r) {
  if (r.empty()) throw Error(ErrorKind::invalid_argument, "levinson: empty autocorrelation");
  const std::size_t p = r.size() - 1;
  LpcModel m;
  if (!(r[0] > 0.0)) {
    m.a.assign(p, 0.0);
    m.reflection.assign(p, 0.0);
    m.error = 0.0;
    m.degenerate = true;
    return m;
  }
  if (run_levinson(r, r[0], m)) return m;

  // Numerically singular: lift r[0] slightly and retry.
  double r0 = r[0];
  for (int attempt = 0; attempt < 60; ++attempt) {
    r0 += 1e-9 * r[0] * std::ldexp(1.0, attempt);
    if (run_levinson(r, r0, m)) {
      m.regularized = true;
      return m;
    }
  }
  throw Error(ErrorKind::numeric, "levinson: autocorrelation is not positive definite");
}

std::vector<double> lpc_to_cepstrum(std::span<const double> a, std::size_t q) {
  const std::size_t p = a.size();
  std::vector<double> c(q, 0.0);
  for (std::size_t n = 1; n <= q; ++n) {
    double acc = n <= p ? a[n - 1] : 0.0;
    const std::size_t k0 = n > p ? n - p : 1;
    for (std::size_t k = k0; k < n; ++k) {
      acc += (static_cast<double>(k) / static_cast<double>(n)) * c[k - 1] * a[n - k - 1];
    }
    c[n - 1] = acc;
  }
  return c;
}

std::vector<double> inverse_filter_residual(std::span<const double> samples,
                                            std::span<const double> history,
                                            std::span<const double> a) {
  if (history.size() < a.size()) {
    throw Error(ErrorKind::invalid_argument, "inverse_filter_residual: history shorter than order");
  }
  const auto h = static_cast<std::ptrdiff_t>(history.size());
  std::vector<double> e(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const auto ni = static_cast<std::ptrdiff_t>(n);
    e[n] = filter_sample(samples[n], a, [&](std::size_t k) {
      const std::ptrdiff_t idx = ni - static_cast<std::ptrdiff_t>(k);
      return idx >= 0 ? samples[static_cast<std::size_t>(idx)]
                      : history[static_cast<std::size_t>(h + idx)];
    });
  }
  return e;
}

std::vector<double> inverse_filter_residual(const AnalysisFrame& frame,
                                            std::span<const double> a) {
  return inverse_filter_residual(frame.samples, frame.history, a);
}

std::vector<double> frame_residual(const AnalysisFrame& frame, std::span<const double> a,
                                   const FrontendConfig& cfg) {
  if (!cfg.window_before_residual) return inverse_filter_residual(frame, a);
  const std::vector<double> zeros(a.size(), 0.0);
  return inverse_filter_residual(hamming_window(frame.samples, frame.samples.size()), zeros, a);
}

std::vector<double> signal_residual(std::span<const double> signal, std::span<const double> a) {
  std::vector<double> e(signal.size());
  for (std::size_t n = 0; n < signal.size(); ++n) {
    e[n] = filter_sample(signal[n], a,
                         [&](std::size_t k) { return k <= n ? signal[n - k] : 0.0; });
  }
  return e;
}

double prediction_gain_db(double signal_energy, double residual_energy) {
  if (residual_energy <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_energy / residual_energy);
}

FrameFeatures analyze_frame(AnalysisFrame frame, const FrontendConfig& cfg) {
  FrameFeatures f;
  f.lpc = levinson(autocorrelate(frame, cfg.lpc_order));
  f.lpcc = lpc_to_cepstrum(f.lpc.a, cfg.cepstral_order);
  f.frame = std::move(frame);
  return f;
}

UtteranceFeatures analyze_utterance(const Utterance& utterance, const FrontendConfig& cfg) {
  UtteranceFeatures out;
  out.speaker = utterance.speaker_id;
  out.sentence = utterance.sentence_id;
  out.signal = preemphasize(utterance.samples, cfg.preemphasis);
  auto frames = frame_signal(out.signal, cfg);
  out.frames.reserve(frames.size());
  for (auto& fr : frames) out.frames.push_back(analyze_frame(std::move(fr), cfg));
  return out;
}

std::vector<UtteranceFeatures> analyze_utterances(std::span<const Utterance> utterances,
                                                  const FrontendConfig& cfg,
                                                  std::size_t threads) {
  std::vector<UtteranceFeatures> out(utterances.size());
  parallel_for(utterances.size(), threads,
               [&](std::size_t i) { out[i] = analyze_utterance(utterances[i], cfg); });
  return out;
}

}  // namespace spkid
