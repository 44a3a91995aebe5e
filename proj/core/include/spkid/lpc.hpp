#pragma once

#include <span>
#include <string>
#include <vector>

#include "spkid/corpus.hpp"
#include "spkid/frontend.hpp"

namespace spkid {

/// Predictor x^[n] = sum_k a[k] x[n-k]; analysis filter A(z) = 1 - sum_k a[k] z^-k.
/// `a[0]` holds a[1].
struct LpcModel {
  std::vector<double> a;
  std::vector<double> reflection;
  /// Final Levinson prediction error E_p.
  double error = 0.0;
  /// r[0] was zero: coefficients are all zero and error is 0.
  bool degenerate = false;
  /// r[0] was inflated by 1e-9 r[0] after the recursion hit a non-positive error.
  bool regularized = false;
};

/// r[k] = sum_n x[n] x[n+k] for k = 0..order (no windowing).
std::vector<double> autocorrelate(std::span<const double> x, std::size_t order);

/// Hamming-windows the frame, then autocorrelates it.
std::vector<double> autocorrelate(const AnalysisFrame& frame, std::size_t order);

/// Levinson-Durbin on r[0..p]. r[0] == 0 yields the flagged degenerate model.
LpcModel levinson(std::span<const double> r);

/// LPC -> cepstrum of 1/A(z), coefficients c[1..q] (c[0] excluded).
std::vector<double> lpc_to_cepstrum(std::span<const double> a, std::size_t q);

/// e[n] = s[n] - sum_k a[k] s[n-k] where s[-k] comes from `history`
/// (oldest first). history.size() must be at least a.size().
std::vector<double> inverse_filter_residual(std::span<const double> samples,
                                            std::span<const double> history,
                                            std::span<const double> a);

std::vector<double> inverse_filter_residual(const AnalysisFrame& frame,
                                            std::span<const double> a);

/// Residual as configured: raw frame with true history, or windowed frame
/// with zero history when cfg.window_before_residual is set.
std::vector<double> frame_residual(const AnalysisFrame& frame, std::span<const double> a,
                                   const FrontendConfig& cfg);

/// Residual of a whole pre-emphasized signal (zero initial state). Slicing it
/// at a frame's offset reproduces inverse_filter_residual on that frame bit for
/// bit.
std::vector<double> signal_residual(std::span<const double> signal, std::span<const double> a);

/// 10 log10(signal energy / residual energy).
double prediction_gain_db(double signal_energy, double residual_energy);

struct FrameFeatures {
  AnalysisFrame frame;
  LpcModel lpc;
  std::vector<double> lpcc;
};

struct UtteranceFeatures {
  std::string speaker;
  std::string sentence;
  /// The pre-emphasized signal the frames were cut from.
  std::vector<double> signal;
  std::vector<FrameFeatures> frames;
};

FrameFeatures analyze_frame(AnalysisFrame frame, const FrontendConfig& cfg);

/// Pre-emphasis, framing, then per-frame LPC and LPCC.
UtteranceFeatures analyze_utterance(const Utterance& utterance, const FrontendConfig& cfg);

std::vector<UtteranceFeatures> analyze_utterances(std::span<const Utterance> utterances,
                                                  const FrontendConfig& cfg,
                                                  std::size_t threads = 0);

}  // namespace spkid
