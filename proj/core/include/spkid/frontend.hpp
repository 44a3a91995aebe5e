#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace spkid {

inline constexpr std::size_t kFrameLength = 240;  // 30 ms at 8 kHz
inline constexpr std::size_t kLpcOrder = 10;
inline constexpr std::size_t kCepstralOrder = 12;

struct FrontendConfig {
  double preemphasis = 0.95;
  std::size_t frame_len = kFrameLength;
  std::size_t hop = kFrameLength / 3;  // 2/3 overlap
  std::size_t lpc_order = kLpcOrder;
  std::size_t cepstral_order = kCepstralOrder;
  /// When set, residuals are taken on the Hamming-windowed frame with zero
  /// history instead of the raw frame with its true history.
  bool window_before_residual = false;

  /// Throws Error(config) on any violated precondition.
  void validate() const;

  friend bool operator==(const FrontendConfig&, const FrontendConfig&) = default;
};

nlohmann::json to_json(const FrontendConfig& cfg);
FrontendConfig frontend_from_json(const nlohmann::json& j);

/// One analysis frame of the pre-emphasized signal. Samples are unwindowed.
struct AnalysisFrame {
  std::vector<double> samples;
  /// The `lpc_order` samples immediately before the frame, oldest first
  /// (history.back() is the sample just before samples[0]). Zero where the
  /// frame starts near the beginning of the utterance.
  std::vector<double> history;
  std::size_t index = 0;
  std::size_t offset = 0;
  double energy = 0.0;
};

/// y[n] = x[n] - mu * x[n-1], with x[-1] = 0.
std::vector<double> preemphasize(std::span<const double> x, double mu);

/// Slices a pre-emphasized signal into frames at offsets 0, hop, 2*hop, ...
/// Throws when the signal is shorter than one frame.
std::vector<AnalysisFrame> frame_signal(std::span<const double> y, const FrontendConfig& cfg);

/// Hamming coefficients 0.54 - 0.46 cos(2 pi n / (N - 1)).
std::span<const double> hamming_coefficients(std::size_t n);

/// frame[n] * w[n]. Throws when frame.size() != expected_len.
std::vector<double> hamming_window(std::span<const double> frame,
                                   std::size_t expected_len = kFrameLength);

}  // namespace spkid
