#include "spkid/frontend.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "spkid/error.hpp"

namespace spkid {

void FrontendConfig::validate() const {
  auto bad = [](const std::string& why) { return Error(ErrorKind::config, "frontend: " + why); };
  if (!(preemphasis >= 0.0 && preemphasis < 1.0)) throw bad("preemphasis must be in [0, 1)");
  if (frame_len < 2) throw bad("frame_len must be at least 2");
  if (hop == 0 || hop > frame_len) throw bad("hop must be in [1, frame_len]");
  if (lpc_order < 1 || lpc_order > frame_len) throw bad("lpc_order must be in [1, frame_len]");
  if (cepstral_order < 1) throw bad("cepstral_order must be at least 1");
}

nlohmann::json to_json(const FrontendConfig& cfg) {
  return {{"preemphasis", cfg.preemphasis},
          {"frame_len", cfg.frame_len},
          {"hop", cfg.hop},
          {"lpc_order", cfg.lpc_order},
          {"cepstral_order", cfg.cepstral_order},
          {"window_before_residual", cfg.window_before_residual}};
}

FrontendConfig frontend_from_json(const nlohmann::json& j) {
  FrontendConfig cfg;
  cfg.preemphasis = j.value("preemphasis", cfg.preemphasis);
  cfg.frame_len = j.value("frame_len", cfg.frame_len);
  cfg.hop = j.value("hop", cfg.frame_len / 3);
  cfg.lpc_order = j.value("lpc_order", cfg.lpc_order);
  cfg.cepstral_order = j.value("cepstral_order", cfg.cepstral_order);
  cfg.window_before_residual = j.value("window_before_residual", cfg.window_before_residual);
  return cfg;
}

std::vector<double> preemphasize(std::span<const double> x, double mu) {
  std::vector<double> y(x.size());
  double prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    y[n] = x[n] - mu * prev;
    prev = x[n];
  }
  return y;
}

std::vector<AnalysisFrame> frame_signal(std::span<const double> y, const FrontendConfig& cfg) {
  cfg.validate();
  if (y.size() < cfg.frame_len) {
    throw Error(ErrorKind::insufficient_data,
                "utterance of " + std::to_string(y.size()) + " samples is shorter than one frame (" +
                    std::to_string(cfg.frame_len) + ")");
  }
  const std::size_t count = (y.size() - cfg.frame_len) / cfg.hop + 1;
  std::vector<AnalysisFrame> frames(count);
  for (std::size_t f = 0; f < count; ++f) {
    AnalysisFrame& fr = frames[f];
    fr.index = f;
    fr.offset = f * cfg.hop;
    fr.samples.assign(y.begin() + static_cast<std::ptrdiff_t>(fr.offset),
                      y.begin() + static_cast<std::ptrdiff_t>(fr.offset + cfg.frame_len));
    fr.history.assign(cfg.lpc_order, 0.0);
    for (std::size_t k = 1; k <= cfg.lpc_order && k <= fr.offset; ++k) {
      fr.history[cfg.lpc_order - k] = y[fr.offset - k];
    }
    double e = 0.0;
    for (double s : fr.samples) e += s * s;
    fr.energy = e;
  }
  return frames;
}

std::span<const double> hamming_coefficients(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<const std::vector<double>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    auto w = std::make_unique<std::vector<double>>(n, 1.0);
    if (n > 1) {
      for (std::size_t i = 0; i < n; ++i) {
        (*w)[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(n - 1));
      }
    }
    slot = std::move(w);
  }
  return *slot;
}

std::vector<double> hamming_window(std::span<const double> frame, std::size_t expected_len) {
  if (frame.size() != expected_len) {
    throw Error(ErrorKind::invalid_argument, "hamming_window: expected " +
                                                 std::to_string(expected_len) + " samples, got " +
                                                 std::to_string(frame.size()));
  }
  const auto w = hamming_coefficients(frame.size());
  std::vector<double> out(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) out[i] = frame[i] * w[i];
  return out;
}

}  // namespace spkid
