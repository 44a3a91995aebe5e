#include "spkid/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spkid/error.hpp"

namespace spkid {

MeasureKind measure_from_number(int n) {
  if (n < 1 || n > 6) {
    throw Error(ErrorKind::config, "measure must be in 1..6, got " + std::to_string(n));
  }
  return static_cast<MeasureKind>(n);
}

double coefficient_distance(std::span<const double> c, std::span<const double> centroid,
                            MeasureKind kind) {
  double s = 0.0;
  if (kind == MeasureKind::m1) {
    for (std::size_t i = 0; i < c.size(); ++i) s += (c[i] - centroid[i]) * (c[i] - centroid[i]);
  } else if (kind == MeasureKind::m2) {
    for (std::size_t i = 0; i < c.size(); ++i) s += std::abs(c[i] - centroid[i]);
  } else {
    throw Error(ErrorKind::invalid_argument, "coefficient_distance: not a coefficient measure");
  }
  return s / static_cast<double>(c.size());
}

MeasureValues residual_measures(std::span<const double> e) {
  MeasureValues v{};
  if (e.empty()) return v;
  const double n = static_cast<double>(e.size());
  double sum = 0.0;
  double sq = 0.0;
  double abs_sum = 0.0;
  double peak = 0.0;
  for (double x : e) {
    sum += x;
    sq += x * x;
    abs_sum += std::abs(x);
    peak = std::max(peak, std::abs(x));
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double x : e) var += (x - mean) * (x - mean);
  v[measure_index(MeasureKind::m3)] = sq / n;
  v[measure_index(MeasureKind::m4)] = abs_sum / n;
  v[measure_index(MeasureKind::m5)] = peak;
  v[measure_index(MeasureKind::m6)] = std::min(var / n, sq / n);
  return v;
}

double residual_measure(std::span<const double> e, MeasureKind kind) {
  if (is_coefficient_measure(kind)) {
    throw Error(ErrorKind::invalid_argument, "residual_measure: not a residual measure");
  }
  return residual_measures(e)[measure_index(kind)];
}

double frame_distance(const FrameFeatures& frame, const Codeword& codeword, MeasureKind kind,
                      const FrontendConfig& cfg) {
  if (is_coefficient_measure(kind)) return coefficient_distance(frame.lpcc, codeword.lpcc, kind);
  return residual_measure(frame_residual(frame.frame, codeword.lpc, cfg), kind);
}

SentenceScore score_sentence(std::span<const FrameFeatures> frames,
                             const LinearCodebook& codebook, MeasureKind kind,
                             const FrontendConfig& cfg) {
  if (frames.empty()) throw Error(ErrorKind::invalid_argument, "score_sentence: no frames");
  if (codebook.codewords.empty()) {
    throw Error(ErrorKind::invalid_argument, "score_sentence: empty codebook");
  }
  SentenceScore s;
  s.n_frames = frames.size();
  for (const auto& f : frames) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cw : codebook.codewords) best = std::min(best, frame_distance(f, cw, kind, cfg));
    s.total += best;
  }
  return s;
}

MeasureValues score_sentence_all(const UtteranceFeatures& utterance,
                                 const LinearCodebook& codebook, const FrontendConfig& cfg) {
  const auto& frames = utterance.frames;
  if (frames.empty()) throw Error(ErrorKind::invalid_argument, "score_sentence_all: no frames");
  if (codebook.codewords.empty()) {
    throw Error(ErrorKind::invalid_argument, "score_sentence_all: empty codebook");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<MeasureValues> best(frames.size());
  for (auto& b : best) b.fill(inf);

  for (const auto& cw : codebook.codewords) {
    std::vector<double> whole;
    if (!cfg.window_before_residual) whole = signal_residual(utterance.signal, cw.lpc);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const auto& fr = frames[f];
      auto& b = best[f];
      b[0] = std::min(b[0], coefficient_distance(fr.lpcc, cw.lpcc, MeasureKind::m1));
      b[1] = std::min(b[1], coefficient_distance(fr.lpcc, cw.lpcc, MeasureKind::m2));
      MeasureValues r;
      if (cfg.window_before_residual) {
        r = residual_measures(frame_residual(fr.frame, cw.lpc, cfg));
      } else {
        r = residual_measures(
            std::span<const double>(whole).subspan(fr.frame.offset, fr.frame.samples.size()));
      }
      for (std::size_t m = 2; m < kMeasureCount; ++m) b[m] = std::min(b[m], r[m]);
    }
  }
  MeasureValues totals{};
  for (const auto& b : best) {
    for (std::size_t m = 0; m < kMeasureCount; ++m) totals[m] += b[m];
  }
  return totals;
}

double combine_totals(double coefficient, double residual, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::invalid_argument, "combine: alpha must be >= 0");
  return coefficient + alpha * residual;
}

double combine_scores(const SentenceScore& coefficient, const SentenceScore& residual,
                      double alpha) {
  return combine_totals(coefficient.total, residual.total, alpha);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.5 * i));
  return grid;
}

std::size_t alpha_errors(std::span<const AlphaTrial> trials, double alpha) {
  std::size_t errors = 0;
  for (const auto& t : trials) {
    const AlphaCandidate* best = nullptr;
    double best_score = 0.0;
    for (const auto& c : t.candidates) {
      const double s = combine_totals(c.coefficient, c.residual, alpha);
      if (!best || s < best_score || (s == best_score && c.speaker < best->speaker)) {
        best = &c;
        best_score = s;
      }
    }
    if (!best || best->speaker != t.truth) ++errors;
  }
  return errors;
}

double grid_search_alpha(std::span<const AlphaTrial> trials, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, "grid_search_alpha: empty grid");
  double best_alpha = 0.0;
  std::size_t best_errors = std::numeric_limits<std::size_t>::max();
  for (double alpha : grid) {
    const std::size_t e = alpha_errors(trials, alpha);
    if (e < best_errors || (e == best_errors && alpha < best_alpha)) {
      best_errors = e;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

CorrelationMatrix correlation_matrix(std::span<const std::vector<double>> columns) {
  const std::size_t m = columns.size();
  if (m == 0) return {};
  const std::size_t n = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != n) throw Error(ErrorKind::invalid_argument, "correlation: ragged columns");
  }
  if (n < 2) throw Error(ErrorKind::invalid_argument, "correlation: need at least 2 rows");

  std::vector<std::vector<double>> centred(m, std::vector<double>(n));
  std::vector<double> ss(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (double v : columns[j]) mean += v;
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      centred[j][i] = columns[j][i] - mean;
      ss[j] += centred[j][i] * centred[j][i];
    }
  }
  CorrelationMatrix out(m, std::vector<std::optional<double>>(m));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      if (!(ss[a] > 0.0) || !(ss[b] > 0.0)) continue;
      double v = 1.0;
      if (a != b) {
        double cross = 0.0;
        for (std::size_t i = 0; i < n; ++i) cross += centred[a][i] * centred[b][i];
        v = std::clamp(cross / std::sqrt(ss[a] * ss[b]), -1.0, 1.0);
      }
      out[a][b] = v;
      out[b][a] = v;
    }
  }
  return out;
}

Histogram distortion_histograms(std::span<const LabeledScore> scores, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::invalid_argument, "histogram: zero bins");
  Histogram h;
  h.intra_counts.assign(bins, 0);
  h.inter_counts.assign(bins, 0);
  if (scores.empty()) return h;
  h.lo = scores.front().value;
  h.hi = scores.front().value;
  for (const auto& s : scores) {
    (s.truth == s.speaker ? h.intra : h.inter).push_back(s.value);
    h.lo = std::min(h.lo, s.value);
    h.hi = std::max(h.hi, s.value);
  }
  if (!(h.hi > h.lo)) h.hi = h.lo + 1.0;
  const double width = h.bin_width();
  auto bin_of = [&](double v) {
    const auto b = static_cast<std::size_t>(std::max(0.0, std::floor((v - h.lo) / width)));
    return std::min(b, bins - 1);
  };
  for (double v : h.intra) ++h.intra_counts[bin_of(v)];
  for (double v : h.inter) ++h.inter_counts[bin_of(v)];
  return h;
}

}  // namespace spkid
