#include <algorithm>
#include <chrono>

#include "spkid/error.hpp"
#include "spkid/experiment.hpp"
#include "spkid/json_util.hpp"

namespace spkid {
namespace {

namespace fs = std::filesystem;

std::string measure_label(MeasureKind m) { return "m" + std::to_string(measure_number(m)); }

}  // namespace

std::vector<std::vector<double>> mean_score_columns(const ScoreTable& table, int bits) {
  std::vector<std::vector<double>> cols(kMeasureCount);
  for (const auto& row : table.rows) {
    const double n = static_cast<double>(row.n_frames);
    for (const auto& p : row.models) {
      const auto it = p.linear.find(bits);
      if (it == p.linear.end()) {
        throw Error(ErrorKind::missing_model,
                    "score table has no " + std::to_string(bits) + "-bit scores");
      }
      for (std::size_t m = 0; m < kMeasureCount; ++m) cols[m].push_back(it->second[m] / n);
    }
  }
  return cols;
}

std::string correlation_csv(const CorrelationMatrix& matrix,
                            const std::vector<std::string>& labels) {
  std::string out = "measure";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (std::size_t a = 0; a < matrix.size(); ++a) {
    out += labels.at(a);
    for (const auto& v : matrix[a]) out += "," + (v ? format_double(*v) : std::string());
    out += "\n";
  }
  return out;
}

std::string histogram_csv(const std::vector<HistogramSeries>& series) {
  std::string out = "series,bin,lo,hi,intra,inter\n";
  for (const auto& s : series) {
    const auto& h = s.histogram;
    const double w = h.bin_width();
    for (std::size_t b = 0; b < h.intra_counts.size(); ++b) {
      out += s.name + "," + std::to_string(b) + "," +
             format_double(h.lo + w * static_cast<double>(b)) + "," +
             format_double(h.lo + w * static_cast<double>(b + 1)) + "," +
             std::to_string(h.intra_counts[b]) + "," + std::to_string(h.inter_counts[b]) + "\n";
    }
  }
  return out;
}

std::string dispersion_csv(const ScoreTable& table, int bits, MeasureKind a, MeasureKind b) {
  std::string out = "sentence,truth,speaker,intra," + measure_label(a) + "," + measure_label(b) + "\n";
  for (const auto& row : table.rows) {
    const double n = static_cast<double>(row.n_frames);
    for (const auto& p : row.models) {
      const auto& v = p.linear.at(bits);
      out += row.sentence + "," + row.truth + "," + p.speaker + "," +
             (p.speaker == row.truth ? "1" : "0") + "," + format_double(v[measure_index(a)] / n) +
             "," + format_double(v[measure_index(b)] / n) + "\n";
    }
  }
  return out;
}

RunArtifacts cmd_export_stats(const ExperimentConfig& cfg, const std::optional<fs::path>& scores) {
  cfg.validate();
  const OutputLayout out{cfg.output_dir};
  const fs::path source = scores.value_or(out.scores_json());
  if (!fs::exists(source)) {
    throw Error(ErrorKind::missing_model,
                "score table not found: " + source.string() + " (run evaluate first)");
  }
  const auto start = std::chrono::steady_clock::now();
  const ScoreTable table = score_table_from_json(read_json_file(source));
  if (table.rows.empty()) throw Error(ErrorKind::insufficient_data, "score table has no rows");

  std::vector<int> bits = cfg.stats_bits.empty() ? table.linear_bits : cfg.stats_bits;
  std::sort(bits.begin(), bits.end());
  bits.erase(std::unique(bits.begin(), bits.end()), bits.end());

  std::vector<std::string> labels;
  for (MeasureKind m : kAllMeasures) labels.push_back(measure_label(m));

  std::vector<std::pair<fs::path, std::string>> files;
  std::vector<HistogramSeries> series;
  for (int b : bits) {
    const fs::path dir = out.stats() / ("b" + std::to_string(b));
    const auto cols = mean_score_columns(table, b);
    if (cols.front().size() < 2) {
      throw Error(ErrorKind::insufficient_data, "correlation needs at least two score rows");
    }
    files.emplace_back(dir / "correlation.csv", correlation_csv(correlation_matrix(cols), labels));
    for (std::size_t i = 0; i < kMeasureCount; ++i) {
      for (std::size_t j = i + 1; j < kMeasureCount; ++j) {
        files.emplace_back(dir / ("dispersion_" + labels[i] + "_" + labels[j] + ".csv"),
                           dispersion_csv(table, b, kAllMeasures[i], kAllMeasures[j]));
      }
    }
    for (MeasureKind m : kAllMeasures) {
      std::vector<LabeledScore> scores;
      for (const auto& row : table.rows) {
        for (const auto& p : row.models) {
          scores.push_back({row.truth, p.speaker,
                            p.linear.at(b)[measure_index(m)] / static_cast<double>(row.n_frames)});
        }
      }
      series.push_back({"b" + std::to_string(b) + "_" + measure_label(m),
                        distortion_histograms(scores, cfg.histogram_bins)});
    }
  }
  for (const auto& k : table.neural_keys) {
    std::vector<LabeledScore> scores;
    for (const auto& row : table.rows) {
      for (const auto& p : row.models) {
        scores.push_back({row.truth, p.speaker, p.neural.at(k) / static_cast<double>(row.n_frames)});
      }
    }
    series.push_back({"nn_b" + std::to_string(k.bits) + "_i" + std::to_string(k.iteration),
                      distortion_histograms(scores, cfg.histogram_bins)});
  }
  files.emplace_back(out.stats() / "histograms.csv", histogram_csv(series));

  RunArtifacts artifacts;
  try {
    for (const auto& [path, text] : files) {
      write_text_file(path, text);
      artifacts.files.push_back(path);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_file(out.log("export_stats"),
                    "stage export_stats " + format_double(secs) + " s\nfiles " +
                        std::to_string(artifacts.files.size()) + "\n");
    artifacts.files.push_back(out.log("export_stats"));
  } catch (...) {
    std::error_code ec;
    for (const auto& f : artifacts.files) fs::remove(f, ec);
    throw;
  }
  return artifacts;
}

}  // namespace spkid
