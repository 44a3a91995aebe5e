#include "spkid/score_table.hpp"

#include <algorithm>
#include <optional>

#include "spkid/error.hpp"
#include "spkid/json_util.hpp"
#include "spkid/parallel.hpp"

namespace spkid {
namespace {

using nlohmann::json;

const PairScores& pair_of(const SentenceScores& row, std::size_t i) { return row.models[i]; }

double linear_total(const PairScores& p, int bits, MeasureKind kind) {
  const auto it = p.linear.find(bits);
  if (it == p.linear.end()) {
    throw Error(ErrorKind::missing_model, "score table lacks " + std::to_string(bits) +
                                              "-bit linear scores for '" + p.speaker + "'");
  }
  return it->second[measure_index(kind)];
}

double neural_score(const PairScores& p, int bits, int iteration) {
  const auto it = p.neural.find({bits, iteration});
  if (it == p.neural.end()) {
    throw Error(ErrorKind::missing_model,
                "score table lacks " + std::to_string(bits) + "-bit neural scores (iteration " +
                    std::to_string(iteration) + ") for '" + p.speaker + "'");
  }
  return it->second;
}

std::vector<SpeakerScore> linear_column(const SentenceScores& row, int bits, MeasureKind kind) {
  std::vector<SpeakerScore> out;
  for (const auto& p : row.models) out.push_back({p.speaker, linear_total(p, bits, kind)});
  return out;
}

std::string neural_column_name(const NeuralKey& k) {
  return "nn_b" + std::to_string(k.bits) + "_i" + std::to_string(k.iteration);
}

}  // namespace

ScoreTable compute_score_table(std::span<const UtteranceFeatures> tests,
                               std::span<const SpeakerModel> models, const FrontendConfig& cfg,
                               std::vector<int> linear_bits, std::vector<NeuralKey> neural_keys,
                               std::size_t threads, ScoringCounters* counters) {
  if (tests.empty()) throw Error(ErrorKind::invalid_argument, "score table: empty test set");
  if (models.empty()) throw Error(ErrorKind::invalid_argument, "score table: no models");
  std::sort(linear_bits.begin(), linear_bits.end());
  linear_bits.erase(std::unique(linear_bits.begin(), linear_bits.end()), linear_bits.end());
  std::sort(neural_keys.begin(), neural_keys.end());
  neural_keys.erase(std::unique(neural_keys.begin(), neural_keys.end()), neural_keys.end());

  std::vector<const SpeakerModel*> ordered;
  for (const auto& m : models) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->speaker < b->speaker; });
  for (const auto* m : ordered) {
    for (int b : linear_bits) m->linear_codebook(b);
    for (const auto& k : neural_keys) m->neural_codebook(k.bits, k.iteration);
  }

  ScoreTable table;
  for (const auto* m : ordered) table.speakers.push_back(m->speaker);
  table.linear_bits = linear_bits;
  table.neural_keys = neural_keys;
  table.rows.resize(tests.size());
  std::vector<ScoringCounters> local(tests.size());
  parallel_for(tests.size(), threads, [&](std::size_t t) {
    const auto& u = tests[t];
    SentenceScores row;
    row.sentence = u.sentence;
    row.truth = u.speaker;
    row.n_frames = u.frames.size();
    for (const auto* m : ordered) {
      PairScores p;
      p.speaker = m->speaker;
      for (int b : linear_bits) p.linear[b] = score_sentence_all(u, m->linear_codebook(b), cfg);
      for (const auto& k : neural_keys) {
        p.neural[k] = neural_total(u, m->neural_codebook(k.bits, k.iteration), &local[t]);
      }
      row.models.push_back(std::move(p));
    }
    table.rows[t] = std::move(row);
  });
  if (counters) {
    for (const auto& c : local) {
      counters->mlp_frame_evaluations += c.mlp_frame_evaluations;
      counters->neural_speakers += c.neural_speakers;
    }
  }
  return table;
}

IdentificationResult decide_from_scores(const SentenceScores& row, const SchemeSpec& spec,
                                        ScoringCounters* counters) {
  if (row.models.empty()) throw Error(ErrorKind::invalid_argument, "decide: no speakers");
  IdentificationResult r;
  r.scheme = spec.scheme;
  auto finish = [&](std::vector<SpeakerScore> scores) {
    r.predicted = scores[argmin_speaker(scores)].speaker;
    r.scores = std::move(scores);
    return r;
  };
  auto charge = [&](std::size_t speakers) {
    if (!counters) return;
    counters->mlp_frame_evaluations += speakers * row.n_frames * (std::size_t{1} << spec.neural_bits);
    counters->neural_speakers += speakers;
  };

  switch (spec.scheme) {
    case Scheme::linear:
      return finish(linear_column(row, spec.linear_bits, spec.measure));
    case Scheme::linear_combined: {
      auto scores = linear_column(row, spec.linear_bits, spec.measure);
      for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i].score = combine_totals(
            scores[i].score, linear_total(pair_of(row, i), spec.linear_bits, spec.residual_measure),
            spec.alpha);
      }
      return finish(std::move(scores));
    }
    case Scheme::s1: {
      std::vector<SpeakerScore> scores;
      for (const auto& p : row.models) {
        scores.push_back({p.speaker, neural_score(p, spec.neural_bits, spec.neural_iteration)});
      }
      charge(scores.size());
      return finish(std::move(scores));
    }
    case Scheme::s2:
    case Scheme::s3: {
      if (spec.scheme == Scheme::s3 && !(spec.alpha >= 0.0)) {
        throw Error(ErrorKind::invalid_argument, "alpha must be >= 0");
      }
      const auto lpcc = linear_column(row, spec.linear_bits, MeasureKind::m1);
      const auto shortlist = preselect(lpcc, spec.k);
      std::vector<SpeakerScore> scores;
      for (std::size_t i : shortlist) {
        const double nt = neural_score(pair_of(row, i), spec.neural_bits, spec.neural_iteration);
        const double s =
            spec.scheme == Scheme::s3 ? combine_totals(lpcc[i].score, nt, spec.alpha) : nt;
        scores.push_back({lpcc[i].speaker, s});
        r.shortlist.push_back(lpcc[i].speaker);
      }
      charge(shortlist.size());
      return finish(std::move(scores));
    }
  }
  throw Error(ErrorKind::invalid_argument, "unknown scheme");
}

EvaluationReport evaluate_table(const ScoreTable& table, const SchemeSpec& spec,
                                ScoringCounters* counters) {
  std::vector<SentenceDecision> decisions;
  decisions.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    decisions.push_back({row.sentence, row.truth, decide_from_scores(row, spec, counters)});
  }
  return summarize(spec, table.speakers, std::move(decisions));
}

std::vector<AlphaTrial> alpha_trials(const ScoreTable& table, const SchemeSpec& spec) {
  std::vector<AlphaTrial> trials;
  for (const auto& row : table.rows) {
    AlphaTrial t;
    t.truth = row.truth;
    if (spec.scheme == Scheme::linear_combined) {
      for (const auto& p : row.models) {
        t.candidates.push_back({p.speaker, linear_total(p, spec.linear_bits, spec.measure),
                                linear_total(p, spec.linear_bits, spec.residual_measure)});
      }
    } else if (spec.scheme == Scheme::s3) {
      const auto lpcc = linear_column(row, spec.linear_bits, MeasureKind::m1);
      for (std::size_t i : preselect(lpcc, spec.k)) {
        t.candidates.push_back(
            {lpcc[i].speaker, lpcc[i].score,
             neural_score(pair_of(row, i), spec.neural_bits, spec.neural_iteration)});
      }
    } else {
      throw Error(ErrorKind::invalid_argument, "alpha search needs a combined scheme");
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

ScoreTable heldout_score_table(std::span<const UtteranceFeatures> train, const TrainingConfig& cfg,
                               std::vector<int> linear_bits, std::vector<NeuralKey> neural_keys) {
  std::map<std::string, std::vector<const UtteranceFeatures*>> by_speaker;
  for (const auto& u : train) by_speaker[u.speaker].push_back(&u);
  std::size_t folds = 0;
  for (auto& [speaker, list] : by_speaker) {
    if (list.size() < 2) {
      throw Error(ErrorKind::insufficient_data,
                  "alpha calibration needs two training sentences for '" + speaker + "'");
    }
    std::stable_sort(list.begin(), list.end(),
                     [](const auto* a, const auto* b) { return a->sentence < b->sentence; });
    folds = std::max(folds, list.size());
  }

  ScoreTable out;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<UtteranceFeatures> fit;
    std::vector<UtteranceFeatures> held;
    for (const auto& [speaker, list] : by_speaker) {
      for (std::size_t i = 0; i < list.size(); ++i) (i == f ? held : fit).push_back(*list[i]);
    }
    const auto models = train_speakers(fit, cfg);
    ScoreTable part =
        compute_score_table(held, models, cfg.frontend, linear_bits, neural_keys, cfg.threads);
    if (f == 0) {
      out.speakers = part.speakers;
      out.linear_bits = part.linear_bits;
      out.neural_keys = part.neural_keys;
    }
    for (auto& row : part.rows) out.rows.push_back(std::move(row));
  }
  return out;
}

nlohmann::json to_json(const ScoreTable& table) {
  json keys = json::array();
  for (const auto& k : table.neural_keys) keys.push_back({k.bits, k.iteration});
  json rows = json::array();
  for (const auto& row : table.rows) {
    json models = json::array();
    for (const auto& p : row.models) {
      json linear = json::object();
      for (const auto& [b, v] : p.linear) linear[std::to_string(b)] = v;
      json neural = json::object();
      for (const auto& [k, v] : p.neural) neural[neural_column_name(k)] = v;
      models.push_back({{"speaker", p.speaker}, {"linear", linear}, {"neural", neural}});
    }
    rows.push_back({{"sentence", row.sentence},
                    {"truth", row.truth},
                    {"n_frames", row.n_frames},
                    {"models", models}});
  }
  return {{"speakers", table.speakers},
          {"linear_bits", table.linear_bits},
          {"neural_keys", keys},
          {"rows", rows}};
}

ScoreTable score_table_from_json(const nlohmann::json& j) {
  try {
    ScoreTable t;
    t.speakers = j.at("speakers").get<std::vector<std::string>>();
    t.linear_bits = j.at("linear_bits").get<std::vector<int>>();
    for (const auto& k : j.at("neural_keys")) {
      t.neural_keys.push_back({k.at(0).get<int>(), k.at(1).get<int>()});
    }
    for (const auto& r : j.at("rows")) {
      SentenceScores row;
      row.sentence = r.at("sentence").get<std::string>();
      row.truth = r.at("truth").get<std::string>();
      row.n_frames = r.at("n_frames").get<std::size_t>();
      for (const auto& m : r.at("models")) {
        PairScores p;
        p.speaker = m.at("speaker").get<std::string>();
        for (int b : t.linear_bits) {
          p.linear[b] = m.at("linear").at(std::to_string(b)).get<MeasureValues>();
        }
        for (const auto& k : t.neural_keys) {
          p.neural[k] = m.at("neural").at(neural_column_name(k)).get<double>();
        }
        row.models.push_back(std::move(p));
      }
      t.rows.push_back(std::move(row));
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed score table: ") + e.what());
  }
}

std::string score_table_csv(const ScoreTable& table) {
  std::string out = "sentence,truth,speaker,n_frames";
  for (int b : table.linear_bits) {
    for (MeasureKind m : kAllMeasures) {
      out += ",b" + std::to_string(b) + "_m" + std::to_string(measure_number(m));
    }
  }
  for (const auto& k : table.neural_keys) out += "," + neural_column_name(k);
  out += "\n";
  for (const auto& row : table.rows) {
    for (const auto& p : row.models) {
      out += row.sentence + "," + row.truth + "," + p.speaker + "," + std::to_string(row.n_frames);
      for (int b : table.linear_bits) {
        for (double v : p.linear.at(b)) out += "," + format_double(v);
      }
      for (const auto& k : table.neural_keys) out += "," + format_double(p.neural.at(k));
      out += "\n";
    }
  }
  return out;
}

}  // namespace spkid
