#include "spkid/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>
#include <sstream>

#include "spkid/error.hpp"
#include "spkid/json_util.hpp"

namespace spkid {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class StageLog {
 public:
  void stage(const std::string& name, std::chrono::steady_clock::time_point since) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    lines_ << "stage " << name << " " << buf << " s\n";
  }
  std::ostringstream& out() { return lines_; }
  std::string str() const { return lines_.str(); }

 private:
  std::ostringstream lines_;
};

auto now() { return std::chrono::steady_clock::now(); }

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

fs::path resolve_against(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

bool needs_calibration(const ExperimentConfig& cfg) {
  return !cfg.alpha && (!cfg.combinations.empty() || cfg.has_scheme(Scheme::s3));
}

TrainingConfig calibration_training(const ExperimentConfig& cfg) {
  TrainingConfig t = cfg.training;
  t.neural = t.neural && cfg.has_scheme(Scheme::s3);
  return t;
}

std::vector<NeuralKey> calibration_keys(const ExperimentConfig& cfg) {
  return cfg.has_scheme(Scheme::s3) ? cfg.neural_keys() : std::vector<NeuralKey>{};
}

bool table_covers(const ScoreTable& t, const std::vector<int>& bits,
                  const std::vector<NeuralKey>& keys) {
  for (int b : bits) {
    if (std::find(t.linear_bits.begin(), t.linear_bits.end(), b) == t.linear_bits.end()) return false;
  }
  for (const auto& k : keys) {
    if (std::find(t.neural_keys.begin(), t.neural_keys.end(), k) == t.neural_keys.end()) return false;
  }
  return !t.rows.empty();
}

std::vector<UtteranceFeatures> load_features(const CorpusManifest& manifest, Role role,
                                             const ExperimentConfig& cfg) {
  const auto utts = load_corpus(manifest, role, cfg.training.threads);
  return analyze_utterances(utts, cfg.training.frontend, cfg.training.threads);
}

std::string counters_line(const std::string& label, const ScoringCounters& c) {
  return "counters " + label + " mlp_frame_evaluations=" + std::to_string(c.mlp_frame_evaluations) +
         " neural_speakers=" + std::to_string(c.neural_speakers) + "\n";
}

}  // namespace

// --- Configuration ---------------------------------------------------------

bool ExperimentConfig::has_scheme(Scheme s) const {
  return std::find(schemes.begin(), schemes.end(), s) != schemes.end();
}

std::vector<int> ExperimentConfig::neural_iterations() const {
  std::vector<int> its;
  for (int i = 0; i <= training.neural_options.iterations; ++i) {
    if (training.keeps_snapshot(i)) its.push_back(i);
  }
  return its;
}

std::vector<NeuralKey> ExperimentConfig::neural_keys() const {
  std::vector<NeuralKey> keys;
  if (!training.neural) return keys;
  for (int b : sorted_unique(training.neural_bits)) {
    for (int it : neural_iterations()) keys.push_back({b, it});
  }
  return keys;
}

void ExperimentConfig::validate() const {
  training.validate();
  if (corpus.empty()) throw Error(ErrorKind::config, "corpus manifest path is not set");
  if (output_dir.empty()) throw Error(ErrorKind::config, "output_dir is not set");
  if (measures.empty()) throw Error(ErrorKind::config, "measures must not be empty");
  for (const auto& [c, r] : combinations) {
    if (!is_coefficient_measure(c) || is_coefficient_measure(r)) {
      throw Error(ErrorKind::config,
                  "a combination pairs a coefficient measure (1-2) with a residual measure (3-6)");
    }
  }
  for (Scheme s : schemes) {
    if (s != Scheme::s1 && s != Scheme::s2 && s != Scheme::s3) {
      throw Error(ErrorKind::config, std::string("schemes lists neural schemes only, got ") +
                                         to_string(s));
    }
    if (!training.neural) {
      throw Error(ErrorKind::config,
                  std::string("scheme ") + to_string(s) + " needs neural.enabled = true");
    }
  }
  if (k < 1) throw Error(ErrorKind::config, "k must be >= 1");
  if (alpha && !(*alpha >= 0.0)) throw Error(ErrorKind::config, "alpha must be >= 0");
  if (alpha_grid.empty()) throw Error(ErrorKind::config, "alpha_grid must not be empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0)) throw Error(ErrorKind::config, "alpha_grid values must be >= 0");
  }
  for (int b : stats_bits) {
    if (std::find(training.bits.begin(), training.bits.end(), b) == training.bits.end()) {
      throw Error(ErrorKind::config, "stats bits " + std::to_string(b) + " is not a codebook size");
    }
  }
  if (histogram_bins < 1) throw Error(ErrorKind::config, "histogram bins must be >= 1");
}

void ExperimentConfig::validate(const CorpusManifest& manifest) const {
  validate();
  manifest.validate(true);
  const auto n = manifest.speakers().size();
  if (n < 1) throw Error(ErrorKind::config, "manifest lists no speakers");
  if (!schemes.empty() && k > n) {
    throw Error(ErrorKind::config, "k = " + std::to_string(k) + " exceeds the " +
                                       std::to_string(n) + " speakers of the corpus");
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json j = to_json(cfg.training);
  json measures = json::array();
  for (auto m : cfg.measures) measures.push_back(measure_number(m));
  json combos = json::array();
  for (const auto& [c, r] : cfg.combinations) combos.push_back({measure_number(c), measure_number(r)});
  json schemes = json::array();
  for (auto s : cfg.schemes) schemes.push_back(to_string(s));
  j["threads"] = cfg.training.threads;
  j["measures"] = measures;
  j["combinations"] = combos;
  j["schemes"] = schemes;
  j["k"] = cfg.k;
  j["alpha"] = cfg.alpha ? json(*cfg.alpha) : json("auto");
  j["alpha_grid"] = cfg.alpha_grid;
  j["stats"] = {{"bits", cfg.stats_bits}, {"bins", cfg.histogram_bins}};
  j["corpus"] = cfg.corpus.string();
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

std::optional<double> parse_alpha(const std::string& text) {
  if (text == "auto") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !(v >= 0.0)) {
    throw Error(ErrorKind::config, "alpha must be \"auto\" or a number >= 0, got '" + text + "'");
  }
  return v;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::config, "experiment config must be a JSON object");
  static const std::set<std::string> known = {
      "frontend", "codebook_bits", "split_method", "vq", "neural", "seed", "threads",
      "measures", "combinations", "schemes", "k", "alpha", "alpha_grid", "stats",
      "corpus", "output_dir"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw Error(ErrorKind::config, "unknown config key '" + it.key() + "'");
  }
  ExperimentConfig cfg;
  cfg.training = training_config_from_json(j);
  try {
    cfg.training.threads = j.value("threads", std::size_t{0});
    if (j.contains("measures")) {
      cfg.measures.clear();
      for (const auto& m : j.at("measures")) cfg.measures.push_back(measure_from_number(m.get<int>()));
    }
    if (j.contains("combinations")) {
      cfg.combinations.clear();
      for (const auto& c : j.at("combinations")) {
        if (!c.is_array() || c.size() != 2) {
          throw Error(ErrorKind::config, "each combination is a pair [coefficient, residual]");
        }
        cfg.combinations.emplace_back(measure_from_number(c.at(0).get<int>()),
                                      measure_from_number(c.at(1).get<int>()));
      }
    }
    if (j.contains("schemes")) {
      for (const auto& s : j.at("schemes")) cfg.schemes.push_back(scheme_from_string(s.get<std::string>()));
    } else if (cfg.training.neural) {
      cfg.schemes = {Scheme::s1, Scheme::s2, Scheme::s3};
    }
    if (j.contains("k")) {
      const auto k = j.at("k").get<long long>();
      if (k < 1) throw Error(ErrorKind::config, "k must be >= 1");
      cfg.k = static_cast<std::size_t>(k);
    }
    if (j.contains("alpha")) {
      const auto& a = j.at("alpha");
      cfg.alpha = a.is_string() ? parse_alpha(a.get<std::string>()) : std::optional(a.get<double>());
    }
    if (j.contains("alpha_grid")) cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
    if (j.contains("stats")) {
      const auto& s = j.at("stats");
      if (s.contains("bits")) cfg.stats_bits = s.at("bits").get<std::vector<int>>();
      cfg.histogram_bins = s.value("bins", cfg.histogram_bins);
    }
    if (j.contains("corpus")) cfg.corpus = resolve_against(j.at("corpus").get<std::string>(), base_dir);
    if (j.contains("output_dir")) {
      cfg.output_dir = resolve_against(j.at("output_dir").get<std::string>(), base_dir);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("experiment config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

void apply_overrides(ExperimentConfig& cfg, const ConfigOverrides& o) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  if (o.bits) cfg.training.bits = *o.bits;
  if (o.schemes) {
    cfg.schemes.clear();
    for (const auto& s : *o.schemes) cfg.schemes.push_back(scheme_from_string(s));
  }
  if (o.k) cfg.k = *o.k;
  if (o.alpha) cfg.alpha = parse_alpha(*o.alpha);
  if (o.seed) cfg.training.seed = *o.seed;
  if (o.corpus) cfg.corpus = *o.corpus;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
}

// --- Commands --------------------------------------------------------------

RunArtifacts cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto manifest = read_manifest(cfg.corpus);
  cfg.validate(manifest);
  const OutputLayout out{cfg.output_dir};
  StageLog log;

  auto t0 = now();
  const auto feats = load_features(manifest, Role::train, cfg);
  log.stage("load_train", t0);

  t0 = now();
  std::vector<SpeakerTrainingTrace> traces;
  const auto models = train_speakers(feats, cfg.training, &traces);
  log.stage("train_models", t0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (const auto& [b, mads] : traces[i].neural_total_mad) {
      log.out() << "neural " << models[i].speaker << " b" << b << " total_mad";
      for (double m : mads) log.out() << " " << format_double(m);
      log.out() << "\n";
    }
  }

  std::optional<ScoreTable> calibration;
  if (needs_calibration(cfg)) {
    t0 = now();
    calibration = heldout_score_table(feats, calibration_training(cfg), cfg.training.bits,
                                      calibration_keys(cfg));
    log.stage("calibration", t0);
  }

  RunArtifacts artifacts;
  try {
    if (fs::is_directory(out.models())) {
      for (const auto& e : fs::directory_iterator(out.models())) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.find("__b") != std::string::npos &&
            e.path().extension() == ".json") {
          fs::remove(e.path());
        }
      }
    }
    for (const auto& m : models) {
      for (int b : sorted_unique(cfg.training.bits)) {
        const auto path = out.models() / model_file_name(m.speaker, b);
        write_model_file(model_for_bits(m, b), path);
        artifacts.files.push_back(path);
      }
    }
    if (calibration) {
      write_text_file(out.calibration(), dump_json(to_json(*calibration)));
      artifacts.files.push_back(out.calibration());
    }
    log.out() << "models " << models.size() << " speakers, "
              << sorted_unique(cfg.training.bits).size() << " sizes\n";
    write_text_file(out.log("train"), log.str());
    artifacts.files.push_back(out.log("train"));
  } catch (...) {
    std::error_code ec;
    for (const auto& f : artifacts.files) fs::remove(f, ec);
    throw;
  }
  return artifacts;
}

RunArtifacts cmd_evaluate(const ExperimentConfig& cfg, const std::optional<fs::path>& models_dir) {
  cfg.validate();
  const auto manifest = read_manifest(cfg.corpus);
  cfg.validate(manifest);
  const OutputLayout out{cfg.output_dir};
  StageLog log;
  const auto bits = sorted_unique(cfg.training.bits);
  const auto keys = cfg.needs_neural_scores() ? cfg.neural_keys() : std::vector<NeuralKey>{};

  auto t0 = now();
  const auto models = read_model_dir(models_dir.value_or(out.models()));
  for (const auto& speaker : manifest.speakers()) {
    const bool found = std::any_of(models.begin(), models.end(),
                                   [&](const auto& m) { return m.speaker == speaker; });
    if (!found) throw Error(ErrorKind::missing_model, "no model for speaker '" + speaker + "'");
  }
  for (const auto& m : models) {
    if (m.config.contains("frontend") &&
        !(frontend_from_json(m.config.at("frontend")) == cfg.training.frontend)) {
      throw Error(ErrorKind::config,
                  "model of '" + m.speaker + "' was trained with different frontend settings");
    }
  }
  log.stage("load_models", t0);

  t0 = now();
  const auto tests = load_features(manifest, Role::test, cfg);
  log.stage("load_test", t0);

  t0 = now();
  ScoringCounters table_counters;
  const ScoreTable table = compute_score_table(tests, models, cfg.training.frontend, bits, keys,
                                               cfg.training.threads, &table_counters);
  log.stage("score_table", t0);
  log.out() << counters_line("score_table", table_counters);

  std::optional<ScoreTable> calibration;
  if (needs_calibration(cfg)) {
    t0 = now();
    const auto ckeys = calibration_keys(cfg);
    if (fs::exists(out.calibration())) {
      calibration = score_table_from_json(read_json_file(out.calibration()));
      if (!table_covers(*calibration, bits, ckeys)) calibration.reset();
    }
    if (!calibration) {
      const auto train = load_features(manifest, Role::train, cfg);
      calibration = heldout_score_table(train, calibration_training(cfg), bits, ckeys);
    }
    log.stage("calibration", t0);
  }
  auto pick_alpha = [&](const SchemeSpec& spec) {
    if (cfg.alpha) return *cfg.alpha;
    return grid_search_alpha(alpha_trials(*calibration, spec), cfg.alpha_grid);
  };

  json cells = json::array();
  auto record = [&](const std::string& table_name, const std::string& row, const std::string& col,
                    const EvaluationReport& r) {
    cells.push_back({{"table", table_name},
                     {"row", row},
                     {"column", col},
                     {"spec", to_json(r.spec)},
                     {"errors", r.errors},
                     {"total", r.total},
                     {"error_rate", r.error_rate},
                     {"speakers", r.speakers},
                     {"confusion", r.confusion}});
    return r.error_rate;
  };

  RunArtifacts artifacts;
  std::vector<std::pair<fs::path, std::string>> files;
  std::vector<std::string> bit_rows;
  for (int b : bits) bit_rows.push_back(std::to_string(b));

  t0 = now();
  {
    std::vector<std::string> cols;
    for (auto m : cfg.measures) cols.push_back("m" + std::to_string(measure_number(m)));
    std::vector<std::vector<double>> grid;
    for (int b : bits) {
      auto& row = grid.emplace_back();
      for (auto m : cfg.measures) {
        SchemeSpec spec;
        spec.scheme = Scheme::linear;
        spec.measure = m;
        spec.linear_bits = b;
        row.push_back(record("linear", std::to_string(b), "m" + std::to_string(measure_number(m)),
                             evaluate_table(table, spec)));
      }
    }
    files.emplace_back(out.tables() / "linear.csv", grid_csv("bits", cols, bit_rows, grid));
  }

  if (!cfg.combinations.empty()) {
    std::vector<std::string> cols;
    for (const auto& [c, r] : cfg.combinations) {
      cols.push_back("m" + std::to_string(measure_number(c)) + "+m" +
                     std::to_string(measure_number(r)));
    }
    std::vector<std::vector<double>> grid;
    std::vector<std::vector<double>> alphas;
    for (int b : bits) {
      auto& row = grid.emplace_back();
      auto& arow = alphas.emplace_back();
      for (std::size_t i = 0; i < cfg.combinations.size(); ++i) {
        SchemeSpec spec;
        spec.scheme = Scheme::linear_combined;
        spec.measure = cfg.combinations[i].first;
        spec.residual_measure = cfg.combinations[i].second;
        spec.linear_bits = b;
        spec.alpha = pick_alpha(spec);
        arow.push_back(spec.alpha);
        row.push_back(record("combined", std::to_string(b), cols[i], evaluate_table(table, spec)));
      }
    }
    files.emplace_back(out.tables() / "combined.csv", grid_csv("bits", cols, bit_rows, grid));
    files.emplace_back(out.tables() / "combined_alpha.csv", grid_csv("bits", cols, bit_rows, alphas));
  }

  std::vector<int> nbits;
  for (const auto& k : keys) nbits.push_back(k.bits);
  nbits = sorted_unique(nbits);
  std::vector<std::string> ncols;
  for (int b : nbits) ncols.push_back("nn" + std::to_string(b));

  if (cfg.has_scheme(Scheme::s1)) {
    ScoringCounters c;
    std::vector<std::string> rows;
    std::vector<std::vector<double>> grid;
    for (int it : cfg.neural_iterations()) {
      rows.push_back("iter" + std::to_string(it));
      auto& row = grid.emplace_back();
      for (int nb : nbits) {
        SchemeSpec spec;
        spec.scheme = Scheme::s1;
        spec.neural_bits = nb;
        spec.neural_iteration = it;
        row.push_back(record("s1", rows.back(), "nn" + std::to_string(nb), evaluate_table(table, spec, &c)));
      }
    }
    files.emplace_back(out.tables() / "s1.csv", grid_csv("iteration", ncols, rows, grid));
    log.out() << counters_line("s1", c);
  }

  for (Scheme s : {Scheme::s2, Scheme::s3}) {
    if (!cfg.has_scheme(s)) continue;
    const std::string name = to_string(s);
    ScoringCounters c;
    for (int it : cfg.neural_iterations()) {
      std::vector<std::vector<double>> grid;
      std::vector<std::vector<double>> alphas;
      const std::string tname = name + "_iter" + std::to_string(it);
      for (int b : bits) {
        auto& row = grid.emplace_back();
        auto& arow = alphas.emplace_back();
        for (int nb : nbits) {
          SchemeSpec spec;
          spec.scheme = s;
          spec.k = cfg.k;
          spec.linear_bits = b;
          spec.neural_bits = nb;
          spec.neural_iteration = it;
          if (s == Scheme::s3) spec.alpha = pick_alpha(spec);
          arow.push_back(spec.alpha);
          row.push_back(record(tname, std::to_string(b), "nn" + std::to_string(nb),
                               evaluate_table(table, spec, &c)));
        }
      }
      files.emplace_back(out.tables() / (tname + ".csv"), grid_csv("bits", ncols, bit_rows, grid));
      if (s == Scheme::s3) {
        files.emplace_back(out.tables() / (tname + "_alpha.csv"),
                           grid_csv("bits", ncols, bit_rows, alphas));
      }
    }
    log.out() << counters_line(name, c);
  }
  log.stage("decisions", t0);

  json report = {{"config", to_json(cfg)},
                 {"test_sentences", tests.size()},
                 {"speakers", table.speakers},
                 {"cells", cells}};
  files.emplace_back(out.report(), dump_json(report));
  files.emplace_back(out.scores_json(), dump_json(to_json(table)));
  files.emplace_back(out.scores_csv(), score_table_csv(table));

  try {
    for (const auto& [path, text] : files) {
      write_text_file(path, text);
      artifacts.files.push_back(path);
    }
    write_text_file(out.log("evaluate"), log.str());
    artifacts.files.push_back(out.log("evaluate"));
  } catch (...) {
    std::error_code ec;
    for (const auto& f : artifacts.files) fs::remove(f, ec);
    throw;
  }
  return artifacts;
}

RunArtifacts cmd_synth_corpus(int n_speakers, std::uint64_t seed, const fs::path& out_dir,
                              const SynthOptions& options) {
  if (n_speakers < 2) throw Error(ErrorKind::invalid_argument, "synth-corpus needs >= 2 speakers");
  const auto corpus = generate_synthetic_corpus(n_speakers, seed, options);
  write_synthetic_corpus(corpus, out_dir);
  RunArtifacts artifacts;
  artifacts.files.push_back(out_dir / "manifest.json");
  for (const auto& e : corpus.manifest.entries) artifacts.files.push_back(out_dir / e.path);
  return artifacts;
}

std::string grid_csv(const std::string& corner, const std::vector<std::string>& columns,
                     const std::vector<std::string>& rows,
                     const std::vector<std::vector<double>>& cells) {
  std::string out = corner;
  for (const auto& c : columns) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += rows[r];
    for (double v : cells.at(r)) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace spkid
