// Acceptance checks. Prints one line per criterion and exits non-zero when any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "spkid/error.hpp"
#include "spkid/experiment.hpp"
#include "spkid/json_util.hpp"
#include "spkid/mlp.hpp"
#include "test_util.hpp"

using namespace spkid;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::pass : Status::fail, std::move(detail)};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> windowed_frames(std::mt19937_64& rng, std::size_t count) {
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    const auto a = oracle::random_pole_lpc(rng, 10, 0.5, 0.97);
    const auto x = oracle::ar_signal(a, 1200, rng);
    for (const auto& f : frame_signal(x, FrontendConfig{})) {
      if (out.size() == count) break;
      out.push_back(autocorrelate(f, 10));
    }
  }
  return out;
}

// --- AC1 ---------------------------------------------------------------------

Outcome levinson_vs_toeplitz() {
  std::mt19937_64 rng(101);
  const auto rs = windowed_frames(rng, 200);
  double worst = 0.0;
  for (const auto& r : rs) {
    const auto model = levinson(r);
    if (model.degenerate || model.regularized) return {Status::fail, "degenerate frame drawn"};
    const auto ref = oracle::toeplitz_lpc(r);
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(model.a[i] - ref[i]));
  }
  return verdict(worst <= 1e-8, "max |a - a_ref| = " + num(worst) + " over 200 frames");
}

// --- AC2 ---------------------------------------------------------------------

Outcome cepstrum_vs_spectrum() {
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto a = oracle::random_pole_lpc(rng, 10, 0.3, 0.95);
    const auto c = lpc_to_cepstrum(a, 12);
    const auto ref = oracle::spectral_cepstrum(a, 12);
    for (std::size_t n = 0; n < 12; ++n) worst = std::max(worst, std::abs(c[n] - ref[n]));
  }
  return verdict(worst <= 1e-6, "max |c - c_ref| = " + num(worst) + " over 100 models x 12");
}

// --- AC3 ---------------------------------------------------------------------

struct TraceAudit {
  std::size_t runs = 0;
  std::size_t steps = 0;
  std::size_t violations = 0;
  std::size_t size_errors = 0;
};

void audit_trace(const VqTrace& trace, int bits, const LinearCodebook& cb, TraceAudit& audit) {
  ++audit.runs;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& cur = trace.steps[i];
    ++audit.steps;
    if (cur.codebook_size != (std::size_t{1} << cur.stage)) ++audit.size_errors;
    if (i == 0) continue;
    const auto& prev = trace.steps[i - 1];
    if (cur.stage != prev.stage) {
      if (cur.stage != prev.stage + 1) ++audit.size_errors;
      continue;
    }
    if (cur.repaired || prev.repaired) continue;
    if (cur.distortion > prev.distortion * (1.0 + 1e-12)) ++audit.violations;
  }
  if (trace.steps.empty() || trace.steps.back().stage != bits) ++audit.size_errors;
  if (!cb.degenerate && cb.size() != (std::size_t{1} << bits)) ++audit.size_errors;
}

Outcome vq_monotonicity(std::span<const UtteranceFeatures> train) {
  TraceAudit audit;
  for (SplitMethod method : {SplitMethod::hyperplane, SplitMethod::std_deviation}) {
    TrainingConfig cfg;
    cfg.bits = {1, 2, 3, 4, 5, 6, 7};
    cfg.split = method;
    std::vector<SpeakerTrainingTrace> traces;
    const auto models = train_speakers(train, cfg, &traces);
    for (std::size_t s = 0; s < models.size(); ++s) {
      for (int b : cfg.bits) audit_trace(traces[s].vq.at(b), b, models[s].linear_codebook(b), audit);
    }
  }
  std::mt19937_64 rng(103);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec> v(300, Vec(12));
    for (auto& x : v) {
      for (double& c : x) c = g(rng);
    }
    VqTrace trace;
    const auto cb = train_codebook(v, v, 5, t % 2 ? SplitMethod::hyperplane : SplitMethod::std_deviation,
                                   VqOptions{}, &trace);
    audit_trace(trace, 5, cb, audit);
  }
  return verdict(audit.violations == 0 && audit.size_errors == 0,
                 std::to_string(audit.runs) + " runs, " + std::to_string(audit.steps) +
                     " Lloyd steps, " + std::to_string(audit.violations) + " increases, " +
                     std::to_string(audit.size_errors) + " size errors");
}

// --- AC4 ---------------------------------------------------------------------

Outcome quantizer_correctness() {
  std::mt19937_64 rng(104);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> bits_of(0, 7);
  std::size_t mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    LinearCodebook cb;
    cb.bits = bits_of(rng);
    std::vector<std::vector<double>> words(std::size_t{1} << cb.bits, std::vector<double>(12));
    for (auto& w : words) {
      for (double& c : w) c = g(rng);
      cb.codewords.push_back({w, Vec(10, 0.0), 1});
    }
    std::vector<double> v(12);
    for (double& c : v) c = g(rng);
    for (bool absolute : {false, true}) {
      const auto [idx, d] = oracle::scan_nearest(v, words, absolute);
      const auto q = quantize(v, cb, absolute ? CoefficientMetric::mad : CoefficientMetric::mse);
      if (q.index != idx || std::abs(q.distance - d) > 1e-12 * std::max(1.0, d)) ++mismatches;
    }
  }
  // Constructed ties: the query sits exactly between codewords.
  std::size_t tie_errors = 0;
  LinearCodebook tie;
  tie.bits = 3;
  for (int i = 0; i < 8; ++i) tie.codewords.push_back({Vec(12, static_cast<double>(i % 4)), Vec(10, 0.0), 1});
  for (int lo = 0; lo < 3; ++lo) {
    const Vec v(12, lo + 0.5);
    for (auto metric : {CoefficientMetric::mse, CoefficientMetric::mad}) {
      if (quantize(v, tie, metric).index != static_cast<std::size_t>(lo)) ++tie_errors;
    }
  }
  // Duplicate codewords: the exact match resolves to its first copy.
  if (quantize(Vec(12, 2.0), tie).index != 2) ++tie_errors;
  return verdict(mismatches == 0 && tie_errors == 0,
                 std::to_string(mismatches) + " mismatches in 2000 scans, " +
                     std::to_string(tie_errors) + " tie errors");
}

// --- AC5 ---------------------------------------------------------------------

Outcome measure_identities(std::span<const UtteranceFeatures> tests,
                           std::span<const SpeakerModel> models, const FrontendConfig& fe) {
  std::size_t residuals = 0;
  std::size_t order_violations = 0;
  double worst_zero_mean = 0.0;
  for (const auto& utt : tests) {
    for (const auto& m : models) {
      const auto& cb = m.linear_codebook(4);
      for (const auto& cw : cb.codewords) {
        const auto whole = signal_residual(utt.signal, cw.lpc);
        for (const auto& f : utt.frames) {
          std::vector<double> e(whole.begin() + static_cast<std::ptrdiff_t>(f.frame.offset),
                                whole.begin() + static_cast<std::ptrdiff_t>(f.frame.offset +
                                                                            f.frame.samples.size()));
          const auto v = residual_measures(e);
          ++residuals;
          if (v[5] > v[2]) ++order_violations;
          double mean = 0.0;
          for (double x : e) mean += x;
          mean /= static_cast<double>(e.size());
          for (double& x : e) x -= mean;
          const auto z = residual_measures(e);
          worst_zero_mean = std::max(worst_zero_mean, std::abs(z[5] - z[2]));
        }
      }
    }
  }

  // alpha = 0 leaves the coefficient ranking untouched, decision and order.
  std::vector<NeuralKey> none;
  const auto table = compute_score_table(tests, models, fe, {4, 5}, none);
  std::size_t ranking_errors = 0;
  for (const auto& row : table.rows) {
    for (int b : table.linear_bits) {
      for (auto [c, r] : {std::pair{MeasureKind::m1, MeasureKind::m3},
                          std::pair{MeasureKind::m2, MeasureKind::m3},
                          std::pair{MeasureKind::m2, MeasureKind::m4}}) {
        std::vector<SpeakerScore> coef;
        std::vector<SpeakerScore> comb;
        for (const auto& p : row.models) {
          const auto& v = p.linear.at(b);
          coef.push_back({p.speaker, v[measure_index(c)]});
          comb.push_back({p.speaker, combine_totals(v[measure_index(c)], v[measure_index(r)], 0.0)});
        }
        if (preselect(coef, coef.size()) != preselect(comb, comb.size())) ++ranking_errors;
        SchemeSpec lin;
        lin.measure = c;
        lin.linear_bits = b;
        SchemeSpec fused = lin;
        fused.scheme = Scheme::linear_combined;
        fused.residual_measure = r;
        fused.alpha = 0.0;
        if (decide_from_scores(row, lin).predicted != decide_from_scores(row, fused).predicted) {
          ++ranking_errors;
        }
      }
    }
  }
  return verdict(order_violations == 0 && worst_zero_mean <= 1e-12 && ranking_errors == 0,
                 std::to_string(residuals) + " residuals, " + std::to_string(order_violations) +
                     " with M6 > M3, zero-mean max |M6 - M3| = " + num(worst_zero_mean) + ", " +
                     std::to_string(ranking_errors) + " alpha=0 ranking differences");
}

// --- AC6 ---------------------------------------------------------------------

Outcome scheme_degeneracies(std::span<const UtteranceFeatures> tests,
                            std::span<const SpeakerModel> models, const FrontendConfig& fe) {
  const std::size_t n = models.size();
  std::size_t differ_s1 = 0;
  std::size_t differ_k1 = 0;
  std::size_t differ_s3 = 0;
  for (const auto& utt : tests) {
    const auto s1 = identify_scheme1(utt, models, 4, 0);
    const auto s2n = identify_scheme2(utt, models, 5, 4, 0, n, fe);
    const auto s2k1 = identify_scheme2(utt, models, 5, 4, 0, 1, fe);
    const auto lin = identify_linear(utt, models, 5, MeasureKind::m1, fe);
    const auto s3 = identify_scheme3(utt, models, 5, 4, 0, 3, 0.0, fe);
    if (s2n.predicted != s1.predicted) ++differ_s1;
    if (s2k1.predicted != lin.predicted) ++differ_k1;
    // With alpha = 0 the shortlist is decided by LPCC alone, so the winner is
    // its head, which is the linear measure-1 winner.
    if (s3.predicted != lin.predicted || s3.shortlist.front() != lin.predicted) ++differ_s3;
  }
  return verdict(differ_s1 + differ_k1 + differ_s3 == 0,
                 std::to_string(tests.size()) + " sentences: S2(K=N)!=S1 " +
                     std::to_string(differ_s1) + ", S2(K=1)!=M1 " + std::to_string(differ_k1) +
                     ", S3(alpha=0)!=M1 " + std::to_string(differ_s3));
}

// --- AC7 ---------------------------------------------------------------------

Outcome gradient_check(std::span<const UtteranceFeatures> train) {
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    auto net = MlpPredictor::random(rng);
    for (double& p : net.params) p *= 3.0;
    std::array<double, 10> x{};
    for (double& v : x) v = u(rng);
    std::array<double, kMlpParams> grad{};
    mlp_forward_gradient(net, x, grad);
    const auto fd = oracle::central_gradient(
        [&](const std::vector<double>& p) { return oracle::mlp_reference(p, x.data()); },
        std::vector<double>(net.params.begin(), net.params.end()));
    for (std::size_t i = 0; i < kMlpParams; ++i) {
      worst = std::max(worst, std::abs(grad[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
    }
  }
  // LM traces on clusters of real training frames.
  std::size_t traces = 0;
  std::size_t increases = 0;
  for (std::size_t s = 0; s < train.size(); s += 5) {
    const auto& frames = train[s].frames;
    for (std::size_t start = 0; start + 8 <= frames.size() && start < 64; start += 16) {
      std::vector<const AnalysisFrame*> ptrs;
      for (std::size_t f = start; f < start + 8; ++f) ptrs.push_back(&frames[f].frame);
      const auto data = build_train_set(ptrs);
      const auto r = lm_train(MlpPredictor::random(rng), data);
      ++traces;
      for (std::size_t i = 1; i < r.accepted_mse.size(); ++i) {
        if (r.accepted_mse[i] > r.accepted_mse[i - 1]) ++increases;
      }
    }
  }
  return verdict(worst <= 1e-5 && increases == 0,
                 "worst relative gradient error " + num(worst) + " over 20 nets; " +
                     std::to_string(traces) + " LM traces, " + std::to_string(increases) +
                     " accepted-step increases");
}

// --- AC8 ---------------------------------------------------------------------

TrainSet contexts(std::span<const double> x) {
  TrainSet set;
  for (std::size_t n = 10; n < x.size(); ++n) {
    std::array<double, 10> c{};
    for (std::size_t k = 1; k <= 10; ++k) c[k - 1] = x[n - k];
    set.inputs.push_back(c);
    set.targets.push_back(x[n]);
  }
  return set;
}

double gain_db(const TrainSet& held, const std::function<double(const std::array<double, 10>&)>& f) {
  double sig = 0.0;
  double res = 0.0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const double e = held.targets[i] - f(held.inputs[i]);
    sig += held.targets[i] * held.targets[i];
    res += e * e;
  }
  return prediction_gain_db(sig, res);
}

Outcome nonlinear_advantage() {
  const auto x = oracle::quadratic_ar(23000, 108, 0.4);
  // A short fit segment lets the net overfit past the true generator.
  const std::span<const double> fit(x.data(), 20000);
  const std::span<const double> held_signal(x.data() + 20000, 3000);
  const auto train = contexts(fit);
  const auto held = contexts(held_signal);

  const auto lpc = levinson(autocorrelate(fit, 10));
  const double lpc_gain = gain_db(held, [&](const auto& c) {
    double p = 0.0;
    for (std::size_t k = 0; k < 10; ++k) p += lpc.a[k] * c[k];
    return p;
  });
  const double true_gain =
      gain_db(held, [](const auto& c) { return 0.5 * c[0] - 0.3 * c[0] * c[1]; });

  MultistartOptions ms;
  ms.lm.epochs = 60;
  const auto r = multistart_train(train, std::nullopt, 108, ms);
  const double mlp_gain = gain_db(held, [&](const auto& c) { return mlp_forward(r.net, c); });
  const double margin = mlp_gain - lpc_gain;
  return verdict(margin >= 1.0, "held-out gain MLP " + num(mlp_gain) + " dB, LPC " +
                                    num(lpc_gain) + " dB, margin " + num(margin) +
                                    " dB (true generator bound " + num(true_gain - lpc_gain) +
                                    " dB, needed 1 dB)");
}

// --- AC9 ---------------------------------------------------------------------

double cell(const nlohmann::json& report, const std::string& table, const std::string& row,
            const std::string& col) {
  for (const auto& c : report.at("cells")) {
    if (c.at("table") == table && c.at("row") == row && c.at("column") == col) {
      return c.at("error_rate").get<double>();
    }
  }
  throw Error(ErrorKind::format, "report has no cell " + table + "/" + row + "/" + col);
}

ExperimentConfig synthetic_experiment(const fs::path& corpus, const fs::path& out) {
  ExperimentConfig cfg;
  cfg.training.bits = {4, 5};
  cfg.training.neural = true;
  cfg.training.neural_bits = {4};
  cfg.training.neural_options.iterations = 0;
  cfg.training.neural_options.max_frames_per_cluster = 8;
  cfg.training.seed = 2024;
  cfg.schemes = {Scheme::s1, Scheme::s2, Scheme::s3};
  cfg.k = 3;
  cfg.corpus = corpus;
  cfg.output_dir = out;
  return cfg;
}

Outcome end_to_end(const ExperimentConfig& cfg, double seconds) {
  const auto report = read_json_file(OutputLayout{cfg.output_dir}.report());
  const double m1 = cell(report, "linear", "5", "m1");
  const double s3 = cell(report, "s3_iter0", "5", "nn4");
  const auto alphas = slurp(OutputLayout{cfg.output_dir}.tables() / "s3_iter0_alpha.csv");
  const auto row = alphas.find("\n5,") + 1;
  const auto alpha_row = alphas.substr(row, alphas.find('\n', row) - row);
  return verdict(m1 == 0.0 && s3 <= m1 && seconds < 600.0,
                 "5-bit M1 error " + num(m1) + "%, S3 error " + num(s3) +
                     "% (grid alpha row " + alpha_row +
                     "), train+evaluate " + num(seconds) + " s");
}

// --- AC10 --------------------------------------------------------------------

Outcome lloyd_trend(std::span<const UtteranceFeatures> train) {
  std::map<std::string, std::vector<FrameFeatures>> by_speaker;
  for (const auto& u : train) {
    auto& dst = by_speaker[u.speaker];
    dst.insert(dst.end(), u.frames.begin(), u.frames.end());
  }
  NeuralOptions opt;
  opt.iterations = 3;
  opt.max_frames_per_cluster = 12;
  int improved = 0;
  std::string detail;
  int run = 0;
  for (const auto& [speaker, frames] : by_speaker) {
    if (run == 5) break;
    std::vector<Vec> lpcc;
    std::vector<Vec> lpc;
    for (const auto& f : frames) {
      lpcc.push_back(f.lpcc);
      lpc.push_back(f.lpc.a);
    }
    const auto linear = train_codebook(lpcc, lpc, 3, SplitMethod::hyperplane);
    const auto build = build_neural_codebook(frames, linear, 1000 + static_cast<std::uint64_t>(run), opt);
    const double first = build.total_mad.front();
    const double last = build.total_mad.back();
    if (last <= first) ++improved;
    detail += (run ? ", " : "") + std::to_string(first) + "->" + std::to_string(last);
    ++run;
  }
  return verdict(improved >= 4, std::to_string(improved) + "/5 runs improved (total MAD " + detail + ")");
}

// --- AC11 --------------------------------------------------------------------

Outcome timit_reproduction() {
  const char* manifest = std::getenv("SPKID_TIMIT_MANIFEST");
  if (!manifest || !*manifest) return {Status::skip, "SPKID_TIMIT_MANIFEST not set"};
  testutil::TempDir out("timit");
  ExperimentConfig cfg;
  cfg.training.bits = {4, 5, 6, 7};
  cfg.training.neural = true;
  cfg.training.neural_bits = {4, 5, 6};
  cfg.schemes = {Scheme::s3};
  cfg.combinations = {{MeasureKind::m2, MeasureKind::m3}};
  cfg.corpus = manifest;
  cfg.output_dir = out.path();
  cmd_train(cfg);
  cmd_evaluate(cfg);
  const auto report = read_json_file(OutputLayout{cfg.output_dir}.report());
  const std::map<int, double> reference{{4, 10.0}, {5, 6.84}, {6, 6.31}, {7, 3.68}};
  bool ok = true;
  std::string detail = "M1";
  double best_linear = 100.0;
  for (const auto& [b, ref] : reference) {
    const double e = cell(report, "linear", std::to_string(b), "m1");
    best_linear = std::min(best_linear, e);
    ok = ok && std::abs(e - ref) <= 2.0;
    detail += " b" + std::to_string(b) + "=" + num(e) + "%";
    if (b >= 5) {
      const double c = cell(report, "combined", std::to_string(b), "m2+m3");
      ok = ok && c <= e;
      detail += "/" + num(c) + "%";
    }
  }
  double best_s3 = 100.0;
  for (const auto& c : report.at("cells")) {
    if (c.at("table").get<std::string>().rfind("s3_", 0) == 0) {
      best_s3 = std::min(best_s3, c.at("error_rate").get<double>());
    }
  }
  ok = ok && best_s3 <= best_linear;
  return verdict(ok, detail + ", best S3 " + num(best_s3) + "% vs best M1 " + num(best_linear) + "%");
}

// --- AC12 --------------------------------------------------------------------

std::map<std::string, std::string> outputs(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    const auto rel = fs::relative(e.path(), root).string();
    if (ext == ".csv" || rel.rfind("models", 0) == 0) files[rel] = slurp(e.path());
  }
  return files;
}

Outcome determinism(const fs::path& work) {
  SynthOptions so;
  so.train_sentences = 3;
  so.test_sentences = 2;
  cmd_synth_corpus(4, 12, work / "corpus", so);
  std::vector<std::map<std::string, std::string>> runs;
  for (std::size_t threads : {1, 3, 1}) {
    ExperimentConfig cfg;
    cfg.training.bits = {3, 4};
    cfg.training.neural = true;
    cfg.training.neural_bits = {3};
    cfg.training.neural_options.iterations = 1;
    cfg.training.neural_options.max_frames_per_cluster = 6;
    cfg.training.threads = threads;
    cfg.schemes = {Scheme::s1, Scheme::s2, Scheme::s3};
    cfg.corpus = work / "corpus" / "manifest.json";
    cfg.output_dir = work / ("run" + std::to_string(runs.size()));
    cmd_train(cfg);
    cmd_evaluate(cfg);
    cmd_export_stats(cfg);
    runs.push_back(outputs(cfg.output_dir));
  }
  std::size_t differing = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].size() != runs[0].size()) ++differing;
    for (const auto& [name, text] : runs[0]) {
      const auto it = runs[r].find(name);
      if (it == runs[r].end() || it->second != text) ++differing;
    }
  }
  return verdict(differing == 0 && !runs[0].empty(),
                 std::to_string(runs[0].size()) + " model/CSV files compared over 3 runs " +
                     "(threads 1, 3, 1), " + std::to_string(differing) + " differ");
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](const std::string& id, const std::string& what, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    if (o.status == Status::fail) ++failures;
    std::cout << id << " " << tag << "  " << what << ": " << o.detail << " [" << num(secs) << " s]"
              << std::endl;
  };

  testutil::TempDir work("acceptance");
  const auto corpus_dir = work / "corpus";
  const auto cfg = synthetic_experiment(corpus_dir / "manifest.json", work / "out");
  std::vector<UtteranceFeatures> train;
  std::vector<UtteranceFeatures> tests;
  std::vector<SpeakerModel> models;
  double e2e_seconds = 0.0;
  std::string setup_error;
  try {
    cmd_synth_corpus(10, 2024, corpus_dir);
    const auto t0 = std::chrono::steady_clock::now();
    cmd_train(cfg);
    cmd_evaluate(cfg);
    e2e_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto manifest = read_manifest(cfg.corpus);
    train = analyze_utterances(load_corpus(manifest, Role::train), cfg.training.frontend);
    tests = analyze_utterances(load_corpus(manifest, Role::test), cfg.training.frontend);
    models = read_model_dir(OutputLayout{cfg.output_dir}.models());
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  auto needs_corpus = [&](const std::function<Outcome()>& f) {
    return [&, f] {
      if (!setup_error.empty()) return Outcome{Status::fail, "synthetic experiment failed: " + setup_error};
      return f();
    };
  };
  const auto& fe = cfg.training.frontend;

  run("AC1", "Levinson vs Toeplitz solve", levinson_vs_toeplitz);
  run("AC2", "cepstrum recursion vs log-spectrum", cepstrum_vs_spectrum);
  run("AC3", "VQ Lloyd monotonicity and split sizes", needs_corpus([&] { return vq_monotonicity(train); }));
  run("AC4", "quantizer vs exhaustive scan", quantizer_correctness);
  run("AC5", "measure identities", needs_corpus([&] { return measure_identities(tests, models, fe); }));
  run("AC6", "scheme degeneracies", needs_corpus([&] { return scheme_degeneracies(tests, models, fe); }));
  run("AC7", "MLP gradient and LM descent", needs_corpus([&] { return gradient_check(train); }));
  run("AC8", "nonlinear prediction advantage", nonlinear_advantage);
  run("AC9", "end-to-end synthetic identification",
      needs_corpus([&] { return end_to_end(cfg, e2e_seconds); }));
  run("AC10", "generalized Lloyd trend", needs_corpus([&] { return lloyd_trend(train); }));
  run("AC11", "TIMIT reproduction", timit_reproduction);
  run("AC12", "determinism across runs and thread counts", [&] { return determinism(work / "det"); });

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
