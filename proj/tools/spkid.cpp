// spkid: train, evaluate and inspect closed-set speaker identification runs.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spkid/error.hpp"
#include "spkid/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::vector<int> bits;
  std::vector<std::string> schemes;
  long long k = 0;
  std::string alpha;
  std::uint64_t seed = 0;
  std::string corpus;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "Experiment config (JSON)")->required();
  cmd->add_option("--bits", f.bits, "Codebook sizes in bits")->delimiter(',');
  cmd->add_option("--scheme", f.schemes, "Neural schemes to evaluate (s1,s2,s3)")->delimiter(',');
  cmd->add_option("--k", f.k, "Preselection count");
  cmd->add_option("--alpha", f.alpha, "Combination weight or \"auto\"");
  cmd->add_option("--seed", f.seed, "Global seed");
  cmd->add_option("--corpus", f.corpus, "Corpus manifest");
  cmd->add_option("--out", f.out, "Output directory");
}

spkid::ExperimentConfig load(const CLI::App* cmd, const CommonFlags& f) {
  auto cfg = spkid::load_experiment_config(f.config);
  spkid::ConfigOverrides o;
  if (cmd->count("--bits")) o.bits = f.bits;
  if (cmd->count("--scheme")) o.schemes = f.schemes;
  if (cmd->count("--k")) {
    if (f.k < 1) throw spkid::Error(spkid::ErrorKind::config, "--k must be >= 1");
    o.k = static_cast<std::size_t>(f.k);
  }
  if (cmd->count("--alpha")) o.alpha = f.alpha;
  if (cmd->count("--seed")) o.seed = f.seed;
  if (cmd->count("--corpus")) o.corpus = f.corpus;
  if (cmd->count("--out")) o.output_dir = f.out;
  spkid::apply_overrides(cfg, o);
  return cfg;
}

void print(const spkid::RunArtifacts& a) {
  for (const auto& f : a.files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-set speaker identification workbench"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  auto* train = app.add_subcommand("train", "Train linear and neural codebooks per speaker");
  add_common(train, train_flags);

  CommonFlags eval_flags;
  std::string models_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Score test sentences and write error-rate tables");
  add_common(evaluate, eval_flags);
  evaluate->add_option("--models", models_dir, "Model directory (default <out>/models)");

  CommonFlags stats_flags;
  std::string scores;
  auto* stats = app.add_subcommand("export-stats", "Correlation, histogram and dispersion CSVs");
  add_common(stats, stats_flags);
  stats->add_option("--scores", scores, "Score table (default <out>/scores.json)");

  int n_speakers = 10;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic corpus and its manifest");
  synth->add_option("-n,--speakers", n_speakers, "Number of speakers")->check(CLI::Range(2, 1000));
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", synth_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      print(spkid::cmd_train(load(train, train_flags)));
    } else if (*evaluate) {
      std::optional<std::filesystem::path> dir;
      if (!models_dir.empty()) dir = models_dir;
      print(spkid::cmd_evaluate(load(evaluate, eval_flags), dir));
    } else if (*stats) {
      std::optional<std::filesystem::path> src;
      if (!scores.empty()) src = scores;
      print(spkid::cmd_export_stats(load(stats, stats_flags), src));
    } else if (*synth) {
      const auto a = spkid::cmd_synth_corpus(n_speakers, synth_seed, synth_out);
      std::cout << a.files.front().string() << "\n";
    }
  } catch (const spkid::Error& e) {
    std::fprintf(stderr, "spkid: %s error: %s\n", spkid::to_string(e.kind()), e.what());
    return spkid::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "spkid: io error: %s\n", e.what());
    return spkid::exit_code(spkid::ErrorKind::io);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "spkid: %s\n", e.what());
    return 1;
  }
  return 0;
}
