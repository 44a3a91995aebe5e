#include <benchmark/benchmark.h>

#include <random>

#include "spkid/lpc.hpp"
#include "spkid/measures.hpp"
#include "spkid/mlp.hpp"
#include "spkid/vq.hpp"

using namespace spkid;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> x(n);
  double prev = 0.0;
  for (double& v : x) {
    v = 0.9 * prev + g(rng);
    prev = v;
  }
  return x;
}

AnalysisFrame one_frame() {
  const auto x = noise(2000, 1);
  return frame_signal(x, FrontendConfig{})[5];
}

LinearCodebook random_codebook(int bits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  LinearCodebook cb;
  cb.bits = bits;
  for (std::size_t i = 0; i < (std::size_t{1} << bits); ++i) {
    Codeword cw;
    cw.lpcc.resize(kCepstralOrder);
    for (double& c : cw.lpcc) c = g(rng);
    cw.lpc.assign(kLpcOrder, 0.0);
    cb.codewords.push_back(cw);
  }
  return cb;
}

}  // namespace

static void BM_Levinson(benchmark::State& state) {
  const auto r = autocorrelate(one_frame(), kLpcOrder);
  for (auto _ : state) benchmark::DoNotOptimize(levinson(r));
}
BENCHMARK(BM_Levinson);

static void BM_AnalyzeFrame(benchmark::State& state) {
  const auto frame = one_frame();
  const FrontendConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(analyze_frame(frame, cfg));
}
BENCHMARK(BM_AnalyzeFrame);

static void BM_Cepstrum(benchmark::State& state) {
  const auto model = levinson(autocorrelate(one_frame(), kLpcOrder));
  for (auto _ : state) benchmark::DoNotOptimize(lpc_to_cepstrum(model.a, kCepstralOrder));
}
BENCHMARK(BM_Cepstrum);

static void BM_Quantize(benchmark::State& state) {
  const auto cb = random_codebook(static_cast<int>(state.range(0)), 2);
  const auto v = random_codebook(0, 3).codewords[0].lpcc;
  for (auto _ : state) benchmark::DoNotOptimize(quantize(v, cb));
}
BENCHMARK(BM_Quantize)->DenseRange(4, 7);

static void BM_ResidualMeasures(benchmark::State& state) {
  const auto e = noise(kFrameLength, 4);
  for (auto _ : state) benchmark::DoNotOptimize(residual_measures(e));
}
BENCHMARK(BM_ResidualMeasures);

static void BM_MlpResidual(benchmark::State& state) {
  const auto frame = one_frame();
  std::mt19937_64 rng(5);
  const auto net = MlpPredictor::random(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_residual_mad(frame, net));
}
BENCHMARK(BM_MlpResidual);

static void BM_LmEpoch(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)) * 80 + 400, 6);
  const auto frames = frame_signal(x, FrontendConfig{});
  std::vector<const AnalysisFrame*> ptrs;
  for (const auto& f : frames) ptrs.push_back(&f);
  const auto data = build_train_set(ptrs);
  std::mt19937_64 rng(7);
  const auto net = MlpPredictor::random(rng);
  LmOptions one;
  one.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(lm_train(net, data, one));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_LmEpoch)->Arg(8)->Arg(64);

static void BM_TrainCodebook(benchmark::State& state) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec> v(1000, Vec(kCepstralOrder));
  for (auto& x : v) {
    for (double& c : x) c = g(rng);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_codebook(v, v, static_cast<int>(state.range(0)), SplitMethod::hyperplane));
  }
}
BENCHMARK(BM_TrainCodebook)->Arg(5);

BENCHMARK_MAIN();
