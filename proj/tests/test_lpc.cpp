#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spkid/lpc.hpp"

using namespace spkid;

namespace {

AnalysisFrame make_frame(std::vector<double> samples, std::vector<double> history) {
  AnalysisFrame f;
  f.samples = std::move(samples);
  f.history = std::move(history);
  for (double s : f.samples) f.energy += s * s;
  return f;
}

/// Random frame cut from an AR(10) process, with its true history.
AnalysisFrame ar_frame(std::mt19937_64& rng, const std::vector<double>& a) {
  const auto x = oracle::ar_signal(a, 250, rng);
  return make_frame({x.begin() + 10, x.end()}, {x.begin(), x.begin() + 10});
}

double energy(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

TEST_CASE("autocorrelate examples") {
  const auto zero = autocorrelate(make_frame(std::vector<double>(240, 0.0), {}), 10);
  for (double v : zero) CHECK(v == 0.0);

  std::vector<double> impulse(240, 0.0);
  impulse[0] = 1.0;
  const auto r = autocorrelate(make_frame(impulse, {}), 10);
  CHECK(r[0] == doctest::Approx(0.08 * 0.08));
  for (std::size_t k = 1; k < r.size(); ++k) CHECK(r[k] == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> s(240);
    for (double& v : s) v = u(rng);
    const auto rr = autocorrelate(make_frame(s, {}), 10);
    for (std::size_t k = 1; k < rr.size(); ++k) CHECK(rr[0] >= std::abs(rr[k]));
  }
}

TEST_CASE("levinson examples") {
  SUBCASE("white") {
    const auto m = levinson(std::vector<double>{1, 0, 0, 0, 0});
    for (double a : m.a) CHECK(a == 0.0);
    CHECK(m.error == 1.0);
  }
  SUBCASE("order 1") {
    const auto m = levinson(std::vector<double>{1, 0.5});
    CHECK(m.a[0] == doctest::Approx(0.5));
    CHECK(m.error == doctest::Approx(0.75));
  }
  SUBCASE("exact AR(1)") {
    const auto m = levinson(std::vector<double>{1, 0.5, 0.25});
    CHECK(m.a[0] == doctest::Approx(0.5));
    CHECK(std::abs(m.a[1]) < 1e-15);
    CHECK(m.error == doctest::Approx(0.75));
  }
  SUBCASE("silent frame") {
    const auto m = levinson(std::vector<double>(11, 0.0));
    CHECK(m.degenerate);
    CHECK(m.error == 0.0);
    CHECK(m.a.size() == 10);
    for (double a : m.a) CHECK(a == 0.0);
  }
}

TEST_CASE("levinson matches the direct Toeplitz solve on random frames") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto a = oracle::random_stable_lpc(rng, 10);
    const auto frame = ar_frame(rng, a);
    const auto r = autocorrelate(frame, 10);
    const auto m = levinson(r);
    const auto direct = oracle::toeplitz_lpc(r);
    for (std::size_t i = 0; i < 10; ++i) worst = std::max(worst, std::abs(m.a[i] - direct[i]));
    CHECK(m.error >= 0.0);
    CHECK(m.error <= r[0]);
    for (double k : m.reflection) CHECK(std::abs(k) < 1.0);
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("cepstrum examples") {
  for (double c : lpc_to_cepstrum(std::vector<double>(10, 0.0), 12)) CHECK(c == 0.0);
  const double alpha = 0.6;
  const auto c = lpc_to_cepstrum(std::vector<double>{alpha}, 12);
  REQUIRE(c.size() == 12);
  for (std::size_t n = 1; n <= 12; ++n) {
    CHECK(c[n - 1] == doctest::Approx(std::pow(alpha, n) / static_cast<double>(n)));
  }
  const auto spectral = oracle::spectral_cepstrum(std::vector<double>{alpha}, 12);
  for (std::size_t n = 0; n < 12; ++n) CHECK(std::abs(c[n] - spectral[n]) < 1e-6);
}

TEST_CASE("cepstrum recursion matches the spectral oracle") {
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto a = oracle::random_pole_lpc(rng, 10, 0.3, 0.95);
    const auto c = lpc_to_cepstrum(a, 12);
    const auto ref = oracle::spectral_cepstrum(a, 12);
    for (std::size_t n = 0; n < 12; ++n) worst = std::max(worst, std::abs(c[n] - ref[n]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("inverse filter residual examples") {
  std::vector<double> s(240);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i + 1);
  const auto frame = make_frame(s, std::vector<double>(10, 0.0));

  CHECK(inverse_filter_residual(frame, std::vector<double>(10, 0.0)) == s);

  const auto e = inverse_filter_residual(frame, std::vector<double>{0.5});
  CHECK(e[0] == 1.0);
  CHECK(e[1] == 1.5);
  CHECK(e[2] == 2.0);
  CHECK(e.size() == 240);

  // Zero-excitation AR(2) continuation of its own history.
  const std::vector<double> a{1.2, -0.5};
  std::vector<double> hist{0.3, -0.1};
  std::vector<double> all = hist;
  for (int n = 0; n < 240; ++n) {
    all.push_back(a[0] * all[all.size() - 1] + a[1] * all[all.size() - 2]);
  }
  const auto ar = make_frame({all.begin() + 2, all.end()}, hist);
  for (double v : inverse_filter_residual(ar, a)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("residual energy bounds") {
  std::mt19937_64 rng(23);
  FrontendConfig raw;
  FrontendConfig windowed;
  windowed.window_before_residual = true;
  for (int t = 0; t < 50; ++t) {
    // Sharp low-band resonances, as in voiced speech.
    const auto a = oracle::random_pole_lpc(rng, 10, 0.95, 0.99, 0.1, 1.5);
    const auto frame = ar_frame(rng, a);
    const auto m = levinson(autocorrelate(frame, 10));
    const double es = energy(frame.samples);

    const auto e_raw = frame_residual(frame, m.a, raw);
    CHECK(energy(e_raw) <= 4.0 * es);
    CHECK(energy(e_raw) <= 0.1 * es);

    const auto w = hamming_window(frame.samples);
    const auto e_win = frame_residual(frame, m.a, windowed);
    CHECK(energy(e_win) <= energy(w));
  }
}

TEST_CASE("whole-signal residual slices equal per-frame residuals") {
  std::mt19937_64 rng(29);
  const auto a = oracle::random_stable_lpc(rng, 10);
  const auto x = oracle::ar_signal(a, 1200, rng);
  FrontendConfig cfg;
  const auto frames = frame_signal(x, cfg);
  const auto whole = signal_residual(x, a);
  for (const auto& f : frames) {
    const auto e = inverse_filter_residual(f, a);
    for (std::size_t n = 0; n < e.size(); ++n) REQUIRE(e[n] == whole[f.offset + n]);
  }
}

TEST_CASE("analyze_utterance on a synthetic AR(10) utterance") {
  std::mt19937_64 rng(31);
  const auto a = oracle::random_stable_lpc(rng, 10, 0.8);
  Utterance u;
  u.speaker_id = "x";
  u.sentence_id = "1";
  u.samples = oracle::ar_signal(a, 8000, rng, 0.02);
  FrontendConfig cfg;
  cfg.preemphasis = 0.0;
  const auto feats = analyze_utterance(u, cfg);
  CHECK(feats.frames.size() == (8000 - 240) / 80 + 1);
  double gain = 0.0;
  for (const auto& f : feats.frames) {
    CHECK(f.lpcc.size() == 12);
    CHECK(f.lpc.a.size() == 10);
    CHECK_FALSE(f.lpc.degenerate);
    for (double k : f.lpc.reflection) CHECK(std::abs(k) < 1.0);
    const auto e = frame_residual(f.frame, f.lpc.a, cfg);
    gain += prediction_gain_db(energy(f.frame.samples), energy(e));
  }
  CHECK(gain / static_cast<double>(feats.frames.size()) > 10.0);
}
