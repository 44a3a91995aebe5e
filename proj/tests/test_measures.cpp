#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spkid/error.hpp"
#include "spkid/measures.hpp"

using namespace spkid;

namespace {

UtteranceFeatures ar_utterance(std::uint64_t seed, std::size_t n = 4000) {
  std::mt19937_64 rng(seed);
  const auto a = oracle::random_pole_lpc(rng, 10, 0.8, 0.95);
  Utterance u;
  u.speaker_id = "s";
  u.sentence_id = std::to_string(seed);
  u.samples = oracle::ar_signal(a, n, rng);
  return analyze_utterance(u, FrontendConfig{});
}

LinearCodebook codebook_for(const UtteranceFeatures& feats, int bits) {
  std::vector<Vec> lpcc;
  std::vector<Vec> lpc;
  for (const auto& f : feats.frames) {
    lpcc.push_back(f.lpcc);
    lpc.push_back(f.lpc.a);
  }
  return train_codebook(lpcc, lpc, bits, SplitMethod::hyperplane);
}

}  // namespace

TEST_CASE("measure examples") {
  const std::vector<double> c{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
  CHECK(coefficient_distance(c, c, MeasureKind::m1) == 0.0);
  CHECK(coefficient_distance(c, c, MeasureKind::m2) == 0.0);
  std::vector<double> d = c;
  d[0] += 0.6;
  d[5] -= 1.2;
  CHECK(coefficient_distance(c, d, MeasureKind::m1) == doctest::Approx((0.36 + 1.44) / 12));
  CHECK(coefficient_distance(c, d, MeasureKind::m2) == doctest::Approx(1.8 / 12));
  CHECK_THROWS_AS(coefficient_distance(c, d, MeasureKind::m3), Error);

  std::vector<double> e(240, 0.0);
  e[0] = 0.1;
  e[1] = -0.5;
  e[2] = 0.2;
  CHECK(residual_measure(e, MeasureKind::m5) == 0.5);
  CHECK(residual_measure(e, MeasureKind::m3) == doctest::Approx(0.30 / 240));
  CHECK(residual_measure(e, MeasureKind::m4) == doctest::Approx(0.8 / 240));
  const double mean = -0.2 / 240;
  double var = 0.0;
  for (double v : e) var += (v - mean) * (v - mean);
  CHECK(residual_measure(e, MeasureKind::m6) == doctest::Approx(var / 240));
  CHECK_THROWS_AS(residual_measure(e, MeasureKind::m1), Error);

  for (double v : residual_measures(std::vector<double>(240, 0.0))) CHECK(v == 0.0);

  CHECK(measure_from_number(4) == MeasureKind::m4);
  CHECK_THROWS_AS(measure_from_number(0), Error);
  CHECK_THROWS_AS(measure_from_number(7), Error);
}

TEST_CASE("M6 never exceeds M3 and equals it at zero mean") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> e(240);
    const double offset = (t % 3) * 0.01 * g(rng);
    for (double& v : e) v = 0.1 * g(rng) + offset;
    const auto m = residual_measures(e);
    REQUIRE(m[5] <= m[2]);
    for (std::size_t k = 2; k < 6; ++k) REQUIRE(m[k] >= 0.0);
    REQUIRE(m[4] <= std::sqrt(240.0 * m[2]) + 1e-15);

    // Force a zero mean: mirror the vector.
    std::vector<double> z(e.begin(), e.begin() + 120);
    for (std::size_t i = 0; i < 120; ++i) z.push_back(-z[i]);
    const auto mz = residual_measures(z);
    REQUIRE(std::abs(mz[5] - mz[2]) <= 1e-12 * mz[2]);
  }
}

TEST_CASE("residual_measures agrees with residual_measure") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> e(240);
  for (double& v : e) v = u(rng);
  const auto all = residual_measures(e);
  for (auto k : {MeasureKind::m3, MeasureKind::m4, MeasureKind::m5, MeasureKind::m6}) {
    CHECK(all[measure_index(k)] == residual_measure(e, k));
  }
}

TEST_CASE("score_sentence matches a brute-force scan") {
  const auto train = ar_utterance(1);
  const auto test = ar_utterance(2);
  const auto cb = codebook_for(train, 4);
  const FrontendConfig cfg;
  for (auto kind : kAllMeasures) {
    const auto s = score_sentence(test.frames, cb, kind, cfg);
    double total = 0.0;
    for (const auto& f : test.frames) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cw : cb.codewords) {
        double d = 0.0;
        if (is_coefficient_measure(kind)) {
          for (std::size_t i = 0; i < 12; ++i) {
            const double diff = f.lpcc[i] - cw.lpcc[i];
            d += kind == MeasureKind::m1 ? diff * diff : std::abs(diff);
          }
          d /= 12.0;
        } else {
          // Inverse filter written out from the frame and its history.
          std::vector<double> ext = f.frame.history;
          ext.insert(ext.end(), f.frame.samples.begin(), f.frame.samples.end());
          std::vector<double> e;
          for (std::size_t n = 10; n < ext.size(); ++n) {
            double p = ext[n];
            for (std::size_t k = 1; k <= 10; ++k) p -= cw.lpc[k - 1] * ext[n - k];
            e.push_back(p);
          }
          double sum = 0.0;
          double sq = 0.0;
          double mx = 0.0;
          double ab = 0.0;
          for (double v : e) {
            sum += v;
            sq += v * v;
            ab += std::abs(v);
            mx = std::max(mx, std::abs(v));
          }
          const double n = static_cast<double>(e.size());
          if (kind == MeasureKind::m3) d = sq / n;
          if (kind == MeasureKind::m4) d = ab / n;
          if (kind == MeasureKind::m5) d = mx;
          if (kind == MeasureKind::m6) d = sq / n - (sum / n) * (sum / n);
        }
        best = std::min(best, d);
      }
      total += best;
    }
    CAPTURE(measure_number(kind));
    CHECK(s.n_frames == test.frames.size());
    CHECK(s.total == doctest::Approx(total).epsilon(1e-9));
    CHECK(s.mean() == doctest::Approx(total / static_cast<double>(test.frames.size())).epsilon(1e-9));
  }
}

TEST_CASE("score_sentence_all equals per-measure scoring") {
  const auto train = ar_utterance(3);
  const auto test = ar_utterance(4);
  const auto cb = codebook_for(train, 3);
  const FrontendConfig cfg;
  const auto all = score_sentence_all(test, cb, cfg);
  for (auto kind : kAllMeasures) {
    CHECK(all[measure_index(kind)] == score_sentence(test.frames, cb, kind, cfg).total);
  }
}

TEST_CASE("score_sentence edge cases") {
  const auto u = ar_utterance(5);
  const auto cb = codebook_for(u, 2);
  const FrontendConfig cfg;
  CHECK_THROWS_AS(score_sentence({}, cb, MeasureKind::m1, cfg), Error);

  // Codebook whose centroids are the frames' own LPCC.
  LinearCodebook exact;
  for (const auto& f : u.frames) exact.codewords.push_back({f.lpcc, f.lpc.a, 1});
  CHECK(score_sentence(u.frames, exact, MeasureKind::m1, cfg).total == 0.0);

  const auto one = std::span<const FrameFeatures>(u.frames).first(1);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cw : cb.codewords) {
    best = std::min(best, frame_distance(u.frames[0], cw, MeasureKind::m4, cfg));
  }
  CHECK(score_sentence(one, cb, MeasureKind::m4, cfg).total == best);
}

TEST_CASE("combine examples") {
  SentenceScore c{"a", 2.0, 10};
  SentenceScore r{"a", 3.0, 10};
  CHECK(combine_scores(c, r, 0.5) == 3.5);
  CHECK(combine_scores(c, r, 0.0) == 2.0);
  CHECK_THROWS_AS(combine_scores(c, r, -1.0), Error);
}

TEST_CASE("alpha zero reproduces the coefficient ranking, and scaling is harmless") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    AlphaTrial trial;
    trial.truth = "s0";
    for (int s = 0; s < 6; ++s) {
      trial.candidates.push_back({"s" + std::to_string(s), u(rng), u(rng)});
    }
    const auto coef_best = std::min_element(
        trial.candidates.begin(), trial.candidates.end(),
        [](const auto& x, const auto& y) { return x.coefficient < y.coefficient; });
    const std::vector<AlphaTrial> one{trial};
    CHECK(alpha_errors(one, 0.0) == (coef_best->speaker == "s0" ? 0u : 1u));

    const double alpha = 0.37;
    const double gamma = 13.0;
    AlphaTrial scaled = trial;
    for (auto& c : scaled.candidates) {
      c.coefficient *= gamma;
      c.residual *= gamma;
    }
    const std::vector<AlphaTrial> two{scaled};
    CHECK(alpha_errors(one, alpha) == alpha_errors(two, alpha));
  }
}

TEST_CASE("grid_search_alpha constructions") {
  const auto grid = default_alpha_grid();
  REQUIRE(grid.size() == 13);
  CHECK(grid.front() == doctest::Approx(1e-3));
  CHECK(grid.back() == doctest::Approx(1e3));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(std::sqrt(10.0)));
  }

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> noise(0.0, 1.0);
  auto make = [&](bool coefficient_informative) {
    std::vector<AlphaTrial> trials;
    for (int t = 0; t < 100; ++t) {
      AlphaTrial trial;
      trial.truth = "s" + std::to_string(t % 5);
      for (int s = 0; s < 5; ++s) {
        const std::string spk = "s" + std::to_string(s);
        const double informative = spk == trial.truth ? 1.0 : 2.0;
        // Pure noise, spread wider than the informative gap.
        const double shuffled = 1.0 + (coefficient_informative ? 1.0 : 50.0) * noise(rng);
        trial.candidates.push_back({spk, coefficient_informative ? informative : shuffled,
                                    coefficient_informative ? shuffled : informative});
      }
      trials.push_back(trial);
    }
    return trials;
  };
  const auto noisy_residual = make(true);
  CHECK(grid_search_alpha(noisy_residual, grid) == grid.front());
  CHECK(alpha_errors(noisy_residual, grid.front()) == 0);

  const auto noisy_coefficient = make(false);
  const double big = grid_search_alpha(noisy_coefficient, grid);
  CHECK(big >= 100.0);
  CHECK(alpha_errors(noisy_coefficient, big) == 0);

  const std::vector<double> single{0.42};
  CHECK(grid_search_alpha(noisy_residual, single) == 0.42);
  CHECK_THROWS_AS(grid_search_alpha(noisy_residual, std::vector<double>{}), Error);
}

TEST_CASE("alpha ties go to the lexicographically smaller speaker and the smaller alpha") {
  AlphaTrial trial;
  trial.truth = "b";
  trial.candidates = {{"b", 1.0, 1.0}, {"a", 1.0, 1.0}};
  const std::vector<AlphaTrial> trials{trial};
  CHECK(alpha_errors(trials, 1.0) == 1);

  AlphaTrial flat;
  flat.truth = "a";
  flat.candidates = {{"a", 1.0, 1.0}, {"b", 2.0, 2.0}};
  const std::vector<AlphaTrial> all_right{flat};
  const std::vector<double> grid{0.1, 1.0, 10.0};
  CHECK(grid_search_alpha(all_right, grid) == 0.1);
}

TEST_CASE("correlation_matrix properties") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> cols(4, std::vector<double>(50));
  for (std::size_t i = 0; i < 50; ++i) {
    cols[0][i] = g(rng);
    cols[1][i] = -cols[0][i];
    cols[2][i] = g(rng);
    cols[3][i] = 7.0;
  }
  const auto m = correlation_matrix(cols);
  REQUIRE(m.size() == 4);
  CHECK(*m[0][0] == doctest::Approx(1.0));
  CHECK(*m[0][1] == doctest::Approx(-1.0));
  CHECK(*m[1][0] == doctest::Approx(-1.0));
  CHECK(*m[0][2] == doctest::Approx(*m[2][0]));
  CHECK(std::abs(*m[0][2]) <= 1.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK_FALSE(m[3][i].has_value());
  for (std::size_t i = 0; i < 4; ++i) CHECK_FALSE(m[i][3].has_value());

  const std::vector<std::vector<double>> one_row{{1.0}, {2.0}};
  CHECK_THROWS_AS(correlation_matrix(one_row), Error);
}

TEST_CASE("M3 and M6 correlate when residual means are near zero") {
  const auto train = ar_utterance(12);
  const auto cb = codebook_for(train, 3);
  const FrontendConfig cfg;
  std::vector<std::vector<double>> cols(2);
  for (std::uint64_t s = 20; s < 40; ++s) {
    const auto test = ar_utterance(s, 2000);
    const auto all = score_sentence_all(test, cb, cfg);
    cols[0].push_back(all[2] / static_cast<double>(test.frames.size()));
    cols[1].push_back(all[5] / static_cast<double>(test.frames.size()));
  }
  const auto m = correlation_matrix(cols);
  CHECK(*m[0][1] >= 0.99);
}

TEST_CASE("distortion histograms") {
  std::vector<LabeledScore> scores;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const std::string truth = "s" + std::to_string(t % 3);
    for (int s = 0; s < 3; ++s) {
      const std::string spk = "s" + std::to_string(s);
      const double v = spk == truth ? u(rng) : 2.0 + u(rng);
      scores.push_back({truth, spk, v});
    }
  }
  const auto h = distortion_histograms(scores, 50);
  CHECK(h.intra.size() == 30);
  CHECK(h.inter.size() == 60);
  CHECK(*std::max_element(h.intra.begin(), h.intra.end()) <
        *std::min_element(h.inter.begin(), h.inter.end()));
  std::size_t total = 0;
  for (auto c : h.intra_counts) total += c;
  for (auto c : h.inter_counts) total += c;
  CHECK(total == scores.size());
  CHECK(h.intra_counts.size() == 50);
  // The maximum lands in the last bin.
  CHECK(h.inter_counts.back() >= 1);

  const std::vector<LabeledScore> single{{"a", "a", 1.0}};
  const auto hs = distortion_histograms(single, 10);
  CHECK(hs.inter.empty());
  CHECK(hs.intra.size() == 1);
}
