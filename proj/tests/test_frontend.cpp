#include <doctest.h>

#include <random>

#include "spkid/error.hpp"
#include "spkid/frontend.hpp"

using namespace spkid;

TEST_CASE("preemphasize examples") {
  CHECK(preemphasize(std::vector<double>{1, 1, 1}, 0.95) ==
        std::vector<double>{1, 1 - 0.95, 1 - 0.95});
  CHECK(preemphasize(std::vector<double>{1, 0, 0}, 0.95) == std::vector<double>{1, -0.95, 0});
  const std::vector<double> x{0.3, -0.2, 0.7, 0.1};
  CHECK(preemphasize(x, 0.0) == x);
  CHECK(preemphasize(std::vector<double>{}, 0.95).empty());
}

TEST_CASE("pre-emphasis is invertible") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> x(1000);
  for (double& v : x) v = u(rng);
  const auto y = preemphasize(x, 0.95);
  double prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double rec = y[n] + 0.95 * prev;
    CHECK(std::abs(rec - x[n]) < 1e-12);
    prev = rec;
  }
}

TEST_CASE("frame_signal examples") {
  FrontendConfig cfg;
  std::vector<double> y(400);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);

  const auto frames = frame_signal(y, cfg);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].offset == 0);
  CHECK(frames[1].offset == 80);
  CHECK(frames[2].offset == 160);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    CHECK(frames[f].index == f);
    CHECK(frames[f].samples.size() == 240);
    CHECK(frames[f].history.size() == 10);
    CHECK(frames[f].samples[0] == y[frames[f].offset]);
    CHECK(frames[f].energy >= 0.0);
  }
  // History is the ten samples just before the frame, oldest first.
  CHECK(frames[1].history.front() == 70.0);
  CHECK(frames[1].history.back() == 79.0);
  for (double h : frames[0].history) CHECK(h == 0.0);

  const auto one = frame_signal(std::vector<double>(240, 1.0), cfg);
  REQUIRE(one.size() == 1);
  for (double h : one[0].history) CHECK(h == 0.0);
  CHECK(one[0].energy == doctest::Approx(240.0));

  CHECK_THROWS_AS(frame_signal(std::vector<double>(239, 1.0), cfg), Error);
}

TEST_CASE("frame count formula") {
  FrontendConfig cfg;
  for (std::size_t n : {240u, 319u, 320u, 1000u, 12345u}) {
    const auto frames = frame_signal(std::vector<double>(n, 0.1), cfg);
    CHECK(frames.size() == (n - 240) / 80 + 1);
    for (std::size_t f = 1; f < frames.size(); ++f) {
      CHECK(frames[f].offset - frames[f - 1].offset == cfg.hop);
    }
  }
}

TEST_CASE("hamming_window examples") {
  const auto w = hamming_window(std::vector<double>(240, 1.0));
  CHECK(w[0] == doctest::Approx(0.08));
  CHECK(w[239] == doctest::Approx(0.08));
  // (N-1)/2 = 119.5: both neighbours sit just below the peak of 1.
  CHECK(w[119] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(w[120] == doctest::Approx(1.0).epsilon(1e-3));
  const auto w_odd = hamming_window(std::vector<double>(241, 1.0), 241);
  CHECK(w_odd[120] == doctest::Approx(1.0).epsilon(1e-15));
  for (double v : hamming_window(std::vector<double>(240, 0.0))) CHECK(v == 0.0);
  CHECK_THROWS_AS(hamming_window(std::vector<double>(200, 1.0)), Error);
}

TEST_CASE("frontend config validation and JSON") {
  FrontendConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(frontend_from_json(to_json(cfg)) == cfg);

  auto bad = cfg;
  bad.preemphasis = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.lpc_order = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.lpc_order = 241;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.hop = 0;
  CHECK_THROWS_AS(bad.validate(), Error);

  auto other = cfg;
  other.window_before_residual = true;
  other.hop = 60;
  CHECK(frontend_from_json(to_json(other)) == other);
}
