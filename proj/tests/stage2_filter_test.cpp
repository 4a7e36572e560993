#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "safer/stage2_filter.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace safer;
using namespace safer::testing;

TEST_CASE("min_admissible_uncertainty", "[stage2]") {
  const auto crit = criterion();
  const auto rec = make_record("a", {0.9, 0.7, 0.2, 0.8}, {3.1, 0.7, 0.1, 2.2});
  CHECK(min_admissible_uncertainty(rec, 4, crit) == 0.7);

  const auto none = make_record("b", {0.1, 0.2}, {1.0, 2.0});
  CHECK_FALSE(min_admissible_uncertainty(none, 2, crit).has_value());

  // Admissible only at index s_hat + 1.
  const auto late = make_record("c", {0.1, 0.2, 0.9}, {1.0, 2.0, 0.5});
  CHECK_FALSE(min_admissible_uncertainty(late, 2, crit).has_value());
  CHECK(min_admissible_uncertainty(late, 3, crit) == 0.5);

  CHECK_THROWS_AS(min_admissible_uncertainty(late, 4, crit), InsufficientSamples);
}

TEST_CASE("build_calibration_subset keeps covered records only", "[stage2]") {
  const auto crit = criterion();
  const std::vector<QuestionRecord> recs = {
      make_record("a", {0.9, 0.1}, {1.5, 0.2}),
      make_record("b", {0.1, 0.1}, {1.0, 1.0}),
      make_record("c", {0.1, 0.8}, {0.3, 2.5}),
      make_record("d", {0.2, 0.3}, {0.4, 0.4}),
      make_record("e", {0.7, 0.7}, {0.9, 0.6}),
  };
  CHECK(build_calibration_subset(recs, 2, crit) == std::vector<double>{1.5, 2.5, 0.6});
  CHECK(build_calibration_subset(recs, 1, crit) == std::vector<double>{1.5, 0.9});

  const std::vector<QuestionRecord> all = {make_record("x", {0.9}, {1.0}),
                                           make_record("y", {0.95}, {2.0})};
  CHECK(build_calibration_subset(all, 1, crit).size() == 2);

  const std::vector<QuestionRecord> uncovered = {make_record("z", {0.1}, {1.0})};
  const auto empty = build_calibration_subset(uncovered, 1, crit);
  CHECK(empty.empty());
  CHECK_THROWS_AS(calibrate_threshold(empty, 0.1), NoCoveredRecords);
}

TEST_CASE("average_loss", "[stage2]") {
  const std::vector<double> u = {1, 2, 3, 4};
  CHECK(average_loss(u, 4.0) == 0.0);
  CHECK(average_loss(u, 10.0) == 0.0);
  CHECK(average_loss(u, 0.5) == 1.0);
  CHECK(average_loss(u, 2.0) == 0.5);
  CHECK_THROWS_AS(average_loss({}, 1.0), InvalidArgument);
}

TEST_CASE("calibrate_threshold examples", "[stage2]") {
  const std::vector<double> nine = {9, 3, 1, 7, 5, 2, 8, 4, 6};
  const auto half = calibrate_threshold(nine, 0.5);
  CHECK(half.t_hat == 5.0);
  CHECK(half.n_prime == 9);
  CHECK(half.target_level == Catch::Approx(4.0 / 9.0));
  CHECK(std::is_sorted(half.min_admissible_uncertainties.begin(),
                       half.min_admissible_uncertainties.end()));

  const auto infeasible = calibrate_threshold(nine, 0.05);
  CHECK(infeasible.t_hat == kNoFilter);
  CHECK_FALSE(infeasible.filters());
  CHECK(infeasible.target_level < 0.0);

  const std::vector<double> one = {2.0};
  CHECK(calibrate_threshold(one, 0.6).t_hat == 2.0);
  CHECK(calibrate_threshold(one, 0.4).t_hat == kNoFilter);
}

TEST_CASE("calibrate_threshold counts duplicates by multiplicity", "[stage2]") {
  const std::vector<double> u = {1, 1, 1, 2, 2};
  // N' = 5, beta = 0.5: floor(3) - 1 = 2 may be lost, so t_hat = 3rd smallest.
  CHECK(calibrate_threshold(u, 0.5).t_hat == 1.0);
  CHECK(average_loss(u, 1.0) == 0.4);
}

TEST_CASE("calibrate_threshold equals brute-force breakpoint scan",
          "[stage2][oracle][property]") {
  SplitMix64 rng(99);
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = 1 + rng.bounded(50);
    std::vector<double> u(n);
    for (auto& v : u)
      v = rng.uniform01() < 0.2 ? static_cast<double>(rng.bounded(4))
                                : 5.0 * rng.uniform01();
    const double beta = 0.001 + 0.998 * rng.uniform01();
    const auto cal = calibrate_threshold(u, beta);
    REQUIRE(cal.t_hat == oracle::brute_force_threshold(u, beta));
    if (cal.filters()) REQUIRE(average_loss(u, cal.t_hat) <= cal.target_level + 1e-12);
  }
}

TEST_CASE("calibrate_threshold is non-increasing in beta", "[stage2][property]") {
  SplitMix64 rng(7);
  for (int round = 0; round < 500; ++round) {
    std::vector<double> u(1 + rng.bounded(60));
    for (auto& v : u) v = 4.0 * rng.uniform01();
    const double b1 = 0.01 + 0.9 * rng.uniform01();
    const double b2 = b1 + (0.99 - b1) * rng.uniform01();
    REQUIRE(calibrate_threshold(u, b1).t_hat >= calibrate_threshold(u, b2).t_hat);
  }
}

TEST_CASE("prediction_set examples", "[stage2]") {
  const auto rec = make_record("a", {0.1, 0.9, 0.5, 0.3}, {0.5, 1.5, 1.0, 0.2});
  CHECK(prediction_set(rec, 3, kNoFilter).kept_indices == std::vector<std::size_t>{1, 2, 3});
  CHECK(prediction_set(rec, 3, 0.1).kept_indices.empty());
  const auto mixed = prediction_set(rec, 3, 1.0);
  CHECK(mixed.kept_indices == std::vector<std::size_t>{1, 3});
  CHECK(mixed.record_id == "a");
  CHECK(mixed.source_budget == 3);
  CHECK_THROWS_AS(prediction_set(rec, 5, 1.0), InsufficientSamples);
}

TEST_CASE("prediction sets nest and agree with the loss", "[stage2][property]") {
  SplitMix64 rng(13);
  const auto crit = criterion();
  for (int round = 0; round < 300; ++round) {
    const std::size_t m = 1 + rng.bounded(8);
    const auto recs = random_dataset(rng, 5, m);
    const double t1 = 6.0 * rng.uniform01();
    const double t2 = t1 + 3.0 * rng.uniform01();
    for (const auto& rec : recs) {
      const auto small = prediction_set(rec, m, t1);
      const auto large = prediction_set(rec, m, t2);
      REQUIRE(std::includes(large.kept_indices.begin(), large.kept_indices.end(),
                            small.kept_indices.begin(), small.kept_indices.end()));
      for (std::size_t i : small.kept_indices)
        REQUIRE(rec.candidates[i - 1].uncertainty <= t1);

      const auto u = min_admissible_uncertainty(rec, m, crit);
      const bool survives =
          std::any_of(small.kept_indices.begin(), small.kept_indices.end(),
                      [&](std::size_t i) { return is_admissible(rec.candidates[i - 1], crit); });
      REQUIRE(survives == (u && *u <= t1));
    }
  }
}
