#include "pcicorr/mask.hpp"

#include "pcicorr/csvio.hpp"
#include "pcicorr/eval.hpp"
#include "pcicorr/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <limits>

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

pcicorr::PgdConfig config_for(double c, double e) {
  pcicorr::PgdConfig cfg;
  cfg.sum_threshold = c;
  cfg.tolerable_error = e;
  return cfg;
}

}  // namespace

TEST_CASE("truncation clamps to the unit box and preserves interior entries") {
  Eigen::VectorXd w(3);
  w << -0.2, 0.4, 1.7;
  const Eigen::VectorXd t = pcicorr::truncate_weights(w);
  CHECK(t(0) == 0.0);
  CHECK(t(1) == 0.4);  // bitwise: interior entries untouched
  CHECK(t(2) == 1.0);
  CHECK_THROWS_AS(
      pcicorr::truncate_weights(Eigen::VectorXd::Constant(
          2, std::numeric_limits<double>::infinity())),
      std::invalid_argument);
}

TEST_CASE("projection matches the frozen bisection example") {
  Eigen::VectorXd w(3);
  w << 0.9, 0.8, 0.7;
  const auto proj = pcicorr::project(w, config_for(1.5, 0.015));
  // Uniform shift r = 0.3 is exact: [0.6, 0.5, 0.4] sums to the budget.
  CHECK(std::abs(proj.sum - 1.5) <= 0.015);
  CHECK(std::abs(proj.weights(0) - 0.6) <= 0.015);
  CHECK(std::abs(proj.weights(1) - 0.5) <= 0.015);
  CHECK(std::abs(proj.weights(2) - 0.4) <= 0.015);
  CHECK(std::abs(proj.shift - 0.3) <= 0.015);
  CHECK(proj.iterations > 0);
}

TEST_CASE("projection returns feasible points unchanged") {
  Eigen::VectorXd w(4);
  w << 0.1, 0.0, 0.3, 0.05;
  const auto proj = pcicorr::project(w, config_for(1.0, 0.01));
  for (Eigen::Index i = 0; i < w.size(); ++i)
    CHECK(proj.weights(i) == w(i));  // bitwise
  CHECK(proj.shift == 0.0);
  CHECK(proj.iterations == 0);
}

TEST_CASE("projection output is feasible and idempotent on random points") {
  pcicorr::Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = 1 + trial % 16;
    const Eigen::VectorXd w =
        5.0 * (rng.uniform_vector(m).array() - 0.2).matrix();
    const double c = 0.25 + 0.5 * m * rng.uniform();
    const auto cfg = config_for(c, 0.01 * c);
    const auto proj = pcicorr::project(w, cfg);
    CHECK(proj.weights.minCoeff() >= 0.0);
    CHECK(proj.weights.maxCoeff() <= 1.0);
    CHECK(proj.weights.sum() <= c + cfg.tolerable_error);

    // Both passes land within e of the budget, so a coordinate can move by
    // at most the combined slack.
    const auto twice = pcicorr::project(proj.weights, cfg);
    CHECK((twice.weights - proj.weights).cwiseAbs().maxCoeff() <=
          2.0 * cfg.tolerable_error);
  }
}

TEST_CASE("projection agrees with the exact KKT solution") {
  // With a tight sum tolerance the bisection lands on the Euclidean
  // projection onto the feasible set; check against active-set
  // enumeration coordinate by coordinate.
  pcicorr::Rng rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index m = 1 + trial % 6;
    const Eigen::VectorXd w =
        4.0 * (rng.uniform_vector(m).array() - 0.3).matrix();
    const double c = 0.3 + 0.4 * m * rng.uniform();
    const auto proj = pcicorr::project(w, config_for(c, 1e-9));
    const Eigen::VectorXd exact = pcicorr::brute_projection(w, c);
    CHECK((proj.weights - exact).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("projection reports unusable bisection bounds as retryable") {
  Eigen::VectorXd w(3);
  w << 0.9, 0.8, 0.7;
  auto cfg = config_for(1.5, 0.015);
  cfg.bisect_lo = 0.0;
  cfg.bisect_hi = 0.05;  // too small: the shifted sum stays above budget
  bool caught = false;
  try {
    pcicorr::project(w, cfg);
  } catch (const pcicorr::BracketError& err) {
    caught = true;
    CHECK(err.lower_sum() > 1.5);
    CHECK(err.upper_sum() > 1.5);
  }
  CHECK(caught);

  // The retry with the default bounds succeeds.
  cfg.bisect_hi.reset();
  CHECK_NOTHROW(pcicorr::project(w, cfg));
}

TEST_CASE("PGD configuration validation rejects inconsistent settings") {
  pcicorr::PgdConfig cfg = pcicorr::default_pgd_config(16);
  CHECK(cfg.sum_threshold == doctest::Approx(4.0));
  CHECK(cfg.tolerable_error == doctest::Approx(0.04));
  CHECK(cfg.step_size == doctest::Approx(2.0));
  CHECK(cfg.max_iterations == 500);
  CHECK(cfg.stop_tolerance == doctest::Approx(1e-6));

  auto bad = cfg;
  bad.sum_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.tolerable_error = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.bisect_hi = -1.0;  // below bisect_lo
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.max_iterations = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("a PGD step applies the gradient and projects") {
  pcicorr::PciMask mask;
  mask.weights = Eigen::VectorXd::Zero(1);
  mask.sum_threshold = 1.0;
  Eigen::VectorXd grad(1);
  grad << -2.0;  // loss gradient at w = 0 for the loss 2w^2 - 2w
  auto cfg = config_for(1.0, 0.01);
  cfg.step_size = 0.1;
  const auto next = pcicorr::pgd_step(mask, grad, cfg);
  CHECK(next.weights(0) == doctest::Approx(0.2));

  const auto big = pcicorr::pgd_step(mask, Eigen::VectorXd::Constant(1, -50.0),
                                     cfg);
  CHECK(big.weights(0) <= 1.0);  // projected back into the box
}

TEST_CASE("random mask initialization is seeded and feasible") {
  const auto cfg = pcicorr::default_pgd_config(12);
  const auto a = pcicorr::random_mask(12, {0, 1}, cfg, 99);
  const auto b = pcicorr::random_mask(12, {0, 1}, cfg, 99);
  const auto c = pcicorr::random_mask(12, {0, 1}, cfg, 100);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.weights - c.weights).cwiseAbs().maxCoeff() > 0.0);
  CHECK_NOTHROW(pcicorr::require_feasible(a, cfg.tolerable_error));
  CHECK(a.pair == std::make_pair(0, 1));
  CHECK_THROWS_AS(pcicorr::make_pair_key(2, 2), std::invalid_argument);
}

TEST_CASE("mask sets validate completeness and consistency") {
  pcicorr::MaskSet set;
  set.modalities = 3;
  const auto cfg = pcicorr::default_pgd_config(4);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      set.masks.emplace(std::make_pair(i, j),
                        pcicorr::random_mask(4, {i, j}, cfg, 7 * i + j));
  CHECK_NOTHROW(set.validate());

  auto missing = set;
  missing.masks.erase({0, 2});
  CHECK_THROWS_AS(missing.validate(), std::invalid_argument);

  auto mismatched = set;
  mismatched.at(0, 1).weights = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);

  auto budget = set;
  budget.at(1, 2).sum_threshold = 2.0;
  CHECK_THROWS_AS(budget.validate(), std::invalid_argument);
}

TEST_CASE("mask CSV files round-trip and re-project on load") {
  const auto cfg = pcicorr::default_pgd_config(6);
  auto mask = pcicorr::random_mask(6, {1, 3}, cfg, 5);
  mask.weights *= 0.9;  // strictly inside the budget: round trip is exact
  const std::string path = temp_path("pcicorr_mask_roundtrip.csv");
  pcicorr::save_mask_csv(mask, path, cfg.tolerable_error, 5);

  const std::string meta = pcicorr::read_file(path + ".meta");
  CHECK(meta.find("pair = 1,3") != std::string::npos);
  CHECK(meta.find("c = 1.5") != std::string::npos);
  CHECK(meta.find("seed = 5") != std::string::npos);
  CHECK(meta.find("sum = ") != std::string::npos);

  const auto loaded = pcicorr::load_mask_csv(path);
  CHECK(loaded.pair == std::make_pair(1, 3));
  CHECK(loaded.sum_threshold == mask.sum_threshold);
  REQUIRE(loaded.weights.size() == mask.weights.size());
  for (Eigen::Index i = 0; i < mask.weights.size(); ++i)
    CHECK(loaded.weights(i) == mask.weights(i));

  // Tamper with the stored weights: loading must restore feasibility.
  std::string tampered;
  for (Eigen::Index i = 0; i < mask.weights.size(); ++i)
    tampered += (i ? "," : "") + pcicorr::format_double(5.0);
  pcicorr::write_file(path, tampered + "\n");
  const auto reprojected = pcicorr::load_mask_csv(path);
  CHECK(reprojected.weights.maxCoeff() <= 1.0);
  CHECK(reprojected.weights.sum() <=
        reprojected.sum_threshold + cfg.tolerable_error);
  std::remove(path.c_str());
  std::remove((path + ".meta").c_str());
}

TEST_CASE("mask heatmaps use the darker-is-heavier grayscale convention") {
  pcicorr::PciMask mask;
  mask.weights.resize(3);
  mask.weights << 1.0, 0.5, 0.0;
  mask.sum_threshold = 3.0;
  const std::string path = temp_path("pcicorr_mask.pgm");
  pcicorr::save_mask_pgm(mask, path);
  CHECK(pcicorr::read_file(path) == "P2\n3 1\n255\n0 128 255\n");

  pcicorr::save_mask_pgm(mask, path, /*fixed_width_128=*/true);
  const std::string wide = pcicorr::read_file(path);
  CHECK(wide.rfind("P2\n128 1\n255\n0 128 255 255", 0) == 0);

  // More dimensions than the fixed width: only the first 128 appear.
  pcicorr::PciMask big;
  big.weights = Eigen::VectorXd::Ones(200);
  big.sum_threshold = 200.0;
  pcicorr::save_mask_pgm(big, path, /*fixed_width_128=*/true);
  const std::string text = pcicorr::read_file(path);
  CHECK(text.rfind("P2\n128 1\n255\n", 0) == 0);
  std::remove(path.c_str());
}
