#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pwclock/observer.hpp"

using namespace pwclock;

namespace {

constexpr double kPi = std::numbers::pi;

ObserverConfig exact_config(std::size_t taus = 9, double omega = 1.0) {
  ObserverConfig cfg;
  cfg.omega = omega;
  cfg.delta_grid_size = 32;
  cfg.shots_per_delta = 0;
  cfg.tau_list.clear();
  const double period = 2.0 * kPi / omega;
  for (std::size_t i = 0; i < taus; ++i) {
    cfg.tau_list.push_back(static_cast<double>(i) * period / static_cast<double>(taus));
  }
  return cfg;
}

}  // namespace

TEST_CASE("joint detection probabilities at pinned points") {
  const JointProbabilities p0 = joint_detection_probabilities(0.0, 0.0);
  CHECK(p0.p13 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(p0.p14) <= 1e-12);
  CHECK(std::abs(p0.p23) <= 1e-12);
  CHECK(std::abs(p0.p24) <= 1e-12);

  const JointProbabilities ppi = joint_detection_probabilities(kPi, 0.0);
  CHECK(std::abs(ppi.p13) <= 1e-12);
  CHECK(std::abs(ppi.p14) <= 1e-12);
  CHECK(std::abs(ppi.p23) <= 1e-12);
  CHECK(ppi.p24 == doctest::Approx(1.0).epsilon(1e-12));

  const JointProbabilities ph = joint_detection_probabilities(kPi / 2.0, 0.0);
  CHECK(ph.p13 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ph.p14 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ph.p23 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ph.p24 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("joint detection probabilities match the closed form") {
  for (int i = 0; i < 13; ++i) {
    for (int j = 0; j < 11; ++j) {
      const double delta = 2.0 * kPi * i / 13.0;
      const double s = 2.0 * kPi * j / 11.0;
      const JointProbabilities got = joint_detection_probabilities(delta, s);
      const auto want = oracle::joint_probs(delta, s);
      CHECK(std::abs(got.p13 - want[0]) <= 1e-12);
      CHECK(std::abs(got.p14 - want[1]) <= 1e-12);
      CHECK(std::abs(got.p23 - want[2]) <= 1e-12);
      CHECK(std::abs(got.p24 - want[3]) <= 1e-12);
      const double sum = got.p13 + got.p14 + got.p23 + got.p24;
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      CHECK(got.p13 >= -1e-15);
      CHECK(got.p14 >= -1e-15);
      CHECK(got.p23 >= -1e-15);
      CHECK(got.p24 >= -1e-15);
    }
  }
}

TEST_CASE("conditional probabilities at pinned delays") {
  ObserverConfig cfg = exact_config();

  const auto [p1_at0, p2_at0] = conditional_probabilities_exact(cfg, 0.0);
  CHECK(p1_at0 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p2_at0 == doctest::Approx(0.25).epsilon(1e-12));

  const auto [p1_half, p2_half] = conditional_probabilities_exact(cfg, kPi);
  CHECK(p1_half == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p2_half == doctest::Approx(0.75).epsilon(1e-12));

  const auto [p1_quarter, p2_quarter] = conditional_probabilities_exact(cfg, kPi / 2.0);
  CHECK(p1_quarter == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p2_quarter == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("conditional probabilities match a quadrature oracle") {
  ObserverConfig cfg = exact_config();
  for (double omega : {1.0, 2.5}) {
    cfg.omega = omega;
    for (int i = 0; i < 9; ++i) {
      const double tau = 2.0 * kPi / omega * i / 9.0;
      const auto [p1, p2] = conditional_probabilities_exact(cfg, tau);
      const auto want = oracle::conditional_quadrature(omega, tau);
      CHECK(std::abs(p1 - want.first) <= 1e-9);
      CHECK(std::abs(p2 - want.second) <= 1e-9);
      CHECK(std::abs(p1 + p2 - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("retardance grid size does not move the exact marginal") {
  ObserverConfig cfg = exact_config();
  const double tau = 1.234;
  cfg.delta_grid_size = 16;
  const auto a = conditional_probabilities_exact(cfg, tau);
  cfg.delta_grid_size = 32;
  const auto b = conditional_probabilities_exact(cfg, tau);
  cfg.delta_grid_size = 1024;
  const auto c = conditional_probabilities_exact(cfg, tau);
  // The averaged integrand is a degree-2 trigonometric polynomial in the
  // retardance, so any uniform grid with at least 3 points is exact.
  CHECK(std::abs(a.first - b.first) <= 1e-13);
  CHECK(std::abs(b.first - c.first) <= 1e-13);
}

TEST_CASE("exact observer run traces the conditional fringe") {
  const ObserverConfig cfg = exact_config();
  const ObserverDataset ds = run_observer(cfg);
  REQUIRE(ds.rows.size() == 18);

  double prev_tau = -1.0;
  for (const ObserverRow& row : ds.rows) {
    CHECK(row.tau >= prev_tau);
    prev_tau = row.tau;
    CHECK(row.std_error == 0.0);
    CHECK(std::abs(row.p - oracle::curve(cfg.omega, row.emergent_time)) <= 1e-9);
    if (row.clock_label == "t1") {
      CHECK(row.emergent_time == doctest::Approx(row.tau).epsilon(1e-12));
    } else {
      CHECK(row.clock_label == "t2");
      CHECK(row.emergent_time ==
            doctest::Approx(row.tau + kPi / cfg.omega).epsilon(1e-12));
    }
  }

  // Both conditional readings appear for each delay, first reading first.
  for (std::size_t i = 0; i + 1 < ds.rows.size(); i += 2) {
    CHECK(ds.rows[i].tau == ds.rows[i + 1].tau);
    CHECK(ds.rows[i].clock_label == "t1");
    CHECK(ds.rows[i + 1].clock_label == "t2");
  }
}

TEST_CASE("exact observer run at a different clock rate") {
  const ObserverConfig cfg = exact_config(7, 2.5);
  const ObserverDataset ds = run_observer(cfg);
  REQUIRE(ds.rows.size() == 14);
  for (const ObserverRow& row : ds.rows) {
    CHECK(std::abs(row.p - oracle::curve(2.5, row.emergent_time)) <= 1e-9);
  }
}

TEST_CASE("empty delay list produces an empty dataset") {
  ObserverConfig cfg = exact_config();
  cfg.tau_list.clear();
  CHECK(run_observer(cfg).rows.empty());
}

TEST_CASE("sampled observer estimates track the fringe within error bars") {
  ObserverConfig cfg = exact_config();
  cfg.shots_per_delta = 10000;
  cfg.rng_seed = 2024;
  const ObserverDataset ds = run_observer(cfg);
  REQUIRE(ds.rows.size() == 18);
  for (const ObserverRow& row : ds.rows) {
    CHECK(row.std_error > 0.0);
    CHECK(row.std_error < 0.05);
    const double truth = oracle::curve(cfg.omega, row.emergent_time);
    CHECK(std::abs(row.p - truth) <= 4.0 * row.std_error + 1e-12);
    CHECK(row.p >= 0.0);
    CHECK(row.p <= 1.0);
  }
}

TEST_CASE("sampled observer runs are reproducible") {
  ObserverConfig cfg = exact_config(5);
  cfg.shots_per_delta = 500;
  cfg.rng_seed = 99;
  const ObserverDataset a = run_observer(cfg);
  const ObserverDataset b = run_observer(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].p == b.rows[i].p);
    CHECK(a.rows[i].std_error == b.rows[i].std_error);
  }

  cfg.rng_seed = 100;
  const ObserverDataset c = run_observer(cfg);
  bool any_differ = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].p != c.rows[i].p) any_differ = true;
  }
  CHECK(any_differ);
}

TEST_CASE("visibility fit recovers the exact fringe parameters") {
  const ObserverConfig cfg = exact_config();
  const ObserverDataset ds = run_observer(cfg);
  const VisibilityFit fit = fit_visibility(ds, cfg.omega);
  CHECK(std::abs(fit.visibility - 0.5) <= 1e-6);
  CHECK(fit.offset == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(fit.phase) <= 1e-6);
}

TEST_CASE("visibility fit on a flat dataset reports zero visibility") {
  ObserverDataset ds;
  for (int i = 0; i < 8; ++i) {
    ObserverRow row;
    row.clock_label = "t1";
    row.tau = 0.5 * i;
    row.emergent_time = 0.5 * i;
    row.p = 0.5;
    row.std_error = 0.0;
    ds.rows.push_back(row);
  }
  const VisibilityFit fit = fit_visibility(ds, 1.0);
  CHECK(std::abs(fit.visibility) <= 1e-9);
  CHECK(fit.offset == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("visibility fit on sampled data lands near the ideal value") {
  ObserverConfig cfg = exact_config();
  cfg.shots_per_delta = 10000;
  cfg.rng_seed = 7;
  const ObserverDataset ds = run_observer(cfg);
  const VisibilityFit fit = fit_visibility(ds, cfg.omega);
  CHECK(fit.visibility >= 0.45);
  CHECK(fit.visibility <= 0.55);
}

TEST_CASE("visibility fit rejects deficient designs") {
  ObserverDataset tiny;
  for (int i = 0; i < 3; ++i) {
    ObserverRow row;
    row.clock_label = "t1";
    row.tau = 1.0 * i;
    row.emergent_time = 1.0 * i;
    row.p = 0.5;
    tiny.rows.push_back(row);
  }
  CHECK_THROWS_AS(fit_visibility(tiny, 1.0), std::invalid_argument);

  ObserverDataset repeated;
  for (int i = 0; i < 6; ++i) {
    ObserverRow row;
    row.clock_label = "t1";
    row.tau = (i % 2) ? 1.0 : 0.0;
    row.emergent_time = row.tau;
    row.p = 0.6;
    repeated.rows.push_back(row);
  }
  CHECK_THROWS_AS(fit_visibility(repeated, 1.0), std::invalid_argument);

  // Times that alias to the same phase leave the model rank-deficient.
  ObserverDataset aliased;
  for (int i = 0; i < 4; ++i) {
    ObserverRow row;
    row.clock_label = "t1";
    row.tau = 2.0 * kPi * i;
    row.emergent_time = row.tau;
    row.p = 0.75;
    aliased.rows.push_back(row);
  }
  CHECK_THROWS_AS(fit_visibility(aliased, 1.0), std::runtime_error);
}

TEST_CASE("observer config validation") {
  ObserverConfig cfg = exact_config();
  cfg.delta_grid_size = 1;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = exact_config();
  cfg.shots_per_delta = -5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = exact_config();
  cfg.omega = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = exact_config();
  cfg.tau_list.push_back(-0.25);
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = exact_config();
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("observer CSV layout") {
  const ObserverConfig cfg = exact_config(3);
  const ObserverDataset ds = run_observer(cfg);
  const std::string csv = observer_csv(ds);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "clock_label,tau,emergent_time,p,stderr");

  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.find("t") == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == ds.rows.size());
}
