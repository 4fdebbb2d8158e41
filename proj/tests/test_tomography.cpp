#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pwclock/prepare.hpp"
#include "pwclock/tomography.hpp"

using namespace pwclock;

namespace {

constexpr double kPi = std::numbers::pi;

DensityMatrix singlet_density() { return projector(singlet_state()); }

double purity(const DensityMatrix& rho) {
  return trace(rho.mat() * rho.mat()).real();
}

ProjectionData make_data(const ProjectorSet& ps, std::vector<double> values) {
  ProjectionData data;
  data.labels = ps.labels;
  data.values = std::move(values);
  data.total = 0.0;
  for (double v : data.values) data.total += v;
  return data;
}

// Clamp negative eigenvalues of the linear estimate to a small floor and
// renormalize; the test-side twin of the MLE initializer.
DensityMatrix clamp_linear(const ProjectionData& data, const ProjectorSet& ps) {
  const CMat lin = linear_reconstruction(data, ps);
  const HermitianEigen eig = eig_hermitian(lin);
  CMat out = CMat::zero(4);
  double tr = 0.0;
  for (int k = 0; k < 4; ++k) tr += std::max(eig.values[k], 1e-6);
  for (int k = 0; k < 4; ++k) {
    const double w = std::max(eig.values[k], 1e-6) / tr;
    CVec v = CVec::zero(4);
    for (int i = 0; i < 4; ++i) v[i] = eig.vectors.at(i, k);
    out = out + w * outer(v, v);
  }
  return DensityMatrix(hermitize(out));
}

}  // namespace

TEST_CASE("erased global state is stationary") {
  const DensityMatrix singlet = singlet_density();

  const PureState at0 = erased_global_state(0.0);
  CHECK(fidelity(projector(at0), singlet) == doctest::Approx(1.0).epsilon(1e-12));

  const PureState at_quarter = erased_global_state(kPi / 2.0);
  CHECK(fidelity(projector(at_quarter), singlet) == doctest::Approx(1.0).epsilon(1e-12));

  oracle::Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double delta = 4.0 * kPi * (rng.uniform() - 0.5);
    const PureState evolved = erased_global_state(delta);
    CHECK(fidelity(projector(evolved), singlet) >= 1.0 - 1e-10);
  }
}

TEST_CASE("imperfect erasure dephases the delivered state") {
  const DensityMatrix singlet = singlet_density();

  const DensityMatrix full = erased_global_state_mixed(0.37, 1.0);
  CHECK(max_abs_diff(full.mat(), projector(erased_global_state(0.37)).mat()) <= 1e-12);

  const DensityMatrix dead = erased_global_state_mixed(0.37, 0.0);
  CHECK(purity(dead) == doctest::Approx(0.5).epsilon(1e-12));
  // Degenerate zero eigenvalues in the Uhlmann root limit the precision here.
  CHECK(fidelity(dead, singlet) == doctest::Approx(0.5).epsilon(1e-7));

  const DensityMatrix partial = erased_global_state_mixed(1.1, 0.6);
  const double f = fidelity(partial, singlet);
  CHECK(f > 0.5);
  CHECK(f < 1.0);

  CHECK_THROWS_AS(erased_global_state_mixed(0.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(erased_global_state_mixed(0.0, 1.1), std::invalid_argument);
}

TEST_CASE("projector set is the expected analyzer family") {
  const ProjectorSet ps = build_projector_set();
  REQUIRE(ps.labels.size() == 16);
  REQUIRE(ps.projectors.size() == 16);

  CHECK(std::count(ps.labels.begin(), ps.labels.end(), "HH") == 1);
  CHECK(std::count(ps.labels.begin(), ps.labels.end(), "DR") == 1);
  for (const std::string& label : ps.labels) {
    REQUIRE(label.size() == 2);
    CHECK(std::string("HVDR").find(label[0]) != std::string::npos);
    CHECK(std::string("HVDR").find(label[1]) != std::string::npos);
  }

  for (const CMat& proj : ps.projectors) {
    CHECK(is_hermitian(proj, 1e-12));
    CHECK(max_abs_diff(proj * proj, proj) <= 1e-12);
    CHECK(trace(proj).real() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("measurement map is well conditioned") {
  const ProjectorSet ps = build_projector_set();
  const double cond = measurement_condition_number(ps);
  // 2-norm condition number of this analyzer family is (21 + 5 sqrt(17))/4.
  CHECK(cond == doctest::Approx(10.403882032022073).epsilon(1e-9));
  CHECK(cond < 100.0);
}

TEST_CASE("exact tomography records Born probabilities") {
  const ProjectorSet ps = build_projector_set();
  const Stream stream = make_stream(0);

  const PureState hh = ququart_state(SourceConfig{});
  const ProjectionData data_hh = simulate_tomography_counts(projector(hh), ps, 0, stream);
  const ProjectionData data_s =
      simulate_tomography_counts(singlet_density(), ps, 0, stream);

  double total = 0.0;
  for (std::size_t k = 0; k < ps.labels.size(); ++k) {
    total += data_s.values[k];
    if (ps.labels[k] == "HH") {
      CHECK(data_hh.values[k] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(data_s.values[k]) <= 1e-12);
    }
    if (ps.labels[k] == "HV") {
      CHECK(data_s.values[k] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  // Singlet Born probabilities over the full set sum to 3.5.
  CHECK(total == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(data_s.total == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("sampled tomography is reproducible and validated") {
  const ProjectorSet ps = build_projector_set();
  const DensityMatrix rho = singlet_density();

  const ProjectionData a = simulate_tomography_counts(rho, ps, 2000, make_stream(5, 2, 1));
  const ProjectionData b = simulate_tomography_counts(rho, ps, 2000, make_stream(5, 2, 1));
  CHECK(a.values == b.values);

  const ProjectionData c = simulate_tomography_counts(rho, ps, 2000, make_stream(5, 2, 2));
  CHECK(a.values != c.values);

  for (std::size_t k = 0; k < ps.labels.size(); ++k) {
    CHECK(a.values[k] >= 0.0);
    CHECK(a.values[k] == std::floor(a.values[k]));
    if (ps.labels[k] == "HH") CHECK(a.values[k] == 0.0);  // zero rate stays zero
  }

  CHECK_THROWS_AS(simulate_tomography_counts(rho, ps, -1, make_stream(0)),
                  std::invalid_argument);
}

TEST_CASE("linear reconstruction inverts exact projections") {
  const ProjectorSet ps = build_projector_set();
  const Stream stream = make_stream(0);

  for (const DensityMatrix& rho :
       {singlet_density(), DensityMatrix(0.25 * CMat::identity(4)),
        projector(ququart_state(SourceConfig{}))}) {
    const ProjectionData data = simulate_tomography_counts(rho, ps, 0, stream);
    const CMat rec = linear_reconstruction(data, ps);
    CHECK(max_abs_diff(rec, rho.mat()) <= 1e-10);
  }

  oracle::Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const DensityMatrix rho(oracle::random_density(rng));
    const ProjectionData data = simulate_tomography_counts(rho, ps, 0, stream);
    const CMat rec = linear_reconstruction(data, ps);
    CHECK(max_abs_diff(rec, rho.mat()) <= 1e-9);
  }
}

TEST_CASE("linear reconstruction is scale invariant") {
  const ProjectorSet ps = build_projector_set();
  const ProjectionData base =
      simulate_tomography_counts(singlet_density(), ps, 0, make_stream(0));
  ProjectionData scaled = base;
  for (double& v : scaled.values) v *= 7311.0;
  scaled.total = base.total * 7311.0;
  const CMat a = linear_reconstruction(base, ps);
  const CMat b = linear_reconstruction(scaled, ps);
  CHECK(max_abs_diff(a, b) <= 1e-10);
}

TEST_CASE("linear reconstruction rejects malformed data") {
  const ProjectorSet ps = build_projector_set();

  ProjectionData short_data = make_data(ps, std::vector<double>(16, 1.0));
  short_data.values.pop_back();
  CHECK_THROWS_AS(linear_reconstruction(short_data, ps), std::invalid_argument);

  ProjectionData shuffled = make_data(ps, std::vector<double>(16, 1.0));
  std::swap(shuffled.labels[0], shuffled.labels[1]);
  CHECK_THROWS_AS(linear_reconstruction(shuffled, ps), std::invalid_argument);

  const ProjectionData zeros = make_data(ps, std::vector<double>(16, 0.0));
  CHECK_THROWS_AS(linear_reconstruction(zeros, ps), std::runtime_error);
}

TEST_CASE("mle recovers the exact singlet") {
  const ProjectorSet ps = build_projector_set();
  TomographyConfig cfg;
  cfg.external_times = {0.0};
  const ProjectionData data =
      simulate_tomography_counts(singlet_density(), ps, 0, make_stream(0));
  const MleResult res = mle_refine(data, ps, cfg);
  CHECK(res.converged);
  CHECK(fidelity(res.rho, singlet_density()) >= 1.0 - 1e-6);
}

TEST_CASE("mle on flat counts returns the maximally mixed state") {
  const ProjectorSet ps = build_projector_set();
  TomographyConfig cfg;
  cfg.external_times = {0.0};
  const ProjectionData data =
      simulate_tomography_counts(DensityMatrix(0.25 * CMat::identity(4)), ps, 0,
                                 make_stream(0));
  const MleResult res = mle_refine(data, ps, cfg);
  CHECK(res.converged);
  CHECK(fidelity(res.rho, DensityMatrix(0.25 * CMat::identity(4))) >= 0.999);
}

TEST_CASE("mle tracks the truth on noisy counts") {
  const ProjectorSet ps = build_projector_set();
  const DensityMatrix truth = singlet_density();
  TomographyConfig cfg;
  cfg.external_times = {0.0};

  double fid_sum = 0.0;
  const int seeds = 50;
  for (int seed = 0; seed < seeds; ++seed) {
    const ProjectionData data = simulate_tomography_counts(
        truth, ps, 10000, make_stream(static_cast<std::uint64_t>(seed), 2, 0));
    const MleResult res = mle_refine(data, ps, cfg);
    CHECK(res.converged);
    fid_sum += fidelity(res.rho, truth);
  }
  CHECK(fid_sum / seeds >= 0.98);
}

TEST_CASE("mle log-likelihood history is monotone and iterates are physical") {
  const ProjectorSet ps = build_projector_set();
  TomographyConfig cfg;
  cfg.external_times = {0.0};
  oracle::Rng rng(77);

  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> values(16, 0.0);
    if (rep == 0) {
      // all-zero record
    } else if (rep == 1) {
      values[3] = 5000.0;  // single projector dominates
    } else {
      for (double& v : values) {
        v = std::floor(rng.uniform() * 200.0);
        if (rng.uniform() < 0.35) v = 0.0;
      }
    }
    const ProjectionData data = make_data(ps, values);
    const MleResult res = mle_refine(data, ps, cfg);

    for (std::size_t i = 1; i < res.loglik_history.size(); ++i) {
      CHECK(res.loglik_history[i] >= res.loglik_history[i - 1]);
    }
    const HermitianEigen eig = eig_hermitian(res.rho.mat());
    for (int k = 0; k < 4; ++k) CHECK(eig.values[k] >= -1e-10);
    CHECK(trace(res.rho.mat()).real() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("mle edge behavior") {
  const ProjectorSet ps = build_projector_set();
  TomographyConfig cfg;
  cfg.external_times = {0.0};

  const ProjectionData zeros = make_data(ps, std::vector<double>(16, 0.0));
  const MleResult flat = mle_refine(zeros, ps, cfg);
  CHECK(flat.converged);
  CHECK(max_abs_diff(flat.rho.mat(), 0.25 * CMat::identity(4)) <= 1e-12);

  TomographyConfig starved = cfg;
  starved.mle_max_iters = 1;
  const ProjectionData noisy = simulate_tomography_counts(
      singlet_density(), ps, 200, make_stream(4, 2, 0));
  const MleResult res = mle_refine(noisy, ps, starved);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 1);
}

TEST_CASE("mle does not lose ground to the clamped linear start") {
  const ProjectorSet ps = build_projector_set();
  const DensityMatrix truth = singlet_density();
  TomographyConfig cfg;
  cfg.external_times = {0.0};

  for (int seed = 0; seed < 20; ++seed) {
    const ProjectionData data = simulate_tomography_counts(
        truth, ps, 1000, make_stream(static_cast<std::uint64_t>(seed) + 100, 2, 0));
    const double f_lin = fidelity(clamp_linear(data, ps), truth);
    const double f_mle = fidelity(mle_refine(data, ps, cfg).rho, truth);
    CHECK(f_mle >= f_lin - 0.01);
  }
}

TEST_CASE("exact super-observer report shows stationarity") {
  TomographyConfig cfg;
  cfg.external_times = {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 2.0};
  cfg.counts_per_projection = 0;
  const SuperObserverReport report = run_superobserver(cfg);
  REQUIRE(report.rows.size() == 4);
  double prev = -1.0;
  for (const SuperObserverRow& row : report.rows) {
    CHECK(row.external_time > prev);
    prev = row.external_time;
    CHECK(std::abs(row.fidelity - 1.0) <= 1e-6);
    CHECK(row.mle_converged);
  }
}

TEST_CASE("sampled super-observer fidelities stay near unity") {
  TomographyConfig cfg;
  cfg.external_times = {0.0, 0.8, 1.6, 4.7};
  cfg.counts_per_projection = 500;
  cfg.rng_seed = 11;
  const SuperObserverReport report = run_superobserver(cfg);
  REQUIRE(report.rows.size() == 4);
  for (const SuperObserverRow& row : report.rows) {
    CHECK(row.fidelity >= 0.88);
    CHECK(row.fidelity <= 1.0);
  }

  const SuperObserverReport again = run_superobserver(cfg);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].fidelity == again.rows[i].fidelity);
  }
}

TEST_CASE("tomography config validation") {
  TomographyConfig cfg;
  cfg.external_times = {0.0, 1.0};
  CHECK_NOTHROW(validate(cfg));

  cfg.counts_per_projection = -3;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = TomographyConfig{};
  cfg.external_times = {std::nan("")};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = TomographyConfig{};
  cfg.external_times = {0.0};
  cfg.mle_tolerance = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = TomographyConfig{};
  cfg.external_times = {0.0};
  cfg.mle_max_iters = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

  cfg = TomographyConfig{};
  cfg.external_times = {0.0};
  cfg.erasure_visibility = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("super-observer CSV and table layout") {
  TomographyConfig cfg;
  cfg.external_times = {0.0, 1.0};
  const SuperObserverReport report = run_superobserver(cfg);

  const std::string csv = superobserver_csv(report);
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "external_time_over_omega,fidelity");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 1);
  }
  CHECK(rows == report.rows.size());

  const std::string table = superobserver_table(report);
  CHECK(table.find("external time") != std::string::npos);
  CHECK(table.find("fidelity") != std::string::npos);
  CHECK(table.find("1.000000") != std::string::npos);
}
