#include "pwclock/observer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "pwclock/counting.hpp"
#include "pwclock/linalg.hpp"
#include "pwclock/optics.hpp"
#include "pwclock/prepare.hpp"

namespace pwclock {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kObserverStreamTag = 1;

}  // namespace

void validate(const ObserverConfig& cfg) {
  if (cfg.delta_grid_size < 2) {
    throw std::invalid_argument("observer delta_grid_size must be at least 2");
  }
  if (cfg.shots_per_delta < 0) {
    throw std::invalid_argument("observer shots_per_delta must be nonnegative");
  }
  if (!std::isfinite(cfg.omega) || cfg.omega <= 0.0) {
    throw std::invalid_argument("observer omega must be positive");
  }
  for (double tau : cfg.tau_list) {
    if (!std::isfinite(tau) || tau < 0.0) {
      throw std::invalid_argument("observer clock delays must be nonnegative");
    }
  }
}

JointProbabilities joint_detection_probabilities(double delta, double tau_phase) {
  static const PureState source = singlet_state();
  // PBS1 transmits the clock photon (second slot) as |H>; keep those
  // components and renormalize. The reflected branch never reaches the
  // coincidence logic.
  CVec kept = CVec::zero(4);
  kept[0] = source.vec()[0];
  kept[2] = source.vec()[2];
  const double scale = 1.0 / std::sqrt(kept.norm_sq());
  const PureState initialized(cx(scale, 0.0) * kept);

  const OpticalUnitary plate_a = retarder_unitary(Retarder{delta, kQuarterTurn});
  const OpticalUnitary plate_b = retarder_unitary(Retarder{tau_phase, kQuarterTurn});
  const OpticalUnitary clock_chain(plate_b.mat() * plate_a.mat());
  const PureState out = apply(tensor_product(plate_a, clock_chain), initialized);

  // Amplitude order (HH, HV, VH, VV) = (system, clock); detectors 1/2 read
  // clock H/V, detectors 3/4 read system V/H.
  JointProbabilities jp;
  jp.p13 = std::norm(out.vec()[2]);
  jp.p14 = std::norm(out.vec()[0]);
  jp.p23 = std::norm(out.vec()[3]);
  jp.p24 = std::norm(out.vec()[1]);
  return jp;
}

std::pair<double, double> conditional_probabilities_exact(const ObserverConfig& cfg, double tau) {
  validate(cfg);
  const int g = cfg.delta_grid_size;
  const double tau_phase = cfg.omega * tau;
  double s13 = 0.0, s14 = 0.0, s23 = 0.0, s24 = 0.0;
  for (int j = 0; j < g; ++j) {
    const double delta = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(g);
    const JointProbabilities jp = joint_detection_probabilities(delta, tau_phase);
    s13 += jp.p13;
    s14 += jp.p14;
    s23 += jp.p23;
    s24 += jp.p24;
  }
  return {s13 / (s13 + s14), s23 / (s23 + s24)};
}

namespace {

ObserverRow make_row(const char* label, double tau, double emergent_time, double p, double se) {
  ObserverRow row;
  row.clock_label = label;
  row.tau = tau;
  row.emergent_time = emergent_time;
  row.p = p;
  row.std_error = se;
  return row;
}

// Conditional estimate from aggregated counts; with no conditioning events
// the estimate is undefined, so report the uninformative midpoint with
// maximal standard error.
void counts_to_estimate(std::int64_t hits, std::int64_t denom, double* p, double* se) {
  if (denom <= 0) {
    *p = 0.5;
    *se = 0.5;
    return;
  }
  *p = static_cast<double>(hits) / static_cast<double>(denom);
  *se = std::sqrt(*p * (1.0 - *p) / static_cast<double>(denom));
}

ObserverDataset run_observer_impl(const ObserverConfig& cfg, bool parallel) {
  validate(cfg);
  ObserverDataset ds;
  const int n_tau = static_cast<int>(cfg.tau_list.size());
  if (n_tau == 0) return ds;
  ds.rows.resize(2 * static_cast<std::size_t>(n_tau));
  const double half_period = kPi / cfg.omega;

  if (cfg.shots_per_delta == 0) {
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < n_tau; ++i) {
      const double tau = cfg.tau_list[static_cast<std::size_t>(i)];
      const auto [p1, p2] = conditional_probabilities_exact(cfg, tau);
      ds.rows[2 * static_cast<std::size_t>(i)] = make_row("t1", tau, tau, p1, 0.0);
      ds.rows[2 * static_cast<std::size_t>(i) + 1] =
          make_row("t2", tau, tau + half_period, p2, 0.0);
    }
  } else {
    const int g = cfg.delta_grid_size;
    const int cells = n_tau * g;
    std::vector<std::array<std::int64_t, 4>> cell_counts(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(static) if (parallel)
    for (int c = 0; c < cells; ++c) {
      const int i = c / g;
      const int j = c % g;
      const double delta = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(g);
      const double tau_phase = cfg.omega * cfg.tau_list[static_cast<std::size_t>(i)];
      const JointProbabilities jp = joint_detection_probabilities(delta, tau_phase);
      Stream stream = make_stream(cfg.rng_seed, kObserverStreamTag,
                                  static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      const CountRecord rec = sample_multinomial({jp.p13, jp.p14, jp.p23, jp.p24},
                                                 cfg.shots_per_delta, stream);
      for (int k = 0; k < 4; ++k) {
        cell_counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
            rec.counts[static_cast<std::size_t>(k)];
      }
    }
    for (int i = 0; i < n_tau; ++i) {
      std::array<std::int64_t, 4> sums = {0, 0, 0, 0};
      for (int j = 0; j < g; ++j) {
        const auto& cell = cell_counts[static_cast<std::size_t>(i * g + j)];
        for (int k = 0; k < 4; ++k) sums[static_cast<std::size_t>(k)] += cell[static_cast<std::size_t>(k)];
      }
      const double tau = cfg.tau_list[static_cast<std::size_t>(i)];
      double p1, se1, p2, se2;
      counts_to_estimate(sums[0], sums[0] + sums[1], &p1, &se1);
      counts_to_estimate(sums[2], sums[2] + sums[3], &p2, &se2);
      ds.rows[2 * static_cast<std::size_t>(i)] = make_row("t1", tau, tau, p1, se1);
      ds.rows[2 * static_cast<std::size_t>(i) + 1] =
          make_row("t2", tau, tau + half_period, p2, se2);
    }
  }

  std::stable_sort(ds.rows.begin(), ds.rows.end(),
                   [](const ObserverRow& a, const ObserverRow& b) { return a.tau < b.tau; });
  return ds;
}

}  // namespace

ObserverDataset run_observer(const ObserverConfig& cfg) { return run_observer_impl(cfg, true); }

ObserverDataset run_observer_serial(const ObserverConfig& cfg) {
  return run_observer_impl(cfg, false);
}

VisibilityFit fit_visibility(const ObserverDataset& ds, double omega) {
  if (!std::isfinite(omega) || omega <= 0.0) {
    throw std::invalid_argument("fit omega must be positive");
  }
  if (ds.rows.size() < 4) {
    throw std::invalid_argument("visibility fit needs at least four rows");
  }
  std::vector<double> times;
  times.reserve(ds.rows.size());
  for (const auto& row : ds.rows) times.push_back(row.emergent_time);
  std::sort(times.begin(), times.end());
  const auto last = std::unique(times.begin(), times.end());
  if (std::distance(times.begin(), last) < 4) {
    throw std::invalid_argument("visibility fit needs four distinct emergent times");
  }

  // Normal equations for p(t) = c0 + a cos(omega t) + b sin(omega t).
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rhs[3] = {0, 0, 0};
  for (const auto& row : ds.rows) {
    const double basis[3] = {1.0, std::cos(omega * row.emergent_time),
                             std::sin(omega * row.emergent_time)};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
      rhs[r] += basis[r] * row.p;
    }
  }

  // Gaussian elimination with partial pivoting on the 3x3 system.
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[perm[r]][col]) > std::abs(m[perm[pivot]][col])) pivot = r;
    }
    std::swap(perm[col], perm[pivot]);
    const double diag = m[perm[col]][col];
    if (std::abs(diag) < 1e-12 * static_cast<double>(ds.rows.size())) {
      throw std::runtime_error("visibility fit: degenerate design matrix");
    }
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[perm[r]][col] / diag;
      for (int c = col; c < 3; ++c) m[perm[r]][c] -= f * m[perm[col]][c];
      rhs[perm[r]] -= f * rhs[perm[col]];
    }
  }
  double sol[3];
  for (int col = 2; col >= 0; --col) {
    double acc = rhs[perm[col]];
    for (int c = col + 1; c < 3; ++c) acc -= m[perm[col]][c] * sol[c];
    sol[col] = acc / m[perm[col]][col];
  }

  const double c0 = sol[0];
  const double amplitude = std::hypot(sol[1], sol[2]);
  VisibilityFit fit;
  fit.offset = c0;
  if (amplitude == 0.0) return fit;
  if (!(c0 > 0.0)) throw std::runtime_error("visibility fit: nonpositive offset");
  fit.visibility = amplitude / c0;
  fit.phase = std::atan2(-sol[2], sol[1]);
  return fit;
}

namespace {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

std::string observer_csv(const ObserverDataset& ds) {
  std::string out = "clock_label,tau,emergent_time,p,stderr\n";
  for (const auto& row : ds.rows) {
    out += row.clock_label;
    out += ',';
    out += format_number(row.tau);
    out += ',';
    out += format_number(row.emergent_time);
    out += ',';
    out += format_number(row.p);
    out += ',';
    out += format_number(row.std_error);
    out += '\n';
  }
  return out;
}

void write_observer_csv(const ObserverDataset& ds, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << observer_csv(ds);
  file.flush();
  if (!file) throw std::runtime_error("write failed: " + path);
}

}  // namespace pwclock
