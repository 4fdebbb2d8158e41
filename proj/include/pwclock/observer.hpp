// Observer-mode protocol: initialize the clock photon behind a PBS, evolve
// both photons through a shared retarder of every thickness, delay the clock
// photon, and read conditional probabilities that trace the emergent-time
// sinusoid.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pwclock {

struct ObserverConfig {
  std::vector<double> tau_list;       // clock delays, seconds
  int delta_grid_size = 32;           // marginalization grid over [0, 2 pi)
  std::int64_t shots_per_delta = 0;   // simulated pairs per grid point, 0 = exact
  double omega = 1.0;                 // clock frequency, rad/s
  std::uint64_t rng_seed = 0;
};

// Throws std::invalid_argument when an invariant fails.
void validate(const ObserverConfig& cfg);

struct JointProbabilities {
  double p13 = 0.0;  // clock H, system V
  double p14 = 0.0;  // clock H, system H
  double p23 = 0.0;  // clock V, system V
  double p24 = 0.0;  // clock V, system H
};

// Full pipeline for one plate setting: singlet source, post-selection of the
// clock photon as |H>, bilateral retarder(delta, 45deg), extra retarder
// (tau_phase, 45deg) on the clock photon, coincidence probabilities.
// tau_phase is the delay expressed as a phase, omega*tau.
JointProbabilities joint_detection_probabilities(double delta, double tau_phase);

// Marginalize the joint probabilities over a uniform delta grid and condition
// on the clock reading: p_t1 = <p13>/<p13+p14>, p_t2 = <p23>/<p23+p24>.
std::pair<double, double> conditional_probabilities_exact(const ObserverConfig& cfg, double tau);

struct ObserverRow {
  std::string clock_label;  // "t1" or "t2"
  double tau = 0.0;
  double emergent_time = 0.0;
  double p = 0.0;
  double std_error = 0.0;
};

struct ObserverDataset {
  std::vector<ObserverRow> rows;
};

// Two rows per delay (t1 and t2), sorted by tau ascending with t1 first.
// Exact mode (shots_per_delta = 0) evaluates the marginalization directly
// with zero standard error; sampled mode draws multinomial counts per grid
// point from a stream keyed by (rng_seed, delay index, grid index) and
// reports binomial standard errors. run_observer distributes cells across
// OpenMP threads; run_observer_serial is the plain-loop reference. The two
// agree bit for bit.
ObserverDataset run_observer(const ObserverConfig& cfg);
ObserverDataset run_observer_serial(const ObserverConfig& cfg);

struct VisibilityFit {
  double visibility = 0.0;  // amplitude / offset
  double phase = 0.0;       // radians, p(t) = offset*(1 + visibility*cos(omega t + phase))
  double offset = 0.0;
};

// Least-squares sinusoid fit over (emergent_time, p) pairs. Needs at least
// four rows at four distinct emergent times; a degenerate design matrix is a
// fit error (std::runtime_error).
VisibilityFit fit_visibility(const ObserverDataset& ds, double omega);

// CSV with header clock_label,tau,emergent_time,p,stderr in dataset order.
std::string observer_csv(const ObserverDataset& ds);
void write_observer_csv(const ObserverDataset& ds, const std::string& path);

}  // namespace pwclock
