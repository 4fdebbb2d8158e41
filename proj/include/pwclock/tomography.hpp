// Super-observer mode: quantum-erasure state delivery, 16-projection
// two-photon tomography, linear and maximum-likelihood reconstruction, and
// the stationarity fidelity report.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwclock/counting.hpp"
#include "pwclock/linalg.hpp"

namespace pwclock {

struct TomographyConfig {
  std::vector<double> external_times;     // plate-A settings, units 1/omega
  std::int64_t counts_per_projection = 0; // Poisson scale, 0 = exact
  std::uint64_t rng_seed = 0;
  double mle_tolerance = 1e-10;
  int mle_max_iters = 5000;
  double erasure_visibility = 1.0;        // coherence kept between recombined paths
};

// Throws std::invalid_argument when an invariant fails.
void validate(const TomographyConfig& cfg);

// Global two-photon state seen by the super-observer at plate phase delta:
// the PBS splits the clock photon, both paths traverse the same plates, and
// the closed-box interferometer recombines them with the which-path record
// erased. Ideal erasure plus exit post-selection reduces to the unsplit
// bilateral evolution U(delta) x U(delta) of the singlet, which the singlet's
// U x U invariance leaves unchanged up to phase.
PureState erased_global_state(double delta);

// Same with imperfect erasure: the coherence between the clock photon's
// recombined H and V paths is scaled by erasure_visibility in [0, 1] before
// the bilateral evolution; 1 recovers the pure case, 0 a fully dephased mix.
DensityMatrix erased_global_state_mixed(double delta, double erasure_visibility);

struct ProjectorSet {
  std::vector<std::string> labels;  // two characters, photon 1 then photon 2
  std::vector<CMat> projectors;     // rank-1, dim 4, same order as labels
};

// The 16 product projectors over per-photon analyzer states
// {H, V, D=(H+V)/sqrt2, R=(H-iV)/sqrt2}.
ProjectorSet build_projector_set();

// 2-norm condition number of the 16x16 map from vec(rho) to the projection
// probabilities; finite and small for an informationally complete set.
double measurement_condition_number(const ProjectorSet& ps);

// One tomography acquisition. Exact mode stores Born probabilities; sampled
// mode stores Poisson counts as real values. Keeping the values real lets
// both modes flow through the same reconstruction code.
struct ProjectionData {
  std::vector<std::string> labels;
  std::vector<double> values;
  double total = 0.0;
};

// Exact mode (n = 0) records Tr(rho Pi_k); sampled mode draws an independent
// Poisson count with mean n*Tr(rho Pi_k) per projector, on a sub-stream of
// `stream` keyed by the projector index.
ProjectionData simulate_tomography_counts(const DensityMatrix& rho, const ProjectorSet& ps,
                                          std::int64_t n, const Stream& stream);

// Solve the 16x16 linear system relating the recorded values to the density
// matrix entries; returns the Hermitized, trace-normalized solution, which
// may have negative eigenvalues under noise. Throws std::runtime_error when
// the data admit no normalizable solution (zero reconstructed trace).
CMat linear_reconstruction(const ProjectionData& data, const ProjectorSet& ps);

struct MleResult {
  DensityMatrix rho;
  bool converged = false;
  int iterations = 0;
  std::vector<double> loglik_history;  // accepted values, non-decreasing
};

// Maximum-likelihood reconstruction over rho = T^dag T / Tr(T^dag T) with T
// lower triangular (16 real parameters), independent-Poisson likelihood with
// the total rate profiled out. Ascent uses Barzilai-Borwein steps with a
// backtracking line search, so the recorded log-likelihood never decreases;
// convergence is declared when the per-step improvement drops below
// mle_tolerance relative to the log-likelihood magnitude. Initialized from
// the eigenvalue-clamped linear reconstruction. Hitting mle_max_iters leaves
// converged=false with the best iterate in rho.
MleResult mle_refine(const ProjectionData& data, const ProjectorSet& ps,
                     const TomographyConfig& cfg);

struct SuperObserverRow {
  double external_time = 0.0;  // units 1/omega
  double fidelity = 0.0;       // against the singlet input
  bool mle_converged = true;
  int mle_iterations = 0;
};

struct SuperObserverReport {
  std::vector<SuperObserverRow> rows;  // ascending external time
};

// For each external time: erased global state, simulated counts, linear +
// MLE reconstruction, fidelity against the singlet. run_superobserver
// distributes rows across OpenMP threads; run_superobserver_serial is the
// plain-loop reference. The two agree bit for bit.
SuperObserverReport run_superobserver(const TomographyConfig& cfg);
SuperObserverReport run_superobserver_serial(const TomographyConfig& cfg);

// CSV with header external_time_over_omega,fidelity in report order.
std::string superobserver_csv(const SuperObserverReport& report);
void write_superobserver_csv(const SuperObserverReport& report, const std::string& path);

// Two-column text table of external times and fidelities.
std::string superobserver_table(const SuperObserverReport& report);

}  // namespace pwclock
