// Orchestration: execute the modes selected by an experiment spec, write the
// dataset files, the exact theory curve, and the run manifest.
#pragma once

#include <string>
#include <vector>

#include "pwclock/config.hpp"
#include "pwclock/observer.hpp"
#include "pwclock/tomography.hpp"

namespace pwclock {

struct RunResult {
  ObserverDataset observer;        // filled when the observer mode ran
  SuperObserverReport tomography;  // filled when the super-observer mode ran
  std::vector<std::string> warnings;
  std::vector<std::string> files_written;
};

// Exact t1 conditional-probability curve sampled at `points` times spanning
// [0, t_max] inclusive.
struct TheoryCurve {
  std::vector<double> time;
  std::vector<double> p;
};

TheoryCurve theory_curve(const ObserverConfig& cfg, double t_max, int points = 512);
std::string theory_csv(const TheoryCurve& curve);

// JSON renderings of the datasets (used when output_format = json).
std::string observer_json(const ObserverDataset& ds);
std::string superobserver_json(const SuperObserverReport& report);

// Run the experiment: selected modes, dataset files in the configured format,
// theory.csv, tomography_table.txt (super-observer modes), manifest.json.
// Reconstruction non-convergence lands in warnings (and the manifest), not
// in an error; I/O failures throw.
RunResult run(const ExperimentSpec& spec);

}  // namespace pwclock
