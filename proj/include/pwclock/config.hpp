// Experiment description: a flat key = value document with dotted keys,
// defaults for every omitted field, and strict validation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwclock/observer.hpp"
#include "pwclock/tomography.hpp"

namespace pwclock {

enum class RunMode { kObserver, kSuperObserver, kBoth };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);  // throws on unknown name

struct ExperimentSpec {
  RunMode mode = RunMode::kBoth;
  std::uint64_t seed = 0;

  // observer.* keys
  int tau_count = 9;
  double tau_span = 1.0;  // clock periods covered by the delay sweep
  int delta_grid = 32;
  std::int64_t shots_per_delta = 0;
  double omega = 1.0;

  // tomography.* keys
  std::vector<double> external_times = {0.0, 0.7853981634, 1.5707963268, 4.7123889804};
  std::int64_t counts_per_projection = 0;
  double mle_tolerance = 1e-10;
  int mle_max_iters = 5000;
  double erasure_visibility = 1.0;

  std::string output_dir = ".";
  std::string output_format = "csv";

  bool operator==(const ExperimentSpec&) const = default;
};

// Parse a config document. Lines are `key = value`, `#` starts a comment,
// arrays are bracketed comma lists. Unknown keys, type mismatches, and
// out-of-range values throw std::invalid_argument naming the key.
ExperimentSpec parse_spec(const std::string& text);

// Same, reading the document from a file; I/O failure throws
// std::runtime_error.
ExperimentSpec parse_spec_file(const std::string& path);

// Canonical document listing every key; parse_spec(serialize_spec(s)) == s.
std::string serialize_spec(const ExperimentSpec& spec);

// Resolve module configs. The delay list is tau_i = i * tau_span * T / tau_count
// for i in [0, tau_count) with T = 2 pi / omega, covering [0, tau_span * T).
ObserverConfig observer_config(const ExperimentSpec& spec);
TomographyConfig tomography_config(const ExperimentSpec& spec);

}  // namespace pwclock
