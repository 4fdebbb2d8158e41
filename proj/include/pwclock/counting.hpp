// Reproducible stochastic count generation: keyed counter-based RNG streams,
// Poisson and binomial samplers, and multinomial coincidence counts.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pwclock {

// Counter-based stream: each output is a hash of (key, counter), so streams
// with distinct keys are independent and a stream's draws depend only on its
// key and how many values were consumed, never on scheduling.
struct Stream {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  std::uint64_t next_u64();
  double next_double();  // uniform on [0, 1)
};

// Derive a stream key from the global seed plus up to three coordinates
// (module tag, row index, column index).
Stream make_stream(std::uint64_t seed, std::uint64_t tag = 0, std::uint64_t i = 0,
                   std::uint64_t j = 0);

struct CountRecord {
  std::vector<std::string> labels;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

// Binomial(n, p) via CDF inversion for small n*min(p,1-p) and transformed
// rejection with an exact log-gamma acceptance test for large.
std::int64_t sample_binomial(std::int64_t n, double p, Stream& stream);

// Poisson(mean) via multiplicative inversion below mean 30 and transformed
// rejection (normal-scale proposal, exact acceptance) above.
std::int64_t sample_poisson(double mean, Stream& stream);

// Multinomial(n, probs) via sequential conditional binomials. labels, when
// given, must match probs in length; otherwise decimal indices are used.
CountRecord sample_multinomial(const std::vector<double>& probs, std::int64_t n, Stream& stream,
                               std::vector<std::string> labels = {});

}  // namespace pwclock
