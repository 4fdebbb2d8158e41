#include "pwclock/counting.hpp"

#include <cmath>
#include <stdexcept>

namespace pwclock {

namespace {

// splitmix64 finalizer: a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t Stream::next_u64() {
  counter += 1;
  return mix64(key + counter * kGamma);
}

double Stream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Stream make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t i, std::uint64_t j) {
  std::uint64_t k = mix64(seed ^ 0x243f6a8885a308d3ULL);
  k = mix64(k ^ (tag + kGamma));
  k = mix64(k ^ (i + 0x452821e638d01377ULL));
  k = mix64(k ^ (j + 0x13198a2e03707344ULL));
  Stream s;
  s.key = k;
  return s;
}

namespace {

// CDF walk; suitable while n*p stays small.
std::int64_t binomial_inversion(std::int64_t n, double p, Stream& stream) {
  const double q = 1.0 - p;
  const double qn = std::exp(static_cast<double>(n) * std::log(q));
  const double np = static_cast<double>(n) * p;
  const double bound =
      std::min(static_cast<double>(n), np + 10.0 * std::sqrt(np * q + 1.0));
  for (;;) {
    double u = stream.next_double();
    double px = qn;
    std::int64_t x = 0;
    bool overflow = false;
    while (u > px) {
      x += 1;
      if (static_cast<double>(x) > bound) {
        overflow = true;
        break;
      }
      u -= px;
      px *= (static_cast<double>(n - x + 1) * p) / (static_cast<double>(x) * q);
    }
    if (!overflow) return x;
  }
}

// Hormann's transformed-rejection binomial sampler (BTRS). Requires
// n*q >= 10 with q = min(p, 1-p); the log-gamma acceptance test is exact.
std::int64_t binomial_btrs(std::int64_t n, double q, Stream& stream) {
  const double nd = static_cast<double>(n);
  const double spq = std::sqrt(nd * q * (1.0 - q));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * q;
  const double c = nd * q + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(q / (1.0 - q));
  const std::int64_t m = static_cast<std::int64_t>(std::floor((nd + 1.0) * q));
  const double h = std::lgamma(static_cast<double>(m) + 1.0) +
                   std::lgamma(static_cast<double>(n - m) + 1.0);
  for (;;) {
    const double u = stream.next_double() - 0.5;
    double v = stream.next_double();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > nd) continue;
    const std::int64_t k = static_cast<std::int64_t>(kd);
    if (us >= 0.07 && v <= vr) return k;
    v = std::log(v * alpha / (a / (us * us) + b));
    const double accept = h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                          (kd - static_cast<double>(m)) * lpq;
    if (v <= accept) return k;
  }
}

}  // namespace

std::int64_t sample_binomial(std::int64_t n, double p, Stream& stream) {
  if (n < 0) throw std::invalid_argument("binomial trial count must be nonnegative");
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial probability must lie in [0, 1]");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flipped = p > 0.5;
  const double q = flipped ? 1.0 - p : p;
  std::int64_t k;
  if (static_cast<double>(n) * q <= 30.0) {
    k = binomial_inversion(n, q, stream);
  } else {
    k = binomial_btrs(n, q, stream);
  }
  return flipped ? n - k : k;
}

namespace {

// Knuth multiplicative inversion: count uniforms until their product drops
// below exp(-mean).
std::int64_t poisson_inversion(double mean, Stream& stream) {
  const double enlam = std::exp(-mean);
  std::int64_t x = 0;
  double prod = 1.0;
  for (;;) {
    prod *= stream.next_double();
    if (prod <= enlam) return x;
    x += 1;
  }
}

// Hormann's transformed-rejection Poisson sampler (PTRS); exact acceptance
// via log-gamma. Requires mean >= 10 or so; used above 30 here.
std::int64_t poisson_ptrs(double mean, Stream& stream) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.next_double() - 0.5;
    const double v = stream.next_double();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + kd * loglam - std::lgamma(kd + 1.0)) {
      return static_cast<std::int64_t>(kd);
    }
  }
}

}  // namespace

std::int64_t sample_poisson(double mean, Stream& stream) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw std::invalid_argument("poisson mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_inversion(mean, stream);
  return poisson_ptrs(mean, stream);
}

CountRecord sample_multinomial(const std::vector<double>& probs, std::int64_t n, Stream& stream,
                               std::vector<std::string> labels) {
  if (probs.empty()) throw std::invalid_argument("multinomial needs at least one outcome");
  if (n < 0) throw std::invalid_argument("multinomial trial count must be nonnegative");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument("multinomial probabilities must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("multinomial probabilities must sum to 1 within 1e-9");
  }
  if (!labels.empty() && labels.size() != probs.size()) {
    throw std::invalid_argument("multinomial labels must match probabilities in length");
  }
  CountRecord rec;
  if (labels.empty()) {
    rec.labels.reserve(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) rec.labels.push_back(std::to_string(i));
  } else {
    rec.labels = std::move(labels);
  }
  rec.counts.assign(probs.size(), 0);
  rec.total = n;
  std::int64_t remaining = n;
  double mass = 1.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    if (remaining == 0) break;
    double cond = mass > 0.0 ? probs[i] / mass : 1.0;
    if (cond > 1.0) cond = 1.0;
    const std::int64_t k = sample_binomial(remaining, cond, stream);
    rec.counts[i] = k;
    remaining -= k;
    mass -= probs[i];
  }
  rec.counts.back() = remaining;
  return rec;
}

}  // namespace pwclock
