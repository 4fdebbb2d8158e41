#include "pwclock/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pwclock {

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kObserver: return "observer";
    case RunMode::kSuperObserver: return "superobserver";
    case RunMode::kBoth: return "both";
  }
  throw std::logic_error("unhandled run mode");
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "observer") return RunMode::kObserver;
  if (name == "superobserver") return RunMode::kSuperObserver;
  if (name == "both") return RunMode::kBoth;
  throw std::invalid_argument("mode must be one of observer, superobserver, both; got '" +
                              name + "'");
}

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void type_error(const std::string& key, const char* expected,
                             const std::string& value) {
  throw std::invalid_argument("config key " + key + ": expected " + expected + ", got '" +
                              value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  if (value.empty()) type_error(key, "number", value);
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || errno == ERANGE) type_error(key, "number", value);
  return x;
}

long long parse_int(const std::string& key, const std::string& value) {
  if (value.empty()) type_error(key, "integer", value);
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || errno == ERANGE) type_error(key, "integer", value);
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') type_error(key, "unsigned integer", value);
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size() || errno == ERANGE) {
    type_error(key, "unsigned integer", value);
  }
  return x;
}

std::vector<double> parse_array(const std::string& key, const std::string& value) {
  if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
    type_error(key, "bracketed number list", value);
  }
  std::vector<double> out;
  const std::string body = trim(value.substr(1, value.size() - 2));
  if (body.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = body.find(',', start);
    const std::string item = trim(body.substr(start, comma - start));
    if (item.empty()) type_error(key, "bracketed number list", value);
    out.push_back(parse_double(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void range_error(const std::string& key, const char* invariant) {
  throw std::invalid_argument("config key " + key + ": " + invariant);
}

void validate_spec(const ExperimentSpec& s) {
  if (s.tau_count < 0) range_error("observer.tau_count", "must be nonnegative");
  if (!std::isfinite(s.tau_span) || s.tau_span < 0.0) {
    range_error("observer.tau_span", "must be a nonnegative number of clock periods");
  }
  if (s.delta_grid < 2) range_error("observer.delta_grid", "must be at least 2 grid points");
  if (s.shots_per_delta < 0) {
    range_error("observer.shots_per_delta", "must be nonnegative (0 selects exact mode)");
  }
  if (!std::isfinite(s.omega) || s.omega <= 0.0) {
    range_error("observer.omega", "must be a positive frequency");
  }
  for (double t : s.external_times) {
    if (!std::isfinite(t)) range_error("tomography.external_times", "entries must be finite");
  }
  if (s.counts_per_projection < 0) {
    range_error("tomography.counts_per_projection", "must be nonnegative (0 selects exact mode)");
  }
  if (!std::isfinite(s.mle_tolerance) || s.mle_tolerance <= 0.0) {
    range_error("tomography.mle_tolerance", "must be positive");
  }
  if (s.mle_max_iters < 1) range_error("tomography.mle_max_iters", "must be at least 1");
  if (!std::isfinite(s.erasure_visibility) || s.erasure_visibility < 0.0 ||
      s.erasure_visibility > 1.0) {
    range_error("tomography.erasure_visibility", "must lie in [0, 1]");
  }
  if (s.output_dir.empty()) range_error("output_dir", "must be a nonempty path");
  if (s.output_format != "csv" && s.output_format != "json") {
    range_error("output_format", "must be csv or json");
  }
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing key");
    }

    if (key == "mode") {
      spec.mode = run_mode_from_string(value);
    } else if (key == "seed") {
      spec.seed = parse_uint(key, value);
    } else if (key == "observer.tau_count") {
      spec.tau_count = static_cast<int>(parse_int(key, value));
    } else if (key == "observer.tau_span") {
      spec.tau_span = parse_double(key, value);
    } else if (key == "observer.delta_grid") {
      spec.delta_grid = static_cast<int>(parse_int(key, value));
    } else if (key == "observer.shots_per_delta") {
      spec.shots_per_delta = parse_int(key, value);
    } else if (key == "observer.omega") {
      spec.omega = parse_double(key, value);
    } else if (key == "tomography.external_times") {
      spec.external_times = parse_array(key, value);
    } else if (key == "tomography.counts_per_projection") {
      spec.counts_per_projection = parse_int(key, value);
    } else if (key == "tomography.mle_tolerance") {
      spec.mle_tolerance = parse_double(key, value);
    } else if (key == "tomography.mle_max_iters") {
      spec.mle_max_iters = static_cast<int>(parse_int(key, value));
    } else if (key == "tomography.erasure_visibility") {
      spec.erasure_visibility = parse_double(key, value);
    } else if (key == "output_dir") {
      if (value.empty()) range_error(key, "must be a nonempty path");
      spec.output_dir = value;
    } else if (key == "output_format") {
      spec.output_format = value;
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  validate_spec(spec);
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_spec(buffer.str());
}

namespace {

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string serialize_spec(const ExperimentSpec& spec) {
  std::string out;
  out += "mode = " + to_string(spec.mode) + "\n";
  out += "seed = " + std::to_string(spec.seed) + "\n";
  out += "observer.tau_count = " + std::to_string(spec.tau_count) + "\n";
  out += "observer.tau_span = " + format_full(spec.tau_span) + "\n";
  out += "observer.delta_grid = " + std::to_string(spec.delta_grid) + "\n";
  out += "observer.shots_per_delta = " + std::to_string(spec.shots_per_delta) + "\n";
  out += "observer.omega = " + format_full(spec.omega) + "\n";
  out += "tomography.external_times = [";
  for (std::size_t i = 0; i < spec.external_times.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_full(spec.external_times[i]);
  }
  out += "]\n";
  out += "tomography.counts_per_projection = " + std::to_string(spec.counts_per_projection) + "\n";
  out += "tomography.mle_tolerance = " + format_full(spec.mle_tolerance) + "\n";
  out += "tomography.mle_max_iters = " + std::to_string(spec.mle_max_iters) + "\n";
  out += "tomography.erasure_visibility = " + format_full(spec.erasure_visibility) + "\n";
  out += "output_dir = " + spec.output_dir + "\n";
  out += "output_format = " + spec.output_format + "\n";
  return out;
}

ObserverConfig observer_config(const ExperimentSpec& spec) {
  ObserverConfig cfg;
  cfg.delta_grid_size = spec.delta_grid;
  cfg.shots_per_delta = spec.shots_per_delta;
  cfg.omega = spec.omega;
  cfg.rng_seed = spec.seed;
  cfg.tau_list.reserve(static_cast<std::size_t>(spec.tau_count));
  const double period = 2.0 * std::numbers::pi / spec.omega;
  for (int i = 0; i < spec.tau_count; ++i) {
    cfg.tau_list.push_back(static_cast<double>(i) * spec.tau_span * period /
                           static_cast<double>(spec.tau_count));
  }
  return cfg;
}

TomographyConfig tomography_config(const ExperimentSpec& spec) {
  TomographyConfig cfg;
  cfg.external_times = spec.external_times;
  cfg.counts_per_projection = spec.counts_per_projection;
  cfg.rng_seed = spec.seed;
  cfg.mle_tolerance = spec.mle_tolerance;
  cfg.mle_max_iters = spec.mle_max_iters;
  cfg.erasure_visibility = spec.erasure_visibility;
  return cfg;
}

}  // namespace pwclock
