#include "pwclock/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace pwclock {

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  file << content;
  file.flush();
  if (!file) throw std::runtime_error("write failed: " + path);
}

nlohmann::ordered_json resolved_config_json(const ExperimentSpec& spec) {
  nlohmann::ordered_json cfg;
  cfg["mode"] = to_string(spec.mode);
  cfg["seed"] = spec.seed;
  cfg["observer.tau_count"] = spec.tau_count;
  cfg["observer.tau_span"] = spec.tau_span;
  cfg["observer.delta_grid"] = spec.delta_grid;
  cfg["observer.shots_per_delta"] = spec.shots_per_delta;
  cfg["observer.omega"] = spec.omega;
  cfg["tomography.external_times"] = spec.external_times;
  cfg["tomography.counts_per_projection"] = spec.counts_per_projection;
  cfg["tomography.mle_tolerance"] = spec.mle_tolerance;
  cfg["tomography.mle_max_iters"] = spec.mle_max_iters;
  cfg["tomography.erasure_visibility"] = spec.erasure_visibility;
  cfg["output_dir"] = spec.output_dir;
  cfg["output_format"] = spec.output_format;
  return cfg;
}

}  // namespace

TheoryCurve theory_curve(const ObserverConfig& cfg, double t_max, int points) {
  validate(cfg);
  if (points < 2) throw std::invalid_argument("theory curve needs at least 2 points");
  if (!std::isfinite(t_max) || t_max <= 0.0) {
    throw std::invalid_argument("theory curve span must be positive");
  }
  TheoryCurve curve;
  curve.time.reserve(static_cast<std::size_t>(points));
  curve.p.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    const auto [p1, p2] = conditional_probabilities_exact(cfg, t);
    (void)p2;
    curve.time.push_back(t);
    curve.p.push_back(p1);
  }
  return curve;
}

std::string theory_csv(const TheoryCurve& curve) {
  std::string out = "emergent_time,p\n";
  for (std::size_t i = 0; i < curve.time.size(); ++i) {
    out += format_number(curve.time[i]);
    out += ',';
    out += format_number(curve.p[i]);
    out += '\n';
  }
  return out;
}

std::string observer_json(const ObserverDataset& ds) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : ds.rows) {
    nlohmann::ordered_json r;
    r["clock_label"] = row.clock_label;
    r["tau"] = row.tau;
    r["emergent_time"] = row.emergent_time;
    r["p"] = row.p;
    r["stderr"] = row.std_error;
    rows.push_back(std::move(r));
  }
  return rows.dump(2) + "\n";
}

std::string superobserver_json(const SuperObserverReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["external_time_over_omega"] = row.external_time;
    r["fidelity"] = row.fidelity;
    rows.push_back(std::move(r));
  }
  return rows.dump(2) + "\n";
}

RunResult run(const ExperimentSpec& spec) {
  const ObserverConfig ocfg = observer_config(spec);
  const TomographyConfig tcfg = tomography_config(spec);
  validate(ocfg);
  validate(tcfg);
  if (spec.output_format != "csv" && spec.output_format != "json") {
    throw std::invalid_argument("output_format must be csv or json");
  }

  namespace fs = std::filesystem;
  const fs::path out_dir(spec.output_dir);
  fs::create_directories(out_dir);

  RunResult result;
  const bool run_obs = spec.mode != RunMode::kSuperObserver;
  const bool run_tomo = spec.mode != RunMode::kObserver;

  if (run_obs) {
    result.observer = run_observer(ocfg);
    const std::string name = spec.output_format == "csv" ? "observer.csv" : "observer.json";
    const std::string path = (out_dir / name).string();
    write_text_file(path, spec.output_format == "csv" ? observer_csv(result.observer)
                                                      : observer_json(result.observer));
    result.files_written.push_back(path);
  }

  if (run_tomo) {
    result.tomography = run_superobserver(tcfg);
    const std::string name = spec.output_format == "csv" ? "tomography.csv" : "tomography.json";
    const std::string path = (out_dir / name).string();
    write_text_file(path, spec.output_format == "csv"
                              ? superobserver_csv(result.tomography)
                              : superobserver_json(result.tomography));
    result.files_written.push_back(path);

    const std::string table_path = (out_dir / "tomography_table.txt").string();
    write_text_file(table_path, superobserver_table(result.tomography));
    result.files_written.push_back(table_path);

    for (const auto& row : result.tomography.rows) {
      if (!row.mle_converged) {
        result.warnings.push_back("tomography at external time " +
                                  format_number(row.external_time) +
                                  ": reconstruction hit the iteration cap before converging");
      }
    }
  }

  double t_max = 2.0 * std::numbers::pi / ocfg.omega;
  for (const auto& row : result.observer.rows) t_max = std::max(t_max, row.emergent_time);
  const TheoryCurve curve = theory_curve(ocfg, t_max, 512);
  const std::string theory_path = (out_dir / "theory.csv").string();
  write_text_file(theory_path, theory_csv(curve));
  result.files_written.push_back(theory_path);

  nlohmann::ordered_json manifest;
  manifest["seed"] = spec.seed;
  manifest["resolved_config"] = resolved_config_json(spec);
  manifest["artifact_version"] = kArtifactVersion;
  manifest["warnings"] = result.warnings;
  const std::string manifest_path = (out_dir / "manifest.json").string();
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  result.files_written.push_back(manifest_path);

  return result;
}

}  // namespace pwclock
