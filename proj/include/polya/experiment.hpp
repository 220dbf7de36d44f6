#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polya/entropy.hpp"
#include "polya/prior.hpp"

#include "json.hpp"

namespace polya {

enum class ExperimentKind {
  entropy_convergence,
  tv_convergence,
  impact_level,
  spacing_law,
  beta_moments,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view text);

/// A seeded experiment over a grid of sample sizes. Serialized as JSON with
/// an explicit schema version; see README for the field list.
struct ExperimentConfig {
  int schema_version = 1;
  ExperimentKind kind = ExperimentKind::entropy_convergence;
  std::string density = "uniform";
  PriorSchedule prior = PriorSchedule::exponential(1.0, 3.0);
  std::vector<std::uint64_t> sample_sizes;
  std::vector<std::uint64_t> seeds;
  TruncationPolicy policy;
  int grid_depth = 10;  // dyadic resolution for TV / expected-KL experiments
  int threads = 1;
  std::string output_dir;
  bool write_svg = false;

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ReportRow {
  std::string kind;
  std::string density;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string statistic;
  double value = 0.0;
  double runtime_ms = 0.0;
};

std::vector<ReportRow> run_entropy_convergence(const ExperimentConfig& cfg);
std::vector<ReportRow> run_tv_convergence(const ExperimentConfig& cfg);
std::vector<ReportRow> run_impact_level(const ExperimentConfig& cfg);
std::vector<ReportRow> run_spacing_law(const ExperimentConfig& cfg);
std::vector<ReportRow> run_beta_moments(const ExperimentConfig& cfg);

/// Dispatch on cfg.kind.
std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg);

/// Deterministic report CSV (no timing column): identical config and seeds
/// give byte-identical text. Rows are sorted by (kind, density, n, seed,
/// statistic).
std::string rows_to_csv(std::vector<ReportRow> rows);

/// Same rows with the recorded per-row runtime appended; timings vary
/// between runs, so this lives in a separate file.
std::string rows_to_timing_csv(std::vector<ReportRow> rows);

/// Summary JSON: medians of every statistic per sample size, plus the
/// configuration echo.
nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<ReportRow>& rows);

/// Minimal line chart (statistic medians vs n, log-scaled x) with no
/// external plotting dependency.
std::string svg_line_chart(const std::string& title,
                           const std::vector<std::uint64_t>& sample_sizes,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series);

double median(std::vector<double> values);

/// Kolmogorov-Smirnov distance between a sample and the Exp(rate) law.
double ks_distance_exponential(std::vector<double> values, double rate);

/// Draws an i.i.d. sample from a named reference density; seeded per
/// (seed, n, tag) so different grid points get independent streams.
std::vector<std::vector<double>> draw_sample(const std::string& density_name, std::uint64_t n,
                                             std::uint64_t seed, std::uint64_t tag);

}  // namespace polya
