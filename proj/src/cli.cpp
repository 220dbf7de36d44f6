#include "polya/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "polya/count_tree.hpp"
#include "polya/density.hpp"
#include "polya/divergence.hpp"
#include "polya/entropy.hpp"
#include "polya/errors.hpp"
#include "polya/experiment.hpp"
#include "polya/partition.hpp"
#include "polya/prior.hpp"
#include "polya/tree.hpp"

namespace polya {

namespace {

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> point;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      point.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError("could not parse coordinate '" + item + "'");
    }
  }
  if (point.empty()) throw ConfigError("empty point");
  return point;
}

std::vector<std::vector<double>> read_sample_csv(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("could not open sample file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        row.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: '" + item + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (!rows.empty() && expected_dim > 0 &&
      rows.front().size() != static_cast<std::size_t>(expected_dim)) {
    throw ConfigError(path + ": expected " + std::to_string(expected_dim) + " columns, found " +
                      std::to_string(rows.front().size()));
  }
  return rows;
}

TruncationPolicy parse_policy(const std::string& text, double tail_tol) {
  if (text == "auto" || text == "max-impact") return TruncationPolicy::max_impact(tail_tol);
  if (text == "deterministic") return TruncationPolicy::deterministic(tail_tol);
  if (text.rfind("fixed:", 0) == 0) {
    try {
      return TruncationPolicy::fixed(std::stoi(text.substr(6)), tail_tol);
    } catch (const std::exception&) {
      throw ConfigError("fixed policy needs an integer level, e.g. fixed:12");
    }
  }
  throw ConfigError("unknown policy '" + text + "' (auto, max-impact, deterministic, fixed:<L>)");
}

std::filesystem::path resolve_output_dir(const std::string& flag_dir, const std::string& cfg_dir) {
  if (const char* env = std::getenv("POLYA_OUT_DIR"); env != nullptr && *env != '\0') return env;
  if (!flag_dir.empty()) return flag_dir;
  if (!cfg_dir.empty()) return cfg_dir;
  return ".";
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("could not open output file '" + path.string() + "'");
  out << content;
}

std::string bounds_string(const CellBox& box) {
  std::string s;
  for (std::size_t c = 0; c < box.lower.size(); ++c) {
    if (c) s += "x";
    s += "[" + format_short(box.lower[c]) + "," + format_short(box.upper[c]) + ")";
  }
  return s;
}

int materialization_depth(std::uint64_t n, const TruncationPolicy& policy) {
  int depth = deterministic_truncation(n);
  if (policy.kind == TruncationPolicy::Kind::fixed) depth = std::max(depth, policy.fixed_level);
  return std::min(depth, 48);
}

void run_partition(const std::string& point_text, int depth, std::ostream& out) {
  const std::vector<double> point = parse_point(point_text);
  const PartitionSpec spec{static_cast<int>(point.size())};
  const BinaryPath path = encode(point, depth, spec);
  out << "path " << path.to_string() << "\n";
  out << "bounds " << bounds_string(cell_bounds(path, spec)) << "\n";
}

void run_entropy_command(const std::string& input, int dim, const std::string& prior_text,
                         const std::string& policy_text, double tail_tol, bool bits,
                         const std::string& output, std::ostream& out) {
  const auto sample = read_sample_csv(input, dim);
  if (sample.empty()) throw DomainError("sample file '" + input + "' is empty");
  const PartitionSpec spec{static_cast<int>(sample.front().size())};
  const PriorSchedule prior = PriorSchedule::parse(prior_text);
  const TruncationPolicy policy = parse_policy(policy_text, tail_tol);

  const CountTree tree =
      build_count_tree(sample, spec, materialization_depth(sample.size(), policy));
  const EntropyEstimate est = entropy_estimate(tree, prior, policy);
  const ImpactLevel impact = max_impact_level(tree);

  const double unit = bits ? std::numbers::ln2 : 1.0;
  nlohmann::json j;
  j["value"] = est.value / unit;
  j["posterior_variance"] = est.posterior_variance / (unit * unit);
  j["posterior_sd"] = std::sqrt(est.posterior_variance) / unit;
  j["truncation_level"] = est.truncation_level;
  j["tail_correction"] = est.tail_correction / unit;
  j["tail_terms_used"] = est.tail_terms_used;
  j["impact_level"] = impact.level;
  j["impact_level_capped"] = impact.capped;
  j["truncation_capped"] = est.truncation_capped;
  j["schedule_warning"] = est.schedule_warning;
  j["units"] = bits ? "bits" : "nats";
  j["n"] = sample.size();
  j["dimension"] = spec.dimension;
  j["prior"] = prior.to_string();
  const std::string text = j.dump(2) + "\n";
  if (output.empty()) {
    out << text;
  } else {
    write_text_file(output, text);
    out << "wrote " << output << "\n";
  }
}

void run_fit(const std::string& input, int dim, const std::string& prior_text, int depth,
             const std::string& output, std::ostream& out) {
  const auto sample = read_sample_csv(input, dim);
  if (sample.empty()) throw DomainError("sample file '" + input + "' is empty");
  const PartitionSpec spec{static_cast<int>(sample.front().size())};
  const PriorSchedule prior = PriorSchedule::parse(prior_text);
  if (depth <= 0) depth = std::min(deterministic_truncation(sample.size()), 12);

  PosteriorTree post{prior, build_count_tree(sample, spec, depth)};
  const std::vector<double> masses = predictive_cell_masses(post, depth);

  std::string csv = "path";
  for (int c = 0; c < spec.dimension; ++c) {
    csv += ",lower" + std::to_string(c + 1) + ",upper" + std::to_string(c + 1);
  }
  csv += ",mass,density\n";
  const double scale = std::ldexp(1.0, depth);
  for (std::uint64_t v = 0; v < masses.size(); ++v) {
    const BinaryPath cell = BinaryPath::from_level_index(depth, v);
    const CellBox box = cell_bounds(cell, spec);
    csv += cell.to_string();
    for (int c = 0; c < spec.dimension; ++c) {
      csv += "," + format_full(box.lower[c]) + "," + format_full(box.upper[c]);
    }
    csv += "," + format_full(masses[v]) + "," + format_full(masses[v] * scale) + "\n";
  }
  if (output.empty()) {
    out << csv;
  } else {
    write_text_file(output, csv);
    out << "wrote " << output << "\n";
  }
}

void run_sample_command(const std::string& input, int dim, const std::string& prior_text,
                        int depth, std::uint64_t seed, int draws, const std::string& output,
                        std::ostream& out) {
  const PriorSchedule prior = PriorSchedule::parse(prior_text);
  std::vector<std::vector<double>> sample;
  PartitionSpec spec{dim > 0 ? dim : 1};
  if (!input.empty()) {
    sample = read_sample_csv(input, dim);
    if (sample.empty()) throw DomainError("sample file '" + input + "' is empty");
    spec.dimension = static_cast<int>(sample.front().size());
  }
  if (depth <= 0) {
    // deterministic truncation for posterior draws, capped by what a dyadic
    // grid can hold
    depth = sample.empty() ? 8 : std::min(deterministic_truncation(sample.size()), 12);
  }
  CountTree tree = sample.empty() ? CountTree(spec, depth)
                                  : build_count_tree(sample, spec, depth);
  PosteriorTree post{prior, std::move(tree)};

  std::string csv = "draw,path";
  for (int c = 0; c < spec.dimension; ++c) {
    csv += ",lower" + std::to_string(c + 1) + ",upper" + std::to_string(c + 1);
  }
  csv += ",mass,density\n";
  const double scale = std::ldexp(1.0, depth);
  for (int k = 0; k < draws; ++k) {
    const SampledDensity dens = sample_density(post, depth, mix_seed(seed, k));
    const std::vector<double> masses = dens.cell_masses();
    for (std::uint64_t v = 0; v < masses.size(); ++v) {
      const BinaryPath cell = BinaryPath::from_level_index(depth, v);
      const CellBox box = cell_bounds(cell, spec);
      csv += std::to_string(k) + "," + cell.to_string();
      for (int c = 0; c < spec.dimension; ++c) {
        csv += "," + format_full(box.lower[c]) + "," + format_full(box.upper[c]);
      }
      csv += "," + format_full(masses[v]) + "," + format_full(masses[v] * scale) + "\n";
    }
  }
  if (output.empty()) {
    out << csv;
  } else {
    write_text_file(output, csv);
    out << "wrote " << output << "\n";
  }
}

void run_simulate(const std::string& kind_text, const std::string& config_path, bool svg,
                  int threads, const std::string& out_dir_flag, std::ostream& out) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("could not open config file '" + config_path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + config_path + "' is not valid JSON: " + e.what());
  }
  if (!kind_text.empty()) j["kind"] = kind_text;
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  if (svg) cfg.write_svg = true;
  if (threads > 0) cfg.threads = threads;

  const std::vector<ReportRow> rows = run_experiment(cfg);
  const nlohmann::json summary = summarize(cfg, rows);

  const std::filesystem::path dir = resolve_output_dir(out_dir_flag, cfg.output_dir);
  std::filesystem::create_directories(dir);
  const std::string stem = to_string(cfg.kind) + "_" + cfg.density;
  const auto csv_path = dir / (stem + ".csv");
  const auto timing_path = dir / (stem + "_timings.csv");
  const auto summary_path = dir / (stem + "_summary.json");
  write_text_file(csv_path, rows_to_csv(rows));
  write_text_file(timing_path, rows_to_timing_csv(rows));
  write_text_file(summary_path, summary.dump(2) + "\n");
  out << "wrote " << csv_path.string() << " (" << rows.size() << " rows)\n";
  out << "wrote " << summary_path.string() << "\n";

  if (cfg.write_svg) {
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& [stat, by_n] : summary.at("medians").items()) {
      std::vector<double> ys;
      for (std::uint64_t n : cfg.sample_sizes) {
        ys.push_back(by_n.value(std::to_string(n), 0.0));
      }
      series.emplace_back(stat, std::move(ys));
    }
    const auto svg_path = dir / (stem + ".svg");
    write_text_file(svg_path, svg_line_chart(stem, cfg.sample_sizes, series));
    out << "wrote " << svg_path.string() << "\n";
  }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polya Tree density and differential entropy estimation"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "read a sample CSV, write the predictive density on a dyadic grid");
  std::string fit_input, fit_prior = "exp:c=1,beta=3", fit_output;
  int fit_dim = 0, fit_depth = 0;
  fit->add_option("--input", fit_input, "headerless CSV, one observation per row")->required();
  fit->add_option("--dim", fit_dim, "expected number of columns (default: inferred)");
  fit->add_option("--prior", fit_prior, "prior schedule, e.g. exp:c=1,beta=3 or poly:c=1,rho=3");
  fit->add_option("--depth", fit_depth, "dyadic grid depth (default: min(ceil(3 log2 n), 12))");
  fit->add_option("--output", fit_output, "output CSV path (default: stdout)");

  // entropy
  auto* ent = app.add_subcommand("entropy", "differential entropy estimate from a sample CSV");
  std::string ent_input, ent_prior = "exp:c=1,beta=3", ent_policy = "auto", ent_output;
  int ent_dim = 0;
  double ent_tail_tol = 1e-10;
  bool ent_bits = false;
  ent->add_option("--input", ent_input, "headerless CSV, one observation per row")->required();
  ent->add_option("--dim", ent_dim, "expected number of columns (default: inferred)");
  ent->add_option("--prior", ent_prior, "prior schedule");
  ent->add_option("--policy", ent_policy, "auto | max-impact | deterministic | fixed:<L>");
  ent->add_option("--tail-tol", ent_tail_tol, "tail correction tolerance");
  ent->add_flag("--bits", ent_bits, "report in bits instead of nats");
  ent->add_option("--output", ent_output, "output JSON path (default: stdout)");

  // sample
  auto* smp = app.add_subcommand("sample", "draw prior or posterior densities to CSV");
  std::string smp_input, smp_prior = "exp:c=1,beta=3", smp_output;
  int smp_dim = 0, smp_depth = 0, smp_draws = 1;
  std::uint64_t smp_seed = 0;
  smp->add_option("--input", smp_input, "optional sample CSV; posterior draws when given");
  smp->add_option("--dim", smp_dim, "dimension for prior draws (default 1)");
  smp->add_option("--prior", smp_prior, "prior schedule");
  smp->add_option("--depth", smp_depth,
                  "truncation depth of the draws (default: ceil(3 log2 n) capped at 12)");
  smp->add_option("--seed", smp_seed, "random seed");
  smp->add_option("--draws", smp_draws, "number of density draws");
  smp->add_option("--output", smp_output, "output CSV path (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a seeded experiment from a JSON config");
  std::string sim_kind, sim_config, sim_out_dir;
  bool sim_svg = false;
  int sim_threads = 0;
  sim->add_option("kind", sim_kind,
                  "entropy-convergence | tv-convergence | impact-level | spacing-law | beta-moments");
  sim->add_option("--config", sim_config, "experiment config JSON")->required();
  sim->add_flag("--svg", sim_svg, "also write an SVG chart of the medians");
  sim->add_option("--threads", sim_threads, "worker threads (default: from config)");
  sim->add_option("--out-dir", sim_out_dir, "output directory (POLYA_OUT_DIR overrides)");

  // partition
  auto* part = app.add_subcommand("partition", "encode a point and print its cell");
  std::string part_point;
  int part_depth = 1;
  part->add_option("--point", part_point, "comma-separated coordinates in [0,1)")->required();
  part->add_option("--depth", part_depth, "path length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream buf;
    const int code = app.exit(e, out, buf);
    if (!buf.str().empty()) err << buf.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) {
      run_fit(fit_input, fit_dim, fit_prior, fit_depth, fit_output, out);
    } else if (ent->parsed()) {
      run_entropy_command(ent_input, ent_dim, ent_prior, ent_policy, ent_tail_tol, ent_bits,
                          ent_output, out);
    } else if (smp->parsed()) {
      run_sample_command(smp_input, smp_dim, smp_prior, smp_depth, smp_seed, smp_draws,
                         smp_output, out);
    } else if (sim->parsed()) {
      run_simulate(sim_kind, sim_config, sim_svg, sim_threads, sim_out_dir, out);
    } else if (part->parsed()) {
      run_partition(part_point, part_depth, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace polya
