#include "polya/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

#include "polya/count_tree.hpp"
#include "polya/density.hpp"
#include "polya/divergence.hpp"
#include "polya/errors.hpp"
#include "polya/rng.hpp"
#include "polya/specfun.hpp"
#include "polya/tree.hpp"

namespace polya {

namespace {

// stream tags keep the runners' random draws independent per experiment kind
constexpr std::uint64_t kTagEntropy = 0x01;
constexpr std::uint64_t kTagTv = 0x02;
constexpr std::uint64_t kTagImpact = 0x03;
constexpr std::uint64_t kTagSpacing = 0x04;
constexpr std::uint64_t kTagMoments = 0x05;

constexpr int kImpactDepthCap = 48;

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

struct Task {
  std::uint64_t n;
  std::uint64_t seed;
};

std::vector<Task> task_grid(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  tasks.reserve(cfg.sample_sizes.size() * cfg.seeds.size());
  for (std::uint64_t n : cfg.sample_sizes) {
    for (std::uint64_t seed : cfg.seeds) tasks.push_back({n, seed});
  }
  return tasks;
}

// Runs `fn` over the task grid, possibly on several threads; results are
// concatenated in task order, so the output does not depend on scheduling.
template <class Fn>
std::vector<ReportRow> run_tasks(const ExperimentConfig& cfg, Fn fn) {
  const std::vector<Task> tasks = task_grid(cfg);
  std::vector<std::vector<ReportRow>> results(tasks.size());
  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = fn(tasks[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          results[i] = fn(tasks[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  std::vector<ReportRow> rows;
  for (auto& part : results) {
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

double min_spacing(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < xs.size(); ++i) d = std::min(d, xs[i] - xs[i - 1]);
  return d;
}

ReportRow make_row(const ExperimentConfig& cfg, std::uint64_t n, std::uint64_t seed,
                   std::string statistic, double value, double runtime_ms) {
  return ReportRow{to_string(cfg.kind), cfg.density, n, seed, std::move(statistic), value,
                   runtime_ms};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::entropy_convergence: return "entropy-convergence";
    case ExperimentKind::tv_convergence: return "tv-convergence";
    case ExperimentKind::impact_level: return "impact-level";
    case ExperimentKind::spacing_law: return "spacing-law";
    case ExperimentKind::beta_moments: return "beta-moments";
  }
  throw ConfigError("unhandled experiment kind");
}

ExperimentKind experiment_kind_from_string(std::string_view text) {
  if (text == "entropy-convergence") return ExperimentKind::entropy_convergence;
  if (text == "tv-convergence") return ExperimentKind::tv_convergence;
  if (text == "impact-level") return ExperimentKind::impact_level;
  if (text == "spacing-law") return ExperimentKind::spacing_law;
  if (text == "beta-moments") return ExperimentKind::beta_moments;
  throw ConfigError("unknown experiment kind '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (schema_version != 1) throw ConfigError("unsupported config schema version");
  density_by_name(density);  // throws for unknown names
  if (sample_sizes.empty()) throw ConfigError("config needs at least one sample size");
  for (std::size_t i = 1; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] <= sample_sizes[i - 1]) {
      throw ConfigError("sample sizes must be strictly increasing");
    }
  }
  if (seeds.empty()) throw ConfigError("config needs at least one seed");
  if (grid_depth < 1 || grid_depth > 20) throw ConfigError("grid depth must be in [1, 20]");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (kind == ExperimentKind::impact_level || kind == ExperimentKind::spacing_law) {
    if (density_by_name(density).dimension != 1) {
      throw ConfigError("spacing experiments are one-dimensional");
    }
    if (sample_sizes.front() < 2) throw ConfigError("spacing experiments need n >= 2");
  }
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.schema_version = j.value("schema_version", 1);
  cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  cfg.density = j.value("density", std::string("uniform"));
  cfg.prior = PriorSchedule::parse(j.value("prior", std::string("exp:c=1,beta=3")));
  cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::uint64_t>>();
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    const std::string kind = p.value("kind", std::string("max-impact"));
    const double tol = p.value("tail_tolerance", 1e-10);
    if (kind == "max-impact" || kind == "auto") {
      cfg.policy = TruncationPolicy::max_impact(tol);
    } else if (kind == "deterministic") {
      cfg.policy = TruncationPolicy::deterministic(tol);
    } else if (kind == "fixed") {
      cfg.policy = TruncationPolicy::fixed(p.at("level").get<int>(), tol);
    } else {
      throw ConfigError("unknown truncation policy '" + kind + "'");
    }
  }
  cfg.grid_depth = j.value("grid_depth", 10);
  cfg.threads = j.value("threads", 1);
  cfg.output_dir = j.value("output_dir", std::string());
  cfg.write_svg = j.value("write_svg", false);
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["kind"] = to_string(kind);
  j["density"] = density;
  j["prior"] = prior.to_string();
  j["sample_sizes"] = sample_sizes;
  j["seeds"] = seeds;
  nlohmann::json p;
  switch (policy.kind) {
    case TruncationPolicy::Kind::max_impact: p["kind"] = "max-impact"; break;
    case TruncationPolicy::Kind::deterministic: p["kind"] = "deterministic"; break;
    case TruncationPolicy::Kind::fixed:
      p["kind"] = "fixed";
      p["level"] = policy.fixed_level;
      break;
  }
  p["tail_tolerance"] = policy.tail_tolerance;
  j["policy"] = p;
  j["grid_depth"] = grid_depth;
  j["threads"] = threads;
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  j["write_svg"] = write_svg;
  return j;
}

std::vector<std::vector<double>> draw_sample(const std::string& density_name, std::uint64_t n,
                                             std::uint64_t seed, std::uint64_t tag) {
  const DensityOracle& f0 = density_by_name(density_name);
  Rng rng(mix_seed(seed, n, tag));
  std::vector<std::vector<double>> sample;
  sample.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) sample.push_back(f0.sample(rng));
  return sample;
}

std::vector<ReportRow> run_entropy_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const DensityOracle& f0 = density_by_name(cfg.density);
  if (!f0.entropy.has_value()) {
    throw ConfigError("entropy-convergence needs a density with analytic entropy");
  }
  const double h0 = *f0.entropy;
  const PartitionSpec spec{f0.dimension};

  return run_tasks(cfg, [&](const Task& task) {
    const auto start = std::chrono::steady_clock::now();
    const auto sample = draw_sample(cfg.density, task.n, task.seed, kTagEntropy);
    const int depth = deterministic_truncation(task.n);
    const CountTree tree = build_count_tree(sample, spec, depth);
    const EntropyEstimate est = entropy_estimate(tree, cfg.prior, cfg.policy);
    const ImpactLevel impact = max_impact_level(tree);
    const double ms = elapsed_ms(start);

    std::vector<ReportRow> rows;
    rows.push_back(make_row(cfg, task.n, task.seed, "entropy_estimate", est.value, ms));
    rows.push_back(
        make_row(cfg, task.n, task.seed, "posterior_variance", est.posterior_variance, ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "impact_level",
                            static_cast<double>(impact.level), ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "truncation_level",
                            static_cast<double>(est.truncation_level), ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "truncation_capped",
                            est.truncation_capped ? 1.0 : 0.0, ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "abs_error", std::abs(est.value - h0), ms));
    return rows;
  });
}

std::vector<ReportRow> run_tv_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  const DensityOracle& f0 = density_by_name(cfg.density);
  const PartitionSpec spec{f0.dimension};
  const double h0 = f0.entropy.value_or(0.0);
  const CellProbabilityTable table = CellProbabilityTable::from_density(f0, spec, cfg.grid_depth);

  return run_tasks(cfg, [&](const Task& task) {
    const auto start = std::chrono::steady_clock::now();
    const auto sample = draw_sample(cfg.density, task.n, task.seed, kTagTv);
    PosteriorTree post{cfg.prior, build_count_tree(sample, spec, cfg.grid_depth)};
    const double tv = total_variation(post, table, cfg.grid_depth);
    const double kl = expected_posterior_kl(table, post, cfg.grid_depth, h0);
    const double ms = elapsed_ms(start);

    std::vector<ReportRow> rows;
    rows.push_back(make_row(cfg, task.n, task.seed, "tv", tv, ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "expected_kl", kl, ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "pinsker_margin", 0.5 * kl - tv * tv, ms));
    return rows;
  });
}

std::vector<ReportRow> run_impact_level(const ExperimentConfig& cfg) {
  cfg.validate();
  const PartitionSpec spec{1};

  return run_tasks(cfg, [&](const Task& task) {
    const auto start = std::chrono::steady_clock::now();
    const auto sample = draw_sample(cfg.density, task.n, task.seed, kTagImpact);
    std::vector<double> xs(task.n);
    for (std::uint64_t i = 0; i < task.n; ++i) xs[i] = sample[i][0];
    const double d = min_spacing(xs);

    int spacing_bound = kImpactDepthCap + 1;
    bool tie = !(d > 0.0);
    if (!tie) {
      spacing_bound = static_cast<int>(std::ceil(-std::log2(d))) + 1;
    }
    const int depth = std::min(std::max(spacing_bound, 2), kImpactDepthCap);
    const CountTree tree = build_count_tree(sample, spec, depth);
    const ImpactLevel impact = max_impact_level(tree);
    const double pigeonhole = static_cast<double>(std::bit_width(task.n));  // floor(log2 n) + 1
    const bool within =
        static_cast<double>(impact.level) <= 2.0 * std::log2(static_cast<double>(task.n)) + 10.0;
    const double ms = elapsed_ms(start);

    std::vector<ReportRow> rows;
    rows.push_back(make_row(cfg, task.n, task.seed, "impact_level",
                            static_cast<double>(impact.level), ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "pigeonhole_bound", pigeonhole, ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "spacing_bound",
                            static_cast<double>(spacing_bound), ms));
    rows.push_back(make_row(cfg, task.n, task.seed, "within_safe_level", within ? 1.0 : 0.0, ms));
    rows.push_back(
        make_row(cfg, task.n, task.seed, "capped", (impact.capped || tie) ? 1.0 : 0.0, ms));
    return rows;
  });
}

std::vector<ReportRow> run_spacing_law(const ExperimentConfig& cfg) {
  cfg.validate();
  const DensityOracle& f0 = density_by_name(cfg.density);
  if (!f0.l2_norm_sq.has_value()) {
    throw ConfigError("spacing-law needs a density with known squared L2 norm");
  }
  const double l2 = *f0.l2_norm_sq;

  std::vector<ReportRow> rows = run_tasks(cfg, [&](const Task& task) {
    const auto start = std::chrono::steady_clock::now();
    const auto sample = draw_sample(cfg.density, task.n, task.seed, kTagSpacing);
    std::vector<double> xs(task.n);
    for (std::uint64_t i = 0; i < task.n; ++i) xs[i] = sample[i][0];
    const double d = min_spacing(xs);
    const double value = static_cast<double>(task.n) * static_cast<double>(task.n) * d;
    const double ms = elapsed_ms(start);
    return std::vector<ReportRow>{make_row(cfg, task.n, task.seed, "n2_min_spacing", value, ms)};
  });

  // per-n KS statistics across seeds; the half-rate law is the report's
  // reference, the full-rate one is a diagnostic
  for (std::uint64_t n : cfg.sample_sizes) {
    std::vector<double> values;
    for (const auto& row : rows) {
      if (row.n == n && row.statistic == "n2_min_spacing") values.push_back(row.value);
    }
    rows.push_back(make_row(cfg, n, 0, "ks_exp_half_l2",
                            ks_distance_exponential(values, 0.5 * l2), 0.0));
    rows.push_back(
        make_row(cfg, n, 0, "ks_exp_l2", ks_distance_exponential(values, l2), 0.0));
  }
  return rows;
}

std::vector<ReportRow> run_beta_moments(const ExperimentConfig& cfg) {
  cfg.validate();
  const double a_values[] = {1.0, 2.0, 5.0};

  return run_tasks(cfg, [&](const Task& task) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ReportRow> rows;
    for (double a : a_values) {
      Rng rng(mix_seed(task.seed, task.n, mix_seed(kTagMoments, static_cast<std::uint64_t>(a))));
      // one pass accumulates the 2nd, 4th and 6th central moments
      double sum[3] = {0.0, 0.0, 0.0};
      double sum_sq[3] = {0.0, 0.0, 0.0};
      for (std::uint64_t i = 0; i < task.n; ++i) {
        const double y = rng.beta(a, a);
        const double c2 = (y - 0.5) * (y - 0.5);
        double power = 1.0;
        for (int j = 0; j < 3; ++j) {
          power *= c2;
          sum[j] += power;
          sum_sq[j] += power * power;
        }
      }
      const double nn = static_cast<double>(task.n);
      for (int j = 1; j <= 3; ++j) {
        const double mc = sum[j - 1] / nn;
        const double var = std::max(sum_sq[j - 1] / nn - mc * mc, 0.0);
        const double se = std::sqrt(var / nn);
        // (2j)! (a)_j / (2^{2j} j! (2a)_{2j})
        const double exact = std::exp(
            specfun::log_gamma(2.0 * j + 1.0) + specfun::log_gamma(a + j) -
            specfun::log_gamma(a) - 2.0 * j * std::numbers::ln2 -
            specfun::log_gamma(j + 1.0) - specfun::log_gamma(2.0 * a + 2.0 * j) +
            specfun::log_gamma(2.0 * a));
        const double bound =
            2.0 * std::pow(static_cast<double>(j), j + 1.0) * std::exp(-static_cast<double>(j)) /
            std::pow(2.0 * a + 1.0, static_cast<double>(j));
        const double ms = elapsed_ms(start);
        const std::string suffix =
            "_a" + std::to_string(static_cast<int>(a)) + "_j" + std::to_string(j);
        rows.push_back(make_row(cfg, task.n, task.seed, "mc_moment" + suffix, mc, ms));
        rows.push_back(make_row(cfg, task.n, task.seed, "exact_moment" + suffix, exact, ms));
        rows.push_back(make_row(cfg, task.n, task.seed, "z_score" + suffix,
                                se > 0.0 ? (mc - exact) / se : 0.0, ms));
        rows.push_back(make_row(cfg, task.n, task.seed, "moment_bound_margin" + suffix,
                                bound - std::max(mc, exact), ms));
      }
    }
    return rows;
  });
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::entropy_convergence: return run_entropy_convergence(cfg);
    case ExperimentKind::tv_convergence: return run_tv_convergence(cfg);
    case ExperimentKind::impact_level: return run_impact_level(cfg);
    case ExperimentKind::spacing_law: return run_spacing_law(cfg);
    case ExperimentKind::beta_moments: return run_beta_moments(cfg);
  }
  throw ConfigError("unhandled experiment kind");
}

namespace {

void sort_rows(std::vector<ReportRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.kind, a.density, a.n, a.seed, a.statistic) <
           std::tie(b.kind, b.density, b.n, b.seed, b.statistic);
  });
}

}  // namespace

std::string rows_to_csv(std::vector<ReportRow> rows) {
  sort_rows(rows);
  std::string out = "kind,density,n,seed,statistic,value\n";
  for (const auto& r : rows) {
    out += r.kind;
    out += ',';
    out += r.density;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += r.statistic;
    out += ',';
    out += format_value(r.value);
    out += '\n';
  }
  return out;
}

std::string rows_to_timing_csv(std::vector<ReportRow> rows) {
  sort_rows(rows);
  std::string out = "kind,density,n,seed,statistic,value,runtime_ms\n";
  for (const auto& r : rows) {
    out += r.kind;
    out += ',';
    out += r.density;
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += r.statistic;
    out += ',';
    out += format_value(r.value);
    out += ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.runtime_ms);
    out += buf;
    out += '\n';
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  if (values.size() % 2 == 1) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

double ks_distance_exponential(std::vector<double> values, double rate) {
  if (values.empty()) throw DomainError("KS distance of an empty sample");
  if (!(rate > 0.0)) throw DomainError("exponential rate must be > 0");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * values[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
  }
  return ks;
}

nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<ReportRow>& rows) {
  std::map<std::string, std::map<std::uint64_t, std::vector<double>>> grouped;
  double total_ms = 0.0;
  for (const auto& r : rows) {
    grouped[r.statistic][r.n].push_back(r.value);
    total_ms += r.runtime_ms;
  }
  nlohmann::json stats;
  for (const auto& [stat, by_n] : grouped) {
    nlohmann::json entry;
    for (const auto& [n, values] : by_n) {
      entry[std::to_string(n)] = median(values);
    }
    stats[stat] = entry;
  }
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = cfg.to_json();
  j["medians"] = stats;
  j["rows"] = rows.size();
  j["total_runtime_ms"] = total_ms;
  return j;
}

std::string svg_line_chart(const std::string& title,
                           const std::vector<std::uint64_t>& sample_sizes,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  constexpr double width = 640.0;
  constexpr double height = 420.0;
  constexpr double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  double y_min = 0.0, y_max = 1e-12;
  for (const auto& [name, ys] : series) {
    for (double y : ys) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const double y_span = y_max - y_min;
  const double x_min = std::log10(static_cast<double>(sample_sizes.front()));
  const double x_max = std::log10(static_cast<double>(sample_sizes.back()));
  const double x_span = std::max(x_max - x_min, 1e-9);

  auto x_at = [&](std::uint64_t n) {
    return ml + (std::log10(static_cast<double>(n)) - x_min) / x_span * plot_w;
  };
  auto y_at = [&](double v) { return mt + (y_max - v) / y_span * plot_h; };

  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w
      << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + plot_h
      << "\" stroke=\"black\"/>\n";
  for (std::uint64_t n : sample_sizes) {
    svg << "<text x=\"" << x_at(n) << "\" y=\"" << mt + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << n << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = y_min + y_span * k / 4.0;
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << y_at(v) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_value(v).substr(0, 9)
        << "</text>\n";
  }
  int color = 0;
  for (const auto& [name, ys] : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << palette[color % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sample_sizes.size() && i < ys.size(); ++i) {
      svg << x_at(sample_sizes[i]) << "," << y_at(ys[i]) << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << ml + plot_w - 4 << "\" y=\"" << mt + 16 + 14 * color
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << palette[color % 6] << "\">" << name
        << "</text>\n";
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace polya
