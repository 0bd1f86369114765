#include "raresim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "raresim/errors.hpp"
#include "raresim/special.hpp"

namespace raresim {

namespace {

constexpr std::uint64_t kCalibrationSeed = 887101;
constexpr long kOracleSamples = 10'000'000;

double ackley_target(int n) {
  // Published probabilities the thresholds are calibrated against.
  switch (n) {
    case 30:
      return 1.64e-3;
    case 100:
      return 1.18e-3;
    case 200:
      return 1.72e-3;
    default:
      return 1.64e-3;
  }
}

double calibrated_ackley_threshold(int n, double target) {
  static std::map<std::pair<int, double>, double> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(n, target);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  RngStream rng(kCalibrationSeed + static_cast<std::uint64_t>(n));
  const double c = calibrate_ackley_threshold(n, target, rng, kOracleSamples);
  cache.emplace(key, c);
  return c;
}

double portfolio_default_b(int n) { return n == 30 ? 0.45 : 0.25; }

double parabola_kappa(const std::string& name) {
  return name == "parabola-narrow" ? 25.0 : 3.0;
}

/// P(x1 >= 3 + kappa x2^2) = E[Phi(-3 - kappa Y^2)], Simpson over Y.
double parabola_reference(double kappa) {
  const int intervals = 40'000;
  const double a = -10.0, b = 10.0;
  const double h = (b - a) / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double y = a + i * h;
    const double f =
        standard_normal_pdf(y) * standard_normal_cdf(-3.0 - kappa * y * y);
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * f;
  }
  return sum * h / 3.0;
}

bool is_ce_type(const std::string& algorithm) {
  return algorithm == "ce" || algorithm == "ced" || algorithm == "ce-mstar" ||
         algorithm.rfind("figure1-family:fixed", 0) == 0;
}

bool is_ice_type(const std::string& algorithm) {
  return algorithm == "ice" || algorithm == "iced" ||
         algorithm == "ice-mstar";
}

bool is_fixed_is(const std::string& algorithm) {
  return algorithm == "is-fixed" || algorithm == "figure1-family:is-opt";
}

}  // namespace

LimitState make_benchmark(const BenchmarkSpec& spec) {
  if (spec.name == "linear") return make_linear_sum(spec.n);
  if (spec.name == "ackley") {
    const double c = spec.ackley_threshold
                         ? *spec.ackley_threshold
                         : calibrated_ackley_threshold(
                               spec.n, ackley_target(spec.n));
    return make_modified_ackley(spec.n, c);
  }
  if (spec.name == "portfolio")
    return make_portfolio(
        spec.n, spec.portfolio_b.value_or(portfolio_default_b(spec.n)));
  if (spec.name == "parabola" || spec.name == "parabola-narrow")
    return make_parabola(spec.n, parabola_kappa(spec.name));
  throw ConfigError("unknown benchmark: " + spec.name);
}

double reference_probability(const BenchmarkSpec& spec, bool recompute,
                             std::uint64_t oracle_seed) {
  if (spec.name == "linear") return standard_normal_cdf(-3.0);
  if (!recompute) {
    if (spec.name == "ackley") return ackley_target(spec.n);
    if (spec.name == "parabola" || spec.name == "parabola-narrow")
      return parabola_reference(parabola_kappa(spec.name));
    if (spec.name == "portfolio") {
      const double b = spec.portfolio_b.value_or(portfolio_default_b(spec.n));
      if (spec.n == 30 && b == 0.45) return 4.29e-3;
      if (spec.n == 100 && b == 0.25) return 1.8e-3;
      if (spec.n == 250 && b == 0.25) return 1.0e-5;
      // fall through to the crude MC oracle for unregistered cells
    }
  }
  LimitState ls = make_benchmark(spec);
  RngStream rng(oracle_seed);
  const TrialResult oracle = crude_monte_carlo(ls, kOracleSamples, rng);
  return *oracle.p_hat;
}

int default_sample_size(const std::string& benchmark,
                        const std::string& algorithm, int n) {
  if (algorithm == "crude" || is_fixed_is(algorithm)) return 8000;
  using Table = std::map<std::pair<std::string, int>, int>;
  // Paper table sample sizes; cells the paper reports as NC keep the
  // nearest published value for that algorithm.
  static const std::map<std::string, Table> sizes = {
      {"linear",
       {{{"ice", 30}, 1000},      {{"ice-mstar", 30}, 2700},
        {{"iced", 30}, 3700},     {{"ce", 30}, 1000},
        {{"ce-mstar", 30}, 2700}, {{"ced", 30}, 3400},
        {{"ice-mstar", 100}, 2900}, {{"iced", 100}, 3700},
        {{"ce-mstar", 100}, 2700},  {{"ced", 100}, 3600},
        {{"ice-mstar", 300}, 4000}, {{"iced", 300}, 3700},
        {{"ce-mstar", 300}, 2700},  {{"ced", 300}, 3700}}},
      {"ackley",
       {{{"ice", 30}, 1000},      {{"ice-mstar", 30}, 2700},
        {{"iced", 30}, 2700},     {{"ce", 30}, 2700},
        {{"ce-mstar", 30}, 2200}, {{"ced", 30}, 2700},
        {{"ice-mstar", 100}, 2700}, {{"iced", 100}, 2700},
        {{"ce-mstar", 100}, 2200},  {{"ced", 100}, 2700},
        {{"ice-mstar", 200}, 2700}, {{"iced", 200}, 2700},
        {{"ce-mstar", 200}, 2700},  {{"ced", 200}, 3700}}},
      {"portfolio",
       {{{"ice", 30}, 1000},      {{"ice-mstar", 30}, 2700},
        {{"iced", 30}, 3200},     {{"ce", 30}, 2600},
        {{"ce-mstar", 30}, 2700}, {{"ced", 30}, 2700},
        {{"ice-mstar", 100}, 3000}, {{"iced", 100}, 2700},
        {{"ce-mstar", 100}, 2700},  {{"ced", 100}, 2700},
        {{"ice-mstar", 250}, 1600}, {{"iced", 250}, 1500},
        {{"ce-mstar", 250}, 2100}}},
      {"parabola",
       {{{"ice", 30}, 1000},      {{"ice-mstar", 30}, 2700},
        {{"iced", 30}, 2700},     {{"ce", 30}, 1000},
        {{"ce-mstar", 30}, 1600}, {{"ced", 30}, 2000},
        {{"ice-mstar", 100}, 2700}, {{"iced", 100}, 2600},
        {{"ce-mstar", 100}, 1900},  {{"ced", 100}, 2000},
        {{"ice-mstar", 300}, 2300}, {{"ce-mstar", 300}, 2400}}},
      // The narrow variant's feasible set is so thin that the adaptive
      // updates need these pilot-tuned sizes to reproduce the reference
      // behaviour of each algorithm.
      {"parabola-narrow",
       {{{"ice", 100}, 1000},      {{"ice-mstar", 100}, 2700},
        {{"iced", 100}, 150},      {{"ce", 100}, 1000},
        {{"ce-mstar", 100}, 2700}, {{"ced", 100}, 500}}}};
  const std::string bench = benchmark;
  const auto table = sizes.find(bench);
  if (table != sizes.end()) {
    auto it = table->second.find({algorithm, n});
    if (it != table->second.end()) return it->second;
    // closest published dimension for this algorithm
    int best = 0, best_gap = -1;
    for (const auto& [key, value] : table->second) {
      if (key.first != algorithm) continue;
      const int gap = std::abs(key.second - n);
      if (best_gap < 0 || gap < best_gap) {
        best_gap = gap;
        best = value;
      }
    }
    if (best > 0) return best;
  }
  return 2700;
}

void apply_algorithm_defaults(const std::string& algorithm,
                              EstimatorConfig& cfg) {
  cfg.rho = 0.1;
  cfg.delta_target = algorithm == "ice" ? 1.5 : 3.0;
  if (algorithm == "ce" || algorithm == "ice")
    cfg.family = CovarianceFamily::full();
  else if (algorithm == "ced" || algorithm == "iced")
    cfg.family = CovarianceFamily::diagonal();
  else if (algorithm == "ce-mstar" || algorithm == "ice-mstar")
    cfg.family = CovarianceFamily::rank_one_along_mean();
}

ExperimentSummary aggregate(const std::vector<TrialResult>& results,
                            double reference_p) {
  if (!(reference_p > 0.0))
    throw ConfigError("aggregate: reference probability must be > 0");
  ExperimentSummary summary;
  summary.repetitions = static_cast<int>(results.size());
  summary.reference_p = reference_p;
  double mean_sum = 0.0, sq_sum = 0.0, budget_sum = 0.0;
  int converged = 0;
  for (const TrialResult& r : results) {
    budget_sum += static_cast<double>(r.budget);
    if (!r.converged()) {
      ++summary.nc_count;
      continue;
    }
    ++converged;
    mean_sum += *r.p_hat;
    sq_sum += (*r.p_hat - reference_p) * (*r.p_hat - reference_p);
  }
  summary.avg_budget =
      results.empty() ? 0.0 : budget_sum / static_cast<double>(results.size());
  if (converged > 0) {
    summary.mean = mean_sum / converged;
    summary.cov = std::sqrt(sq_sum / converged) / reference_p;
    summary.relative_bias = (*summary.mean - reference_p) / reference_p;
  }
  summary.trials = results;
  return summary;
}

namespace {

TrialResult dispatch_trial(const ExperimentSpec& spec, const LimitState& ls,
                           const EstimatorConfig& cfg, RngStream& rng) {
  const std::string& alg = spec.algorithm;
  if (alg == "crude") return crude_monte_carlo(ls, cfg.sample_size, rng);
  if (is_fixed_is(alg)) {
    if (spec.benchmark.name != "linear")
      throw ConfigError(
          "optimal-density IS is only available for the linear benchmark");
    return importance_sampling(ls, linear_optimal_params(ls.dim()),
                               cfg.sample_size, rng);
  }
  if (is_ce_type(alg)) return run_ce(ls, cfg, rng);
  if (is_ice_type(alg)) return run_ice(ls, cfg, rng);
  throw ConfigError("unknown algorithm: " + alg);
}

EstimatorConfig effective_config(const ExperimentSpec& spec) {
  EstimatorConfig cfg = spec.config;
  apply_algorithm_defaults(spec.algorithm, cfg);
  cfg.sample_size =
      spec.sample_size.value_or(default_sample_size(
          spec.benchmark.name, spec.algorithm, spec.benchmark.n));
  if (spec.rho) cfg.rho = *spec.rho;
  if (spec.delta_target) cfg.delta_target = *spec.delta_target;
  if (spec.smoothing_alpha) cfg.smoothing_alpha = *spec.smoothing_alpha;
  if (spec.algorithm.rfind("figure1-family:fixed", 0) == 0) {
    if (spec.benchmark.name != "linear")
      throw ConfigError(
          "fixed-parameter families require the linear benchmark oracle");
    const GaussianParams opt =
        linear_optimal_params(spec.benchmark.n, cfg.epsilon);
    if (spec.algorithm == "figure1-family:fixed-cov")
      cfg.family = CovarianceFamily::with_fixed_covariance(opt.covariance);
    else if (spec.algorithm == "figure1-family:fixed-mean")
      cfg.family = CovarianceFamily::with_fixed_mean(opt.mean);
    else if (spec.algorithm == "figure1-family:fixed-mean-nw")
      cfg.family = CovarianceFamily::with_fixed_mean(
          opt.mean, CovarianceFamily::Inner::NorthWestBlock, 0.75);
    else
      throw ConfigError("unknown figure1 family: " + spec.algorithm);
  }
  return cfg;
}

std::vector<TrialResult> run_trials(const ExperimentSpec& spec,
                                    const EstimatorConfig& cfg, int reps,
                                    std::uint64_t seed_offset) {
  std::vector<TrialResult> results;
  results.reserve(static_cast<std::size_t>(reps));
  for (int k = 0; k < reps; ++k) {
    LimitState ls = make_benchmark(spec.benchmark);
    RngStream rng(spec.base_seed + seed_offset + static_cast<std::uint64_t>(k));
    results.push_back(dispatch_trial(spec, ls, cfg, rng));
  }
  return results;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  if (spec.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  EstimatorConfig cfg = effective_config(spec);

  if (spec.budget_target) {
    // Pilot on offset seeds, then rescale N so the average budget lands
    // near the target. Batch count barely depends on N, so one pass does.
    const int pilot_reps = std::min(20, spec.repetitions);
    const auto pilot = run_trials(spec, cfg, pilot_reps, 1'000'000);
    double batches = 0.0;
    for (const TrialResult& r : pilot)
      batches += static_cast<double>(r.budget) / cfg.sample_size;
    batches = std::max(1.0, batches / pilot_reps);
    const double raw = *spec.budget_target / batches;
    cfg.sample_size = std::clamp(
        static_cast<int>(std::lround(raw / 100.0)) * 100, 100, 1'000'000);
  }

  const double reference =
      spec.reference_p.value_or(reference_probability(
          spec.benchmark, spec.recompute_reference, spec.base_seed + 777));
  ExperimentSummary summary =
      aggregate(run_trials(spec, cfg, spec.repetitions, 0), reference);
  summary.benchmark = spec.benchmark.name;
  summary.algorithm = spec.algorithm;
  summary.n = spec.benchmark.n;
  summary.sample_size = cfg.sample_size;
  summary.base_seed = spec.base_seed;
  return summary;
}

std::vector<ExperimentSummary> dimension_sweep(
    const BenchmarkSpec& benchmark_template,
    const std::vector<std::string>& algorithms, const std::vector<int>& dims,
    const ExperimentSpec& spec_template) {
  if (dims.empty()) throw ConfigError("dimension_sweep: no dimensions");
  std::vector<ExperimentSummary> rows;
  for (const std::string& algorithm : algorithms) {
    for (int n : dims) {
      ExperimentSpec spec = spec_template;
      spec.benchmark = benchmark_template;
      spec.benchmark.n = n;
      spec.algorithm = algorithm;
      rows.push_back(run_experiment(spec));
    }
  }
  return rows;
}

std::vector<ExperimentSummary> run_table(int which, std::uint64_t base_seed) {
  static const std::vector<std::string> algorithms = {
      "ice", "ice-mstar", "iced", "ce", "ce-mstar", "ced"};
  std::string benchmark;
  std::vector<int> dims;
  switch (which) {
    case 1:
      benchmark = "linear";
      dims = {30, 100, 300};
      break;
    case 2:
      benchmark = "ackley";
      dims = {30, 100, 200};
      break;
    case 3:
      benchmark = "portfolio";
      dims = {30, 100, 250};
      break;
    case 4:
      benchmark = "parabola";
      dims = {30, 100, 300};
      break;
    default:
      throw ConfigError("table index must be 1..4");
  }
  std::vector<ExperimentSummary> rows;
  for (int n : dims) {
    for (const std::string& algorithm : algorithms) {
      ExperimentSpec spec;
      spec.benchmark.name = benchmark;
      spec.benchmark.n = n;
      spec.algorithm = algorithm;
      spec.base_seed = base_seed;
      rows.push_back(run_experiment(spec));
    }
  }
  return rows;
}

namespace {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace

std::string emit(const std::vector<ExperimentSummary>& rows,
                 EmitFormat format) {
  if (format == EmitFormat::Csv) {
    std::ostringstream out;
    out << "benchmark,algorithm,n,N,reps,mean,cov_pct,rel_bias_pct,"
           "nc_count,avg_budget,seed\n";
    for (const ExperimentSummary& row : rows) {
      out << row.benchmark << ',' << row.algorithm << ',' << row.n << ','
          << row.sample_size << ',' << row.repetitions << ',';
      if (row.nc_dominated() || !row.mean) {
        out << "NC,NC,NC,";
      } else {
        out << format_double(*row.mean) << ','
            << format_double(*row.cov * 100.0) << ','
            << format_double(*row.relative_bias * 100.0) << ',';
      }
      out << row.nc_count << ',' << format_double(row.avg_budget) << ','
          << row.base_seed << '\n';
    }
    return out.str();
  }

  nlohmann::ordered_json array = nlohmann::ordered_json::array();
  for (const ExperimentSummary& row : rows) {
    nlohmann::ordered_json obj;
    obj["benchmark"] = row.benchmark;
    obj["algorithm"] = row.algorithm;
    obj["n"] = row.n;
    obj["N"] = row.sample_size;
    obj["reps"] = row.repetitions;
    if (row.nc_dominated() || !row.mean) {
      obj["mean"] = "NC";
      obj["cov_pct"] = "NC";
      obj["rel_bias_pct"] = "NC";
    } else {
      obj["mean"] = std::stod(format_double(*row.mean));
      obj["cov_pct"] = std::stod(format_double(*row.cov * 100.0));
      obj["rel_bias_pct"] =
          std::stod(format_double(*row.relative_bias * 100.0));
    }
    obj["nc_count"] = row.nc_count;
    obj["avg_budget"] = std::stod(format_double(row.avg_budget));
    obj["seed"] = row.base_seed;
    array.push_back(obj);
  }
  return array.dump(2) + "\n";
}

void emit_to_file(const std::vector<ExperimentSummary>& rows,
                  EmitFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << emit(rows, format);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace raresim
