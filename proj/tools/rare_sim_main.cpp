// rare-sim: failure-probability experiment runner.
//
// Subcommands:
//   run     one (benchmark, algorithm, dimension) experiment
//   sweep   dimension sweep over a list of algorithms
//   tables  reproduce one of the four published benchmark tables
//
// Exit codes: 0 success, 2 when the requested results are NC-dominated
// (more than half the repetitions of every requested cell failed to
// converge), 1 on errors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "raresim/harness.hpp"

namespace {

using raresim::EmitFormat;
using raresim::ExperimentSpec;
using raresim::ExperimentSummary;

struct CommonOptions {
  std::string benchmark = "linear";
  int dim = 30;
  int reps = 100;
  std::optional<int> samples;
  std::optional<double> budget_target;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::optional<double> smoothing_alpha;
  std::optional<double> rho;
  std::optional<double> delta;
  std::optional<double> portfolio_b;
  bool recompute_reference = false;
  std::string config_path;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--benchmark", opt.benchmark,
                  "linear | ackley | portfolio | parabola | parabola-narrow");
  cmd->add_option("--dim", opt.dim, "dimension n (portfolio inputs are n+2)");
  cmd->add_option("--reps", opt.reps, "independent repetitions");
  cmd->add_option("--samples", opt.samples, "per-iteration sample size N");
  cmd->add_option("--budget-target", opt.budget_target,
                  "auto-tune N so the average budget lands near this value");
  cmd->add_option("--seed", opt.seed, "base seed; trial k uses seed+k");
  cmd->add_option("--out", opt.out, "output path (stdout when omitted)");
  cmd->add_option("--format", opt.format, "csv | json");
  cmd->add_option("--smoothing-alpha", opt.smoothing_alpha,
                  "smoothed update weight in (0,1]; 1 disables smoothing");
  cmd->add_option("--rho", opt.rho, "CE quantile level");
  cmd->add_option("--delta", opt.delta, "iCE coefficient-of-variation target");
  cmd->add_option("--portfolio-b", opt.portfolio_b,
                  "portfolio loss fraction b");
  cmd->add_flag("--recompute-reference", opt.recompute_reference,
                "recompute the reference P by a 1e7-sample crude MC oracle");
  cmd->add_option("--config", opt.config_path,
                  "JSON config mirroring these flags; flags override it");
}

// Flags given on the command line win; everything else falls back to the
// config file, then to the built-in defaults.
void apply_config_file(const CLI::App& cmd, CommonOptions& opt,
                       std::string* algorithm = nullptr,
                       std::string* algorithms = nullptr,
                       std::string* dims = nullptr) {
  if (opt.config_path.empty()) return;
  std::ifstream in(opt.config_path);
  if (!in) throw std::runtime_error("cannot open config: " + opt.config_path);
  nlohmann::json cfg = nlohmann::json::parse(in);
  const auto takes = [&](const std::string& flag, std::string* target) {
    if (target && cmd.get_option("--" + flag)->count() == 0 &&
        cfg.contains(flag))
      *target = cfg[flag].get<std::string>();
  };
  takes("algorithm", algorithm);
  takes("algorithms", algorithms);
  takes("dims", dims);
  const auto unset = [&](const std::string& flag) {
    const auto* o = cmd.get_option("--" + flag);
    return o->count() == 0 && cfg.contains(flag);
  };
  if (unset("benchmark")) opt.benchmark = cfg["benchmark"].get<std::string>();
  if (unset("dim")) opt.dim = cfg["dim"].get<int>();
  if (unset("reps")) opt.reps = cfg["reps"].get<int>();
  if (unset("samples")) opt.samples = cfg["samples"].get<int>();
  if (unset("budget-target"))
    opt.budget_target = cfg["budget-target"].get<double>();
  if (unset("seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
  if (unset("out")) opt.out = cfg["out"].get<std::string>();
  if (unset("format")) opt.format = cfg["format"].get<std::string>();
  if (unset("smoothing-alpha"))
    opt.smoothing_alpha = cfg["smoothing-alpha"].get<double>();
  if (unset("rho")) opt.rho = cfg["rho"].get<double>();
  if (unset("delta")) opt.delta = cfg["delta"].get<double>();
  if (unset("portfolio-b")) opt.portfolio_b = cfg["portfolio-b"].get<double>();
  if (unset("recompute-reference"))
    opt.recompute_reference = cfg["recompute-reference"].get<bool>();
}

ExperimentSpec to_spec(const CommonOptions& opt, const std::string& algorithm) {
  ExperimentSpec spec;
  spec.benchmark.name = opt.benchmark;
  spec.benchmark.n = opt.dim;
  spec.benchmark.portfolio_b = opt.portfolio_b;
  spec.algorithm = algorithm;
  spec.repetitions = opt.reps;
  spec.sample_size = opt.samples;
  spec.budget_target = opt.budget_target;
  spec.rho = opt.rho;
  spec.delta_target = opt.delta;
  spec.smoothing_alpha = opt.smoothing_alpha;
  spec.base_seed = opt.seed;
  spec.recompute_reference = opt.recompute_reference;
  return spec;
}

EmitFormat parse_format(const std::string& format) {
  if (format == "csv") return EmitFormat::Csv;
  if (format == "json") return EmitFormat::Json;
  throw std::runtime_error("unknown format: " + format);
}

int write_output(const std::vector<ExperimentSummary>& rows,
                 const CommonOptions& opt) {
  const EmitFormat format = parse_format(opt.format);
  if (opt.out.empty())
    std::cout << raresim::emit(rows, format);
  else
    raresim::emit_to_file(rows, format, opt.out);
  bool all_nc = !rows.empty();
  for (const ExperimentSummary& row : rows)
    all_nc = all_nc && row.nc_dominated();
  return all_nc ? 2 : 0;
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  if (text.find(':') != std::string::npos) {
    int lo = 0, hi = 0, step = 1;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    in >> lo >> c1 >> hi >> c2 >> step;
    if (!in || c1 != ':' || c2 != ':' || step < 1 || hi < lo)
      throw std::runtime_error("bad --dims range, expected lo:hi:step");
    for (int n = lo; n <= hi; n += step) dims.push_back(n);
  } else {
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) dims.push_back(std::stoi(token));
  }
  if (dims.empty()) throw std::runtime_error("empty --dims");
  return dims;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) out.push_back(token);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rare-sim: rare failure probability estimation experiments"};
  app.require_subcommand(1);

  CommonOptions run_opt;
  std::string run_algorithm = "ce-mstar";
  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
  run_cmd->add_option("--algorithm", run_algorithm,
                      "crude | is-fixed | ce | ced | ce-mstar | ice | iced | "
                      "ice-mstar | figure1-family:<tag>");
  add_common_options(run_cmd, run_opt);

  CommonOptions sweep_opt;
  std::string sweep_algorithms = "ce,ce-mstar,ice-mstar,ced";
  std::string sweep_dims = "10:60:10";
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "dimension sweep over algorithms");
  sweep_cmd->add_option("--algorithms", sweep_algorithms,
                        "comma-separated algorithm list");
  sweep_cmd->add_option("--dims", sweep_dims, "lo:hi:step or comma list");
  add_common_options(sweep_cmd, sweep_opt);

  CommonOptions tables_opt;
  int which = 1;
  CLI::App* tables_cmd =
      app.add_subcommand("tables", "reproduce a published benchmark table");
  tables_cmd->add_option("--which", which, "table index 1..4")->required();
  add_common_options(tables_cmd, tables_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      apply_config_file(*run_cmd, run_opt, &run_algorithm);
      const auto summary = raresim::run_experiment(to_spec(run_opt,
                                                           run_algorithm));
      return write_output({summary}, run_opt);
    }
    if (sweep_cmd->parsed()) {
      apply_config_file(*sweep_cmd, sweep_opt, nullptr, &sweep_algorithms,
                        &sweep_dims);
      const ExperimentSpec spec_template = to_spec(sweep_opt, "");
      const auto rows = raresim::dimension_sweep(
          spec_template.benchmark, split_csv(sweep_algorithms),
          parse_dims(sweep_dims), spec_template);
      return write_output(rows, sweep_opt);
    }
    apply_config_file(*tables_cmd, tables_opt);
    const auto rows = raresim::run_table(which, tables_opt.seed);
    return write_output(rows, tables_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
