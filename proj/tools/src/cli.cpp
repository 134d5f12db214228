#include <CLI11.hpp>
#include <ostream>

#include "manirank/cli/commands.hpp"

namespace manirank::cli {

namespace {

void add_fairness_flags(CLI::App* sub, FairnessFlags& f) {
  sub->add_option("--delta", f.delta, "Threshold for every score, decimal with at most 6 digits")->capture_default_str();
  sub->add_option("--delta-attr", f.delta_attr, "Per-attribute threshold NAME=VALUE (repeatable)");
  sub->add_option("--delta-inter", f.delta_inter, "Threshold for the intersectional score");
  sub->add_option("--intersection", f.intersection, "Attributes forming the intersection (comma list), or none");
  sub->add_option("--attributes", f.attributes, "none disables the per-attribute constraints");
}

std::optional<std::chrono::milliseconds> budget(const std::optional<long long>& flag) {
  if (flag) {
    if (*flag < 0) throw CLI::ValidationError("--time-budget-ms", "must be non-negative");
    return std::chrono::milliseconds(*flag);
  }
  return budget_from_env();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consensus ranking with group fairness over multiple protected attributes", "manirank"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "manirank 0.1.0");

  AggregateOptions aggregate;
  std::optional<long long> aggregate_budget;
  auto* agg = app.add_subcommand("aggregate", "Build one consensus ranking from base rankings");
  agg->add_option("--method", aggregate.method, "Aggregation method")->required();
  agg->add_option("--candidates", aggregate.candidates, "Candidates CSV")->required();
  agg->add_option("--rankings", aggregate.rankings, "Rankings CSV")->required();
  agg->add_option("--out", aggregate.out, "Output directory")->required();
  agg->add_option("--time-budget-ms", aggregate_budget, "Exact-search budget (default: MANIRANK_TIME_BUDGET_MS)");
  agg->add_flag("--timing", aggregate.timing, "Record wall-clock milliseconds in the report");
  add_fairness_flags(agg, aggregate.fairness);

  MetricsOptions metrics;
  auto* met = app.add_subcommand("metrics", "Score rankings against the base rankings and the thresholds");
  met->add_option("--candidates", metrics.candidates, "Candidates CSV")->required();
  met->add_option("--rankings", metrics.rankings, "Base rankings CSV")->required();
  met->add_option("--score", metrics.score, "Rankings CSV to score (repeatable; default: the base rankings)");
  met->add_option("--out", metrics.out, "Output directory")->required();
  met->add_option("--format", metrics.format, "csv, json or both")->capture_default_str();
  add_fairness_flags(met, metrics.fairness);

  GenerateOptions generate;
  auto* gen = app.add_subcommand("generate", "Sample base rankings from a Mallows model");
  gen->add_option("--candidates", generate.candidates, "Candidates CSV");
  gen->add_option("--population", generate.population, "Synthetic population, e.g. Race:5,Gender:3");
  gen->add_option("--per-cell", generate.per_cell, "Candidates per attribute-value combination")->capture_default_str();
  gen->add_option("--modal", generate.modal, "Modal ranking CSV (one row)");
  gen->add_option("--scenario", generate.scenario, "low-fair, medium-fair or high-fair");
  gen->add_option("--tolerance", generate.tolerance, "Scenario window half-width")->capture_default_str();
  gen->add_option("--theta", generate.theta, "Mallows spread (0 = uniform)")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--num-rankings", generate.num_rankings, "Rankings to sample")->required();
  gen->add_option("--seed", generate.seed, "Base seed")->required();
  gen->add_option("--out", generate.out, "Output directory")->required();

  ExperimentOptions experiment;
  std::optional<long long> experiment_budget;
  auto* exp = app.add_subcommand("experiment", "Run a method x theta x delta grid from a JSON config");
  exp->add_option("--config", experiment.config, "Experiment config JSON")->required();
  exp->add_option("--out", experiment.out, "Output directory (overrides the config)");
  exp->add_option("--time-budget-ms", experiment_budget, "Exact-search budget per solve");
  exp->add_flag("--timing", experiment.timing, "Fill the millis column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "manirank 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*agg) {
      aggregate.time_budget = budget(aggregate_budget);
      return cmd_aggregate(aggregate, out, err);
    }
    if (*met) return cmd_metrics(metrics, out, err);
    if (*gen) return cmd_generate(generate, out, err);
    if (experiment_budget) experiment.time_budget = budget(experiment_budget);
    return cmd_experiment(experiment, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  }
}

}  // namespace manirank::cli
