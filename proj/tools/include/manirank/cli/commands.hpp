#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "manirank/consensus.hpp"
#include "manirank/errors.hpp"
#include "manirank/metrics.hpp"
#include "manirank/model.hpp"

namespace manirank::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitInfeasible = 3,
  kExitRepairStalled = 4,
  kExitBudgetExceeded = 5,
  kExitScenarioUnreachable = 6,
  kExitInstanceTooLarge = 7,
  kExitIo = 8,
};

int exit_code(ErrorKind kind);

inline constexpr std::string_view kMethods[] = {
    "kemeny",   "fair-kemeny",   "borda",        "fair-borda",   "copeland",        "fair-copeland",
    "schulze",  "fair-schulze",  "pick-fairest", "correct-pick", "kemeny-weighted",
};

bool is_method(std::string_view name);

/// Fairness thresholds and switches as given on the command line.
struct FairnessFlags {
  std::string delta = "0.1";
  std::vector<std::string> delta_attr;  // NAME=VALUE
  std::optional<std::string> delta_inter;
  std::optional<std::string> intersection;  // "none" or a comma-separated attribute list
  std::optional<std::string> attributes;    // "none" disables the per-attribute constraints
};

struct Fairness {
  FairnessSpec spec;
  GroupIndex index;
};

/// Throws InvalidInput or UnknownAttribute for malformed flags.
Fairness make_fairness(const FairnessFlags& flags, const CandidateTable& table);

/// MANIRANK_TIME_BUDGET_MS, when set to a non-negative integer.
std::optional<std::chrono::milliseconds> budget_from_env();

struct MethodRun {
  Ranking consensus;
  std::optional<Ranking> unaware;  // fairness-unaware counterpart, for the price of fairness
  std::optional<std::size_t> swaps;
  std::optional<KemenySolution> exact;
};

/// `solver` may be null; Kemeny-family methods then build their own.
MethodRun run_method(std::string_view method, const RankingSet& rankings, const PrecedenceMatrix& precedence,
                     const Fairness& fairness, const KemenySolver* solver, const KemenyOptions& options,
                     const std::optional<Ranking>& warm_start = std::nullopt);

struct AggregateOptions {
  std::string method;
  std::filesystem::path candidates;
  std::filesystem::path rankings;
  std::filesystem::path out;
  FairnessFlags fairness;
  std::optional<std::chrono::milliseconds> time_budget;
  bool timing = false;
};

struct MetricsOptions {
  std::filesystem::path candidates;
  std::filesystem::path rankings;
  std::vector<std::filesystem::path> score;  // empty: score the base rankings
  std::filesystem::path out;
  FairnessFlags fairness;
  std::string format = "both";  // csv, json or both
};

struct GenerateOptions {
  std::optional<std::filesystem::path> candidates;
  std::optional<std::string> population;  // Race:5,Gender:3
  std::size_t per_cell = 1;
  std::optional<std::filesystem::path> modal;
  std::optional<std::string> scenario;
  std::string tolerance = "0.05";
  double theta = 0.0;
  std::size_t num_rankings = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct ExperimentOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::chrono::milliseconds> time_budget;
  bool timing = false;
};

int cmd_aggregate(const AggregateOptions& options, std::ostream& out, std::ostream& err);
int cmd_metrics(const MetricsOptions& options, std::ostream& out, std::ostream& err);
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_experiment(const ExperimentOptions& options, std::ostream& out, std::ostream& err);

/// Full command line, argv[0] included.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace manirank::cli
