#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "manirank/consensus.hpp"
#include "manirank/metrics.hpp"
#include "manirank/model.hpp"

namespace manirank {

/// Exact fair consensus: minimum total disagreement among orders whose
/// FairnessReport is satisfied. Throws Infeasible when no order qualifies,
/// BudgetExceeded when the budget runs out before any qualifying order is
/// found, InstanceTooLarge. With an incumbent but no proof the solution comes
/// back with `optimal == false`. A feasible `warm_start` joins the repaired
/// heuristics as a starting incumbent, so sweeping thresholds upward and
/// passing each result on never yields a worse objective.
KemenySolution fair_kemeny(const PrecedenceMatrix& precedence, const FairnessSpec& spec, const GroupIndex& index,
                           const KemenyOptions& options = {});
KemenySolution fair_kemeny(const KemenySolver& solver, const PrecedenceMatrix& precedence, const FairnessSpec& spec,
                           const GroupIndex& index, const std::optional<Ranking>& warm_start = std::nullopt);

struct Swap {
  Index higher;  // member of the most favored group, moved down
  Index lower;   // member of the least favored group, moved up
  std::string entity;
};

struct RepairTrace {
  std::vector<Swap> swaps;
  std::size_t iterations = 0;
  FairnessReport final_report;
};

struct RepairResult {
  Ranking ranking;
  RepairTrace trace;
};

/// Pairwise repair: while some constrained entity exceeds its threshold, take
/// the worst one, its most and least favored groups, and swap the lowest
/// most-favored member that still has a least-favored member below it with the
/// highest such least-favored member. Throws RepairStalled after 2n^2 swaps or
/// when no legal swap exists.
RepairResult make_mr_fair(const Ranking& ranking, const FairnessSpec& spec, const GroupIndex& index);

enum class PipelineMethod { kBorda, kCopeland, kSchulze, kPickFairest };

std::string_view to_string(PipelineMethod method);

struct PipelineResult {
  Ranking unaware;
  Ranking fair;
  RepairTrace trace;
  Score pd_loss_unaware;
  Score pd_loss_fair;
  Rational price_of_fairness;
};

/// Runs the fairness-unaware method, then make_mr_fair on its output.
PipelineResult fair_pipeline(PipelineMethod method, const RankingSet& rankings, const FairnessSpec& spec,
                             const GroupIndex& index);

/// Exhaustive oracle over all n! orders (n <= 9). The objective is the
/// weighted Kendall tau sum against the base rankings.
KemenySolution brute_force_fair_kemeny(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index);

}  // namespace manirank
