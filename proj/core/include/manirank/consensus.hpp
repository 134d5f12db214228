#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "manirank/metrics.hpp"
#include "manirank/model.hpp"

namespace manirank {

struct KemenyOptions {
  /// Wall-clock budget for the exact search; nullopt means unbounded.
  std::optional<std::chrono::milliseconds> time_budget;
  /// Instances above this many candidates are rejected with InstanceTooLarge.
  std::size_t max_exact_candidates = 25;
  /// Largest n for which the exact subset-DP completion bound is tabulated
  /// (2^n 32-bit entries). Above it the pairwise-minimum bound is used.
  std::size_t max_dp_bound_candidates = 25;
  /// Slots in the dominance memo used by the fairness-constrained search.
  std::size_t memo_capacity = std::size_t{1} << 21;
  /// Subgradient rounds spent tightening the constrained bound with
  /// per-group position-sum multipliers (each round is one subset DP).
  std::size_t dual_iterations = 12;
  /// Integer resolution of those multipliers relative to one disagreement.
  std::int64_t dual_scale = 8;
};

struct KemenySolution {
  Ranking ranking;
  std::int64_t objective = 0;  // sum of W[a][b] over a ahead of b
  bool optimal = false;
  std::uint64_t nodes_explored = 0;
};

/// Result of one branch-and-bound run. `exhausted` means the whole space was
/// explored (or provably pruned) within budget, so `ranking` is optimal, and
/// an empty `ranking` proves infeasibility.
struct SearchOutcome {
  std::optional<Ranking> ranking;
  std::int64_t objective = 0;
  bool exhausted = false;
  std::uint64_t nodes_explored = 0;
};

/// Depth-first branch-and-bound over prefixes of the linear order. A node
/// places the next candidate and pays W[c][u] for every unplaced u. The
/// completion bound is the exact unconstrained optimum of the unplaced set
/// (subset DP, tabulated once per solver) or, for larger n, the sum of
/// pairwise minima. Fairness constraints are enforced on FPR intervals derived
/// from each group's placed position sum and the free slots left. Constrained
/// solves first tighten the tabulated bound by subgradient ascent on
/// per-group position-sum multipliers.
///
/// The tabulated bound depends only on the precedence matrix, so one solver
/// can serve many constrained solves over the same base rankings.
class KemenySolver {
 public:
  /// Throws InstanceTooLarge when n exceeds `options.max_exact_candidates`.
  explicit KemenySolver(const PrecedenceMatrix& precedence, KemenyOptions options = {});
  ~KemenySolver();
  KemenySolver(KemenySolver&&) noexcept;
  KemenySolver& operator=(KemenySolver&&) noexcept;

  std::size_t size() const;
  SearchOutcome solve(const std::optional<Ranking>& incumbent = std::nullopt) const;
  /// Maps an arbitrary order to a nearby order satisfying the constraints.
  using Repair = std::function<std::optional<Ranking>(const Ranking&)>;

  /// Minimum-disagreement order among those satisfying every constrained
  /// entity of `spec`. An infeasible incumbent is ignored. `repair`, when
  /// given, is applied to each relaxed optimum to find better incumbents.
  SearchOutcome solve_constrained(const FairnessSpec& spec, const GroupIndex& index,
                                  const std::optional<Ranking>& incumbent = std::nullopt,
                                  const Repair& repair = {}) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact Kemeny consensus, incumbent seeded from Borda. On budget exhaustion
/// the best incumbent is returned with `optimal == false`. Throws
/// InstanceTooLarge.
KemenySolution kemeny_exact(const PrecedenceMatrix& precedence, const KemenyOptions& options = {});
KemenySolution kemeny_exact(const KemenySolver& solver, const PrecedenceMatrix& precedence);

/// Descending total of candidates ranked below, index tie-break.
Ranking borda(const RankingSet& rankings);
/// Same tally read off a precedence matrix: points(c) = sum_b W[b][c].
Ranking borda(const PrecedenceMatrix& precedence);

/// Candidates by descending score, ascending index on ties.
Ranking order_by_descending(std::span<const std::int64_t> scores);

/// Streaming Borda tally for rankings that never need to be held in memory.
class BordaAccumulator {
 public:
  explicit BordaAccumulator(std::size_t n) : points_(n, 0) {}
  void add(std::span<const Index> order, std::int64_t weight = 1);
  void add(const Ranking& ranking, std::int64_t weight = 1) { add(ranking.order(), weight); }
  const std::vector<std::int64_t>& points() const { return points_; }
  Ranking ranking() const;

 private:
  std::vector<std::int64_t> points_;
};

/// Descending count of pairwise contests won, where a tie counts as a win for
/// both sides; index tie-break.
Ranking copeland(const PrecedenceMatrix& precedence);

/// Widest-path strengths over the preference graph (edge a->b carries the
/// support for a over b), then descending count of strongest-path wins.
std::vector<std::int64_t> schulze_strengths(const PrecedenceMatrix& precedence);
Ranking schulze(const PrecedenceMatrix& precedence);

/// Sort key used to compare base rankings by fairness: the largest constrained
/// score first, then IRP, then each ARP in attribute order. Smaller is fairer.
std::vector<Rational> fairness_key(const Ranking& ranking, const FairnessSpec& spec, const GroupIndex& index);

/// Position in `rankings` of the fairest base ranking (first on ties).
std::size_t pick_fairest_index(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index);
Ranking pick_fairest_perm(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index);

/// Weights 1..|R| from least to most fair base ranking (stable on ties).
std::vector<std::int64_t> fairness_weights(const RankingSet& rankings, const FairnessSpec& spec,
                                           const GroupIndex& index);
/// Exact Kemeny on the fairness-weighted precedence matrix.
KemenySolution kemeny_weighted(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index,
                               const KemenyOptions& options = {});

}  // namespace manirank
