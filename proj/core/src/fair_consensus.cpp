#include "manirank/fair_consensus.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "manirank/errors.hpp"

namespace manirank {

namespace {

__extension__ typedef __int128 i128;

struct RepairEntity {
  const GroupEntity* entity;
  Rational threshold;
  std::vector<std::int64_t> favored;

  Score fpr(std::size_t g) const { return Score(favored[g], entity->groups[g].mixed_pairs); }

  // exact check of max FPR - min FPR <= threshold on the integer counts
  bool within() const {
    const auto& groups = entity->groups;
    std::size_t hi = 0, lo = 0;
    for (std::size_t g = 1; g < favored.size(); ++g) {
      if (static_cast<i128>(favored[g]) * groups[hi].mixed_pairs > static_cast<i128>(favored[hi]) * groups[g].mixed_pairs)
        hi = g;
      if (static_cast<i128>(favored[g]) * groups[lo].mixed_pairs < static_cast<i128>(favored[lo]) * groups[g].mixed_pairs)
        lo = g;
    }
    const i128 m_hi = groups[hi].mixed_pairs, m_lo = groups[lo].mixed_pairs;
    return threshold.denominator() * (favored[hi] * m_lo - favored[lo] * m_hi) <= threshold.numerator() * m_hi * m_lo;
  }
};

// Selection order on equal scores: intersection first, then attributes as declared.
std::vector<RepairEntity> constrained_entities(const Ranking& ranking, const FairnessSpec& spec,
                                               const GroupIndex& index) {
  std::vector<RepairEntity> entities;
  if (spec.constrain_intersection && index.intersection().num_groups() >= 2)
    entities.push_back({&index.intersection(), spec.intersection_threshold(), {}});
  if (spec.constrain_attributes)
    for (const auto& e : index.attributes())
      if (e.num_groups() >= 2) entities.push_back({&e, spec.attribute_threshold(e.name), {}});
  for (auto& e : entities) e.favored = favored_counts(ranking, *e.entity);
  return entities;
}

// Moves one candidate at a time to the cheapest position that keeps every
// constrained entity within its threshold, until no move lowers the cost.
Ranking polish(const Ranking& start, const PrecedenceMatrix& w, const FairnessSpec& spec, const GroupIndex& index) {
  std::vector<Index> order(start.order().begin(), start.order().end());
  const std::size_t n = order.size();
  auto entities = constrained_entities(start, spec, index);
  auto trial = entities;
  auto pass = [&](Index moving, Index passed, int sign) {
    for (auto& e : trial) {
      const auto gx = e.entity->group_of[moving], gy = e.entity->group_of[passed];
      if (gx == gy) continue;
      e.favored[gx] += sign;
      e.favored[gy] -= sign;
    }
  };
  auto feasible = [&] {
    return std::all_of(trial.begin(), trial.end(), [](const RepairEntity& e) { return e.within(); });
  };
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Index x = order[i];
      std::int64_t best_delta = 0;
      std::size_t best_j = i;
      std::vector<RepairEntity> best_counts;
      for (int dir : {-1, +1}) {
        trial = entities;
        std::int64_t delta = 0;
        for (std::size_t j = i; dir < 0 ? j > 0 : j + 1 < n;) {
          j = dir < 0 ? j - 1 : j + 1;
          const Index y = order[j];
          delta += dir < 0 ? w(x, y) - w(y, x) : w(y, x) - w(x, y);
          pass(x, y, -dir);
          if (delta < best_delta && feasible()) {
            best_delta = delta;
            best_j = j;
            best_counts = trial;
          }
        }
      }
      if (best_j == i) continue;
      if (best_j < i) std::rotate(order.begin() + best_j, order.begin() + i, order.begin() + i + 1);
      else std::rotate(order.begin() + i, order.begin() + i + 1, order.begin() + best_j + 1);
      entities = std::move(best_counts);
      improved = true;
    }
  }
  return Ranking(std::move(order));
}

}  // namespace

KemenySolution fair_kemeny(const KemenySolver& solver, const PrecedenceMatrix& precedence, const FairnessSpec& spec,
                           const GroupIndex& index, const std::optional<Ranking>& warm_start) {
  spec.validate();
  // Attribute-only repair can cycle between attributes; the same repair with
  // the intersection also constrained still yields an order feasible here.
  std::optional<FairnessSpec> stricter;
  if (spec.constrain_attributes && !spec.constrain_intersection && index.intersection().num_groups() >= 2) {
    stricter = spec;
    stricter->constrain_intersection = true;
    Rational tightest = spec.delta_default;
    for (const auto& e : index.attributes()) tightest = std::min(tightest, spec.attribute_threshold(e.name));
    stricter->delta_intersection = tightest;
  }
  std::vector<const FairnessSpec*> attempts{&spec};
  if (stricter) attempts.push_back(&*stricter);
  const KemenySolver::Repair repair = [&](const Ranking& start) -> std::optional<Ranking> {
    for (const FairnessSpec* s : attempts) {
      try {
        return polish(make_mr_fair(start, *s, index).ranking, precedence, spec, index);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kRepairStalled) throw;
      }
    }
    return std::nullopt;
  };

  // Cheapest fair order among the repaired heuristics seeds the search.
  std::optional<Ranking> incumbent;
  std::int64_t incumbent_cost = 0;
  auto consider = [&](const Ranking& candidate) {
    const std::int64_t cost = precedence.disagreement(candidate);
    if (!incumbent || cost < incumbent_cost) {
      incumbent = candidate;
      incumbent_cost = cost;
    }
  };
  for (const auto& start : {borda(precedence), copeland(precedence), schulze(precedence)})
    if (auto repaired = repair(start)) consider(*repaired);
  if (warm_start && warm_start->size() == precedence.size() && mani_rank_check(*warm_start, spec, index).satisfied)
    consider(*warm_start);

  auto outcome = solver.solve_constrained(spec, index, incumbent, repair);
  if (!outcome.ranking) {
    if (outcome.exhausted) throw Error(ErrorKind::kInfeasible, "no ranking satisfies the fairness thresholds");
    throw Error(ErrorKind::kBudgetExceeded, "time budget exhausted before a fair ranking was found");
  }
  KemenySolution sol;
  sol.ranking = std::move(*outcome.ranking);
  sol.objective = outcome.objective;
  sol.optimal = outcome.exhausted;
  sol.nodes_explored = outcome.nodes_explored;
  return sol;
}

KemenySolution fair_kemeny(const PrecedenceMatrix& precedence, const FairnessSpec& spec, const GroupIndex& index,
                           const KemenyOptions& options) {
  const KemenySolver solver(precedence, options);
  return fair_kemeny(solver, precedence, spec, index);
}

RepairResult make_mr_fair(const Ranking& input, const FairnessSpec& spec, const GroupIndex& index) {
  spec.validate();
  const std::size_t n = input.size();
  if (n != index.candidate_count())
    throw Error(ErrorKind::kInconsistentCandidateSet, "ranking size differs from group index");

  Ranking ranking = input;
  auto entities = constrained_entities(ranking, spec, index);

  RepairTrace trace;
  const std::size_t swap_cap = 2 * n * n;
  while (true) {
    RepairEntity* target = nullptr;
    Score worst;
    std::size_t high = 0, low = 0;
    for (auto& e : entities) {
      std::size_t hi_g = 0, lo_g = 0;
      for (std::size_t g = 1; g < e.favored.size(); ++g) {
        const Score f = e.fpr(g);
        if (f > e.fpr(hi_g)) hi_g = g;
        if (f < e.fpr(lo_g)) lo_g = g;
      }
      const Score score = e.fpr(hi_g) - e.fpr(lo_g);
      if (score <= e.threshold) continue;
      if (!target || score > worst) {
        target = &e;
        worst = score;
        high = hi_g;
        low = lo_g;
      }
    }
    if (!target) break;
    ++trace.iterations;
    if (trace.swaps.size() >= swap_cap)
      throw Error(ErrorKind::kRepairStalled, "repair reached the swap cap of " + std::to_string(swap_cap));

    const auto& group_of = target->entity->group_of;
    std::optional<std::size_t> below_low;  // nearest least-favored member below the scan point
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (std::size_t k = n; k-- > 0;) {
      const auto g = group_of[ranking.at(k)];
      if (g == low) {
        below_low = k;
      } else if (g == high && below_low) {
        pick = std::make_pair(k, *below_low);
        break;
      }
    }
    if (!pick)
      throw Error(ErrorKind::kRepairStalled,
                  "no favored member of '" + target->entity->name + "' sits above a disfavored one");

    const auto [i, j] = *pick;
    const Index x_high = ranking.at(i);
    const Index x_low = ranking.at(j);
    const auto distance = static_cast<std::int64_t>(j - i);
    for (auto& e : entities) {
      const auto gx = e.entity->group_of[x_high];
      const auto gy = e.entity->group_of[x_low];
      if (gx == gy) continue;
      // groups other than gx, gy keep their favored counts under this transposition
      e.favored[gx] -= distance;
      e.favored[gy] += distance;
    }
    ranking.swap_positions(i, j);
    trace.swaps.push_back(Swap{x_high, x_low, target->entity->name});
  }

  trace.final_report = mani_rank_check(ranking, spec, index);
  if (!trace.final_report.satisfied) throw std::logic_error("repair finished on an unsatisfied ranking");
  return RepairResult{std::move(ranking), std::move(trace)};
}

std::string_view to_string(PipelineMethod method) {
  switch (method) {
    case PipelineMethod::kBorda: return "borda";
    case PipelineMethod::kCopeland: return "copeland";
    case PipelineMethod::kSchulze: return "schulze";
    case PipelineMethod::kPickFairest: return "pick-fairest";
  }
  return "unknown";
}

PipelineResult fair_pipeline(PipelineMethod method, const RankingSet& rankings, const FairnessSpec& spec,
                             const GroupIndex& index) {
  Ranking unaware;
  switch (method) {
    case PipelineMethod::kBorda: unaware = borda(rankings); break;
    case PipelineMethod::kCopeland: unaware = copeland(build_precedence_matrix(rankings)); break;
    case PipelineMethod::kSchulze: unaware = schulze(build_precedence_matrix(rankings)); break;
    case PipelineMethod::kPickFairest: unaware = pick_fairest_perm(rankings, spec, index); break;
  }
  RepairResult repaired = make_mr_fair(unaware, spec, index);
  PipelineResult out{std::move(unaware), std::move(repaired.ranking), std::move(repaired.trace), {}, {}, {}};
  out.pd_loss_unaware = pd_loss(rankings, out.unaware);
  out.pd_loss_fair = pd_loss(rankings, out.fair);
  out.price_of_fairness = out.pd_loss_fair - out.pd_loss_unaware;
  return out;
}

KemenySolution brute_force_fair_kemeny(const RankingSet& rankings, const FairnessSpec& spec,
                                       const GroupIndex& index) {
  const std::size_t n = rankings.candidate_count();
  if (n > 9) throw Error(ErrorKind::kInstanceTooLarge, "brute force is limited to 9 candidates");
  if (n != index.candidate_count())
    throw Error(ErrorKind::kInconsistentCandidateSet, "ranking size differs from group index");
  spec.validate();
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::optional<Ranking> best;
  std::int64_t best_objective = 0;
  std::uint64_t visited = 0;
  do {
    ++visited;
    Ranking candidate(order);
    std::int64_t objective = 0;
    for (std::size_t i = 0; i < rankings.size(); ++i)
      objective += rankings.weights()[i] * kendall_tau(candidate, rankings[i]);
    if (best && objective >= best_objective) continue;
    if (!mani_rank_check(candidate, spec, index).satisfied) continue;
    best = std::move(candidate);
    best_objective = objective;
  } while (std::next_permutation(order.begin(), order.end()));
  if (!best) throw Error(ErrorKind::kInfeasible, "no permutation satisfies the fairness thresholds");
  return KemenySolution{std::move(*best), best_objective, true, visited};
}

}  // namespace manirank
