#include "manirank/consensus.hpp"

#include <algorithm>
#include <numeric>

#include "manirank/errors.hpp"

namespace manirank {

Ranking order_by_descending(std::span<const std::int64_t> scores) {
  std::vector<Index> order(scores.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores[a] > scores[b]; });
  return Ranking(std::move(order));
}

KemenySolution kemeny_exact(const KemenySolver& solver, const PrecedenceMatrix& precedence) {
  auto outcome = solver.solve(borda(precedence));
  KemenySolution sol;
  sol.ranking = std::move(*outcome.ranking);  // an unconstrained incumbent always exists
  sol.objective = outcome.objective;
  sol.optimal = outcome.exhausted;
  sol.nodes_explored = outcome.nodes_explored;
  return sol;
}

KemenySolution kemeny_exact(const PrecedenceMatrix& precedence, const KemenyOptions& options) {
  const KemenySolver solver(precedence, options);
  return kemeny_exact(solver, precedence);
}

void BordaAccumulator::add(std::span<const Index> order, std::int64_t weight) {
  const std::size_t n = points_.size();
  if (order.size() != n) throw Error(ErrorKind::kInconsistentCandidateSet, "ranking size differs from Borda tally");
  for (std::size_t p = 0; p < n; ++p) points_[order[p]] += weight * static_cast<std::int64_t>(n - 1 - p);
}

Ranking BordaAccumulator::ranking() const { return order_by_descending(points_); }

Ranking borda(const RankingSet& rankings) {
  BordaAccumulator tally(rankings.candidate_count());
  for (std::size_t i = 0; i < rankings.size(); ++i) tally.add(rankings[i], rankings.weights()[i]);
  return tally.ranking();
}

Ranking borda(const PrecedenceMatrix& precedence) {
  const std::size_t n = precedence.size();
  std::vector<std::int64_t> points(n, 0);
  for (Index b = 0; b < n; ++b) {
    const auto row = precedence.row(b);
    for (Index c = 0; c < n; ++c) points[c] += row[c];
  }
  return order_by_descending(points);
}

Ranking copeland(const PrecedenceMatrix& precedence) {
  const std::size_t n = precedence.size();
  std::vector<std::int64_t> wins(n, 0);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a)
      if (a != b && precedence(a, b) >= precedence(b, a)) ++wins[b];
  return order_by_descending(wins);
}

std::vector<std::int64_t> schulze_strengths(const PrecedenceMatrix& precedence) {
  const std::size_t n = precedence.size();
  // p[a][b] starts as the number of rankings preferring a over b, which is W[b][a]
  std::vector<std::int64_t> p(n * n, 0);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      if (a != b) p[a * n + b] = precedence(b, a);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const std::int64_t ik = p[i * n + k];
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const std::int64_t via = std::min(ik, p[k * n + j]);
        if (via > p[i * n + j]) p[i * n + j] = via;
      }
    }
  return p;
}

Ranking schulze(const PrecedenceMatrix& precedence) {
  const std::size_t n = precedence.size();
  const auto p = schulze_strengths(precedence);
  std::vector<std::int64_t> wins(n, 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && p[a * n + b] > p[b * n + a]) ++wins[a];
  return order_by_descending(wins);
}

std::vector<Rational> fairness_key(const Ranking& ranking, const FairnessSpec& spec, const GroupIndex& index) {
  const FairnessReport report = mani_rank_check(ranking, spec, index);
  std::vector<Rational> key(1, Rational(0));
  auto counted = [](const EntityReport& e) { return e.constrained && e.evaluated; };
  const EntityReport& inter = report.entities.back();
  key.push_back(counted(inter) ? inter.score : Rational(0));
  for (const auto& e : report.entities) {
    if (e.is_intersection) continue;
    key.push_back(counted(e) ? e.score : Rational(0));
  }
  for (const auto& e : report.entities)
    if (counted(e) && e.score > key[0]) key[0] = e.score;
  return key;
}

std::size_t pick_fairest_index(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index) {
  std::size_t best = 0;
  auto best_key = fairness_key(rankings[0], spec, index);
  for (std::size_t i = 1; i < rankings.size(); ++i) {
    auto key = fairness_key(rankings[i], spec, index);
    if (key < best_key) {
      best = i;
      best_key = std::move(key);
    }
  }
  return best;
}

Ranking pick_fairest_perm(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index) {
  return rankings[pick_fairest_index(rankings, spec, index)];
}

std::vector<std::int64_t> fairness_weights(const RankingSet& rankings, const FairnessSpec& spec,
                                           const GroupIndex& index) {
  const std::size_t m = rankings.size();
  std::vector<std::vector<Rational>> keys;
  keys.reserve(m);
  for (const auto& r : rankings.rankings()) keys.push_back(fairness_key(r, spec, index));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // least fair (largest key) first
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[b] < keys[a]; });
  std::vector<std::int64_t> weights(m, 0);
  for (std::size_t rank = 0; rank < m; ++rank) weights[order[rank]] = static_cast<std::int64_t>(rank + 1);
  return weights;
}

KemenySolution kemeny_weighted(const RankingSet& rankings, const FairnessSpec& spec, const GroupIndex& index,
                               const KemenyOptions& options) {
  const RankingSet weighted(rankings.rankings(), fairness_weights(rankings, spec, index));
  return kemeny_exact(build_precedence_matrix(weighted), options);
}

}  // namespace manirank
