#include "manirank/metrics.hpp"

#include <algorithm>

#include "manirank/errors.hpp"

namespace manirank {

Rational FairnessSpec::attribute_threshold(std::string_view attribute) const {
  auto it = delta_per_attribute.find(attribute);
  return it == delta_per_attribute.end() ? delta_default : it->second;
}

void FairnessSpec::validate() const {
  auto check = [](const Rational& d, const std::string& what) {
    if (d < Rational(0) || d > Rational(1))
      throw Error(ErrorKind::kInvalidInput, what + " threshold " + d.to_decimal() + " outside [0, 1]");
  };
  check(delta_default, "default");
  for (const auto& [name, d] : delta_per_attribute) check(d, "attribute '" + name + "'");
  if (delta_intersection) check(*delta_intersection, "intersection");
}

const EntityReport* FairnessReport::find(std::string_view name) const {
  for (const auto& e : entities)
    if (e.name == name) return &e;
  return nullptr;
}

std::vector<std::int64_t> favored_counts(const Ranking& ranking, const GroupEntity& entity) {
  const std::size_t n = ranking.size();
  if (entity.group_of.size() != n)
    throw Error(ErrorKind::kInconsistentCandidateSet, "ranking size differs from group index");
  std::vector<std::int64_t> favored(entity.num_groups(), 0);
  std::vector<std::int64_t> seen_below(entity.num_groups(), 0);
  auto order = ranking.order();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = n - 1 - k;  // walk bottom-up
    const auto g = entity.group_of[order[p]];
    favored[g] += static_cast<std::int64_t>(k) - seen_below[g];
    ++seen_below[g];
  }
  return favored;
}

Score fpr(const Ranking& ranking, std::span<const Index> group, const GroupIndex& index) {
  const std::size_t n = index.candidate_count();
  if (ranking.size() != n) throw Error(ErrorKind::kInconsistentCandidateSet, "ranking size differs from group index");
  std::vector<char> member(n, 0);
  std::size_t size = 0;
  for (Index c : group) {
    if (c >= n) throw Error(ErrorKind::kInvalidInput, "group member outside candidate range");
    if (!member[c]) ++size;
    member[c] = 1;
  }
  if (size == 0 || size == n) throw Error(ErrorKind::kDegenerateGroup, "FPR undefined for an empty or full group");
  std::int64_t favored = 0;
  std::int64_t outsiders_below = 0;
  auto order = ranking.order();
  for (std::size_t k = n; k-- > 0;) {
    if (member[order[k]])
      favored += outsiders_below;
    else
      ++outsiders_below;
  }
  return Score(favored, mixed_pair_count(static_cast<std::int64_t>(size), static_cast<std::int64_t>(n)));
}

namespace {

Score parity_from_counts(const GroupEntity& entity, std::span<const std::int64_t> favored) {
  Score hi(favored[0], entity.groups[0].mixed_pairs);
  Score lo = hi;
  for (std::size_t g = 1; g < entity.num_groups(); ++g) {
    Score f(favored[g], entity.groups[g].mixed_pairs);
    if (f > hi) hi = f;
    if (f < lo) lo = f;
  }
  return hi - lo;
}

}  // namespace

Score rank_parity(const Ranking& ranking, const GroupEntity& entity) {
  if (entity.num_groups() < 2)
    throw Error(entity.is_intersection ? ErrorKind::kDegenerateIntersection : ErrorKind::kDegenerateAttribute,
                "'" + entity.name + "' has fewer than two non-empty groups");
  const auto favored = favored_counts(ranking, entity);
  return parity_from_counts(entity, favored);
}

Score arp(const Ranking& ranking, std::string_view attribute, const GroupIndex& index) {
  return rank_parity(ranking, index.attribute(attribute));
}

Score irp(const Ranking& ranking, const GroupIndex& index) { return rank_parity(ranking, index.intersection()); }

FairnessReport mani_rank_check(const Ranking& ranking, const FairnessSpec& spec, const GroupIndex& index) {
  spec.validate();
  FairnessReport report;
  report.warnings = index.warnings();
  auto evaluate = [&](const GroupEntity& entity, bool constrained, Rational threshold) {
    EntityReport er;
    er.name = entity.name;
    er.is_intersection = entity.is_intersection;
    er.constrained = constrained;
    er.threshold = threshold;
    const auto favored = favored_counts(ranking, entity);
    for (std::size_t g = 0; g < entity.num_groups(); ++g) {
      const auto& group = entity.groups[g];
      GroupScore gs;
      gs.label = group.label;
      gs.size = group.size();
      gs.favored = favored[g];
      gs.mixed_pairs = group.mixed_pairs;
      gs.fpr = group.mixed_pairs > 0 ? Score(favored[g], group.mixed_pairs) : Score(0);
      er.groups.push_back(std::move(gs));
    }
    er.evaluated = entity.num_groups() >= 2;
    if (er.evaluated) er.score = parity_from_counts(entity, favored);
    report.entities.push_back(std::move(er));
  };
  for (const auto& entity : index.attributes())
    evaluate(entity, spec.constrain_attributes, spec.attribute_threshold(entity.name));
  evaluate(index.intersection(), spec.constrain_intersection, spec.intersection_threshold());

  std::optional<Rational> worst_excess;
  for (const auto& er : report.entities) {
    if (er.within_threshold()) continue;
    report.satisfied = false;
    const Rational excess = er.score - er.threshold;
    if (!worst_excess || excess > *worst_excess) {
      worst_excess = excess;
      report.max_violation = Violation{er.name, er.score};
    }
  }
  return report;
}

namespace {

std::int64_t count_inversions(std::vector<std::uint32_t>& values, std::vector<std::uint32_t>& scratch,
                              std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t count = count_inversions(values, scratch, lo, mid) + count_inversions(values, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (values[j] < values[i]) {
      count += static_cast<std::int64_t>(mid - i);
      scratch[k++] = values[j++];
    } else {
      scratch[k++] = values[i++];
    }
  }
  while (i < mid) scratch[k++] = values[i++];
  while (j < hi) scratch[k++] = values[j++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            values.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

}  // namespace

std::int64_t kendall_tau(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kInconsistentCandidateSet, "Kendall tau needs rankings over the same candidates");
  std::vector<std::uint32_t> positions(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) positions[i] = static_cast<std::uint32_t>(b.position(a.at(i)));
  std::vector<std::uint32_t> scratch(a.size());
  return count_inversions(positions, scratch, 0, positions.size());
}

Score pd_loss(const RankingSet& rankings, const Ranking& consensus) {
  if (consensus.size() != rankings.candidate_count())
    throw Error(ErrorKind::kInconsistentCandidateSet, "consensus and base rankings cover different candidates");
  std::int64_t total = 0;
  for (const auto& r : rankings.rankings()) total += kendall_tau(consensus, r);
  const auto n = static_cast<std::int64_t>(consensus.size());
  return Score(total, total_pair_count(n) * static_cast<std::int64_t>(rankings.size()));
}

Score pd_loss(const PrecedenceMatrix& precedence, const Ranking& consensus) {
  const auto n = static_cast<std::int64_t>(precedence.size());
  return Score(precedence.disagreement(consensus), total_pair_count(n) * precedence.total_weight());
}

Rational price_of_fairness(const RankingSet& rankings, const Ranking& fair, const Ranking& unaware) {
  return pd_loss(rankings, fair) - pd_loss(rankings, unaware);
}

}  // namespace manirank
