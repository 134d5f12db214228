#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "manirank/model.hpp"
#include "manirank/rational.hpp"

namespace manirank {

/// Fairness thresholds. Per-attribute and intersection overrides fall back to
/// `delta_default`. The two `constrain_*` switches exist for ablations that
/// still want every score measured but only some of them enforced.
struct FairnessSpec {
  Rational delta_default{0};
  std::map<std::string, Rational, std::less<>> delta_per_attribute;
  std::optional<Rational> delta_intersection;
  /// Attributes spanned by the intersection; nullopt means all of them.
  std::optional<std::vector<std::string>> intersection_attrs;
  bool constrain_attributes = true;
  bool constrain_intersection = true;

  static FairnessSpec uniform(Rational delta) {
    FairnessSpec spec;
    spec.delta_default = delta;
    return spec;
  }

  Rational attribute_threshold(std::string_view attribute) const;
  Rational intersection_threshold() const { return delta_intersection.value_or(delta_default); }
  /// Throws InvalidInput when a threshold lies outside [0, 1].
  void validate() const;
};

struct GroupScore {
  std::string label;
  std::size_t size = 0;
  std::int64_t favored = 0;      // mixed pairs won by the group
  std::int64_t mixed_pairs = 0;  // |G| (n - |G|)
  Score fpr;
};

struct EntityReport {
  std::string name;
  bool is_intersection = false;
  bool constrained = false;
  bool evaluated = false;  // false when fewer than two non-empty groups exist
  Rational threshold;
  Score score;  // ARP or IRP; zero when not evaluated
  std::vector<GroupScore> groups;

  bool within_threshold() const { return !constrained || !evaluated || score <= threshold; }
};

struct Violation {
  std::string entity;
  Score score;
};

struct FairnessReport {
  std::vector<EntityReport> entities;  // attributes in declared order, then the intersection
  bool satisfied = true;
  std::optional<Violation> max_violation;
  std::vector<std::string> warnings;

  const EntityReport* find(std::string_view name) const;
};

/// Mixed pairs won by each group of `entity`, one O(n) pass.
std::vector<std::int64_t> favored_counts(const Ranking& ranking, const GroupEntity& entity);

/// Favored Pair Representation of an arbitrary candidate subset.
/// Throws DegenerateGroup when the subset is empty or the whole population.
Score fpr(const Ranking& ranking, std::span<const Index> group, const GroupIndex& index);

/// max FPR - min FPR over the entity's groups. Throws DegenerateAttribute /
/// DegenerateIntersection with fewer than two groups.
Score rank_parity(const Ranking& ranking, const GroupEntity& entity);
Score arp(const Ranking& ranking, std::string_view attribute, const GroupIndex& index);
Score irp(const Ranking& ranking, const GroupIndex& index);

FairnessReport mani_rank_check(const Ranking& ranking, const FairnessSpec& spec, const GroupIndex& index);

/// Number of discordant pairs, O(n log n). Throws InconsistentCandidateSet.
std::int64_t kendall_tau(const Ranking& a, const Ranking& b);

/// Sum of Kendall tau distances over (unweighted) base rankings divided by
/// n(n-1)/2 * |R|.
Score pd_loss(const RankingSet& rankings, const Ranking& consensus);
/// Same quantity from a precedence matrix: disagreement / (n(n-1)/2 * total weight).
Score pd_loss(const PrecedenceMatrix& precedence, const Ranking& consensus);

/// PD loss of the fair ranking minus PD loss of the fairness-unaware one.
Rational price_of_fairness(const RankingSet& rankings, const Ranking& fair, const Ranking& unaware);

}  // namespace manirank
