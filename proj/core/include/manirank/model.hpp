#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace manirank {

/// Dense candidate index in CandidateTable order.
using Index = std::uint32_t;

/// Candidates and their categorical protected-attribute values. Ids are opaque
/// strings; everything downstream works on dense indexes in declared order.
class CandidateTable {
 public:
  CandidateTable(std::vector<std::string> ids, std::vector<std::string> attributes,
                 std::vector<std::vector<std::string>> values);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(Index c) const { return ids_.at(c); }
  std::optional<Index> find(std::string_view id) const;

  const std::vector<std::string>& attributes() const { return attributes_; }
  std::optional<std::size_t> attribute_position(std::string_view name) const;
  const std::string& value(Index c, std::size_t attribute) const { return values_.at(c).at(attribute); }
  const std::vector<std::vector<std::string>>& values() const { return values_; }

  friend bool operator==(const CandidateTable&, const CandidateTable&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> attributes_;
  std::vector<std::vector<std::string>> values_;
  std::unordered_map<std::string, Index> lookup_;
};

struct Group {
  std::string label;                // attribute value, or values joined by '|'
  std::vector<std::string> values;  // one per attribute spanned by the group
  std::vector<Index> members;       // ascending
  std::int64_t mixed_pairs = 0;     // |G| (n - |G|)

  std::size_t size() const { return members.size(); }
};

/// A partition of the candidates: either one protected attribute or the
/// intersection of several. Groups are sorted by value (tuple) ascending.
struct GroupEntity {
  std::string name;
  bool is_intersection = false;
  std::vector<Group> groups;
  std::vector<std::uint32_t> group_of;  // candidate -> group position

  std::size_t num_groups() const { return groups.size(); }
};

inline constexpr std::string_view kIntersectionName = "intersection";

class GroupIndex {
 public:
  GroupIndex(std::size_t n, std::vector<GroupEntity> attributes, GroupEntity intersection,
             std::vector<std::string> intersection_attributes, std::uint64_t intersection_domain_size,
             std::vector<std::string> warnings);

  std::size_t candidate_count() const { return n_; }
  const std::vector<GroupEntity>& attributes() const { return attributes_; }
  /// Throws UnknownAttribute.
  const GroupEntity& attribute(std::string_view name) const;
  const GroupEntity& intersection() const { return intersection_; }
  const std::vector<std::string>& intersection_attributes() const { return intersection_attributes_; }
  /// Product of the observed domain sizes of the intersection attributes.
  std::uint64_t intersection_domain_size() const { return intersection_domain_size_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::size_t n_;
  std::vector<GroupEntity> attributes_;
  GroupEntity intersection_;
  std::vector<std::string> intersection_attributes_;
  std::uint64_t intersection_domain_size_;
  std::vector<std::string> warnings_;
};

/// `intersection_attrs == std::nullopt` means every declared attribute.
/// Throws UnknownAttribute for undeclared names.
GroupIndex build_group_index(const CandidateTable& table,
                             const std::optional<std::vector<std::string>>& intersection_attrs = std::nullopt);

/// A strict total order over candidates 0..n-1, best first.
class Ranking {
 public:
  Ranking() = default;
  /// Throws InvalidInput unless `order` is a permutation of 0..n-1.
  explicit Ranking(std::vector<Index> order);

  static Ranking identity(std::size_t n);

  std::size_t size() const { return order_.size(); }
  std::span<const Index> order() const { return order_; }
  Index at(std::size_t position) const { return order_[position]; }
  std::size_t position(Index candidate) const { return position_[candidate]; }
  bool precedes(Index a, Index b) const { return position_[a] < position_[b]; }

  void swap_positions(std::size_t i, std::size_t j);

  friend bool operator==(const Ranking& a, const Ranking& b) { return a.order_ == b.order_; }

 private:
  std::vector<Index> order_;
  std::vector<std::uint32_t> position_;
};

/// Base rankings with optional positive integer weights (default 1 each).
class RankingSet {
 public:
  explicit RankingSet(std::vector<Ranking> rankings, std::vector<std::int64_t> weights = {});

  std::size_t size() const { return rankings_.size(); }
  std::size_t candidate_count() const { return rankings_.front().size(); }
  const std::vector<Ranking>& rankings() const { return rankings_; }
  const Ranking& operator[](std::size_t i) const { return rankings_[i]; }
  const std::vector<std::int64_t>& weights() const { return weights_; }
  std::int64_t total_weight() const { return total_weight_; }

  friend bool operator==(const RankingSet&, const RankingSet&) = default;

 private:
  std::vector<Ranking> rankings_;
  std::vector<std::int64_t> weights_;
  std::int64_t total_weight_ = 0;
};

/// W[a][b] = total weight of base rankings placing b ahead of a, i.e. the
/// number of disagreements paid when a consensus puts a ahead of b.
class PrecedenceMatrix {
 public:
  PrecedenceMatrix(std::size_t n, std::vector<std::int64_t> entries, std::int64_t total_weight);

  std::size_t size() const { return n_; }
  std::int64_t operator()(Index a, Index b) const { return entries_[a * n_ + b]; }
  std::int64_t total_weight() const { return total_weight_; }
  std::span<const std::int64_t> row(Index a) const { return {entries_.data() + a * n_, n_}; }

  /// Sum of W[a][b] over all pairs with a ahead of b in `ranking`.
  std::int64_t disagreement(const Ranking& ranking) const;

 private:
  std::size_t n_;
  std::vector<std::int64_t> entries_;
  std::int64_t total_weight_;
};

/// Throws InconsistentCandidateSet if rankings disagree on the candidate count.
PrecedenceMatrix build_precedence_matrix(const RankingSet& rankings);

/// n(n-1)/2
std::int64_t total_pair_count(std::int64_t n);
/// |G| (n - |G|)
std::int64_t mixed_pair_count(std::int64_t group_size, std::int64_t n);
/// Pairs whose members fall in different blocks of a partition with the given block sizes.
std::int64_t total_mixed_pair_count(std::span<const std::int64_t> group_sizes, std::int64_t n);
std::int64_t total_mixed_pair_count(const GroupEntity& entity, std::int64_t n);

}  // namespace manirank
