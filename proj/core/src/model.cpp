#include "manirank/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "manirank/errors.hpp"

namespace manirank {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "InvalidInput";
    case ErrorKind::kUnknownAttribute: return "UnknownAttribute";
    case ErrorKind::kInconsistentCandidateSet: return "InconsistentCandidateSet";
    case ErrorKind::kDegenerateGroup: return "DegenerateGroup";
    case ErrorKind::kDegenerateAttribute: return "DegenerateAttribute";
    case ErrorKind::kDegenerateIntersection: return "DegenerateIntersection";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kRepairStalled: return "RepairStalled";
    case ErrorKind::kBudgetExceeded: return "BudgetExceeded";
    case ErrorKind::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::kScenarioUnreachable: return "ScenarioUnreachable";
  }
  return "Unknown";
}

CandidateTable::CandidateTable(std::vector<std::string> ids, std::vector<std::string> attributes,
                               std::vector<std::vector<std::string>> values)
    : ids_(std::move(ids)), attributes_(std::move(attributes)), values_(std::move(values)) {
  if (ids_.size() < 2) throw Error(ErrorKind::kInvalidInput, "candidate table needs at least 2 candidates");
  if (values_.size() != ids_.size())
    throw Error(ErrorKind::kInvalidInput, "candidate table: one value row per candidate required");
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (attributes_[a].empty()) throw Error(ErrorKind::kInvalidInput, "empty attribute name");
    for (std::size_t b = 0; b < a; ++b)
      if (attributes_[a] == attributes_[b])
        throw Error(ErrorKind::kInvalidInput, "duplicate attribute '" + attributes_[a] + "'");
  }
  lookup_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw Error(ErrorKind::kInvalidInput, "empty candidate id");
    if (values_[i].size() != attributes_.size())
      throw Error(ErrorKind::kInvalidInput,
                  "candidate '" + ids_[i] + "' must have exactly one value per attribute");
    if (!lookup_.emplace(ids_[i], static_cast<Index>(i)).second)
      throw Error(ErrorKind::kInvalidInput, "duplicate candidate id '" + ids_[i] + "'");
  }
}

std::optional<Index> CandidateTable::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CandidateTable::attribute_position(std::string_view name) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), name);
  if (it == attributes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - attributes_.begin());
}

namespace {

GroupEntity make_entity(const CandidateTable& table, std::string name, bool is_intersection,
                        const std::vector<std::size_t>& attribute_positions) {
  const std::size_t n = table.size();
  std::map<std::vector<std::string>, std::vector<Index>> cells;
  for (Index c = 0; c < n; ++c) {
    std::vector<std::string> key;
    key.reserve(attribute_positions.size());
    for (std::size_t a : attribute_positions) key.push_back(table.value(c, a));
    cells[std::move(key)].push_back(c);
  }
  GroupEntity entity;
  entity.name = std::move(name);
  entity.is_intersection = is_intersection;
  entity.group_of.assign(n, 0);
  for (auto& [values, members] : cells) {
    Group g;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) g.label.push_back('|');
      g.label += values[i];
    }
    g.values = values;
    g.members = std::move(members);
    g.mixed_pairs = mixed_pair_count(static_cast<std::int64_t>(g.members.size()), static_cast<std::int64_t>(n));
    for (Index c : g.members) entity.group_of[c] = static_cast<std::uint32_t>(entity.groups.size());
    entity.groups.push_back(std::move(g));
  }
  return entity;
}

}  // namespace

GroupIndex::GroupIndex(std::size_t n, std::vector<GroupEntity> attributes, GroupEntity intersection,
                       std::vector<std::string> intersection_attributes,
                       std::uint64_t intersection_domain_size, std::vector<std::string> warnings)
    : n_(n),
      attributes_(std::move(attributes)),
      intersection_(std::move(intersection)),
      intersection_attributes_(std::move(intersection_attributes)),
      intersection_domain_size_(intersection_domain_size),
      warnings_(std::move(warnings)) {}

const GroupEntity& GroupIndex::attribute(std::string_view name) const {
  for (const auto& e : attributes_)
    if (e.name == name) return e;
  throw Error(ErrorKind::kUnknownAttribute, "unknown attribute '" + std::string(name) + "'");
}

GroupIndex build_group_index(const CandidateTable& table,
                             const std::optional<std::vector<std::string>>& intersection_attrs) {
  std::vector<GroupEntity> attributes;
  std::vector<std::string> warnings;
  for (std::size_t a = 0; a < table.attributes().size(); ++a) {
    attributes.push_back(make_entity(table, table.attributes()[a], false, {a}));
    if (attributes.back().num_groups() < 2)
      warnings.push_back("attribute '" + table.attributes()[a] +
                         "' has a single observed value and is excluded from ARP evaluation");
  }

  std::vector<std::string> names = intersection_attrs.value_or(table.attributes());
  std::vector<std::size_t> positions;
  std::uint64_t domain = 1;
  for (const auto& name : names) {
    auto pos = table.attribute_position(name);
    if (!pos) throw Error(ErrorKind::kUnknownAttribute, "unknown intersection attribute '" + name + "'");
    if (std::find(positions.begin(), positions.end(), *pos) != positions.end())
      throw Error(ErrorKind::kInvalidInput, "intersection attribute '" + name + "' listed twice");
    positions.push_back(*pos);
    domain *= attributes[*pos].num_groups();
  }
  GroupEntity inter = make_entity(table, std::string(kIntersectionName), true, positions);
  if (!positions.empty() && inter.num_groups() < 2)
    warnings.push_back("intersection has a single non-empty group and is excluded from IRP evaluation");
  return GroupIndex(table.size(), std::move(attributes), std::move(inter), std::move(names), domain,
                    std::move(warnings));
}

Ranking::Ranking(std::vector<Index> order) : order_(std::move(order)) {
  const std::size_t n = order_.size();
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  position_.assign(n, kUnset);
  for (std::size_t p = 0; p < n; ++p) {
    const Index c = order_[p];
    if (c >= n) throw Error(ErrorKind::kInvalidInput, "ranking references candidate outside 0..n-1");
    if (position_[c] != kUnset) throw Error(ErrorKind::kInvalidInput, "ranking lists a candidate twice");
    position_[c] = static_cast<std::uint32_t>(p);
  }
}

Ranking Ranking::identity(std::size_t n) {
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  return Ranking(std::move(order));
}

void Ranking::swap_positions(std::size_t i, std::size_t j) {
  std::swap(order_[i], order_[j]);
  position_[order_[i]] = static_cast<std::uint32_t>(i);
  position_[order_[j]] = static_cast<std::uint32_t>(j);
}

RankingSet::RankingSet(std::vector<Ranking> rankings, std::vector<std::int64_t> weights)
    : rankings_(std::move(rankings)), weights_(std::move(weights)) {
  if (rankings_.empty()) throw Error(ErrorKind::kInvalidInput, "ranking set must not be empty");
  const std::size_t n = rankings_.front().size();
  for (std::size_t i = 0; i < rankings_.size(); ++i)
    if (rankings_[i].size() != n)
      throw Error(ErrorKind::kInconsistentCandidateSet,
                  "ranking " + std::to_string(i) + " covers a different candidate set");
  if (weights_.empty()) weights_.assign(rankings_.size(), 1);
  if (weights_.size() != rankings_.size())
    throw Error(ErrorKind::kInvalidInput, "one weight per ranking required");
  for (auto w : weights_) {
    if (w <= 0) throw Error(ErrorKind::kInvalidInput, "ranking weights must be positive");
    total_weight_ += w;
  }
}

PrecedenceMatrix::PrecedenceMatrix(std::size_t n, std::vector<std::int64_t> entries, std::int64_t total_weight)
    : n_(n), entries_(std::move(entries)), total_weight_(total_weight) {
  if (entries_.size() != n_ * n_) throw Error(ErrorKind::kInvalidInput, "precedence matrix must be n x n");
}

std::int64_t PrecedenceMatrix::disagreement(const Ranking& ranking) const {
  if (ranking.size() != n_)
    throw Error(ErrorKind::kInconsistentCandidateSet, "ranking size differs from precedence matrix");
  std::int64_t total = 0;
  auto order = ranking.order();
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = row(order[i]);
    for (std::size_t j = i + 1; j < n_; ++j) total += r[order[j]];
  }
  return total;
}

PrecedenceMatrix build_precedence_matrix(const RankingSet& rankings) {
  const std::size_t n = rankings.candidate_count();
  std::vector<std::int64_t> w(n * n, 0);
  for (std::size_t r = 0; r < rankings.size(); ++r) {
    const auto& ranking = rankings[r];
    if (ranking.size() != n)
      throw Error(ErrorKind::kInconsistentCandidateSet, "ranking " + std::to_string(r) + " has wrong size");
    const std::int64_t weight = rankings.weights()[r];
    auto order = ranking.order();
    // every later candidate a is preceded by every earlier candidate b
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = order[i];
      for (std::size_t j = i + 1; j < n; ++j) w[order[j] * n + b] += weight;
    }
  }
  return PrecedenceMatrix(n, std::move(w), rankings.total_weight());
}

std::int64_t total_pair_count(std::int64_t n) { return n * (n - 1) / 2; }

std::int64_t mixed_pair_count(std::int64_t group_size, std::int64_t n) { return group_size * (n - group_size); }

std::int64_t total_mixed_pair_count(std::span<const std::int64_t> group_sizes, std::int64_t n) {
  std::int64_t within = 0;
  for (auto s : group_sizes) within += total_pair_count(s);
  return total_pair_count(n) - within;
}

std::int64_t total_mixed_pair_count(const GroupEntity& entity, std::int64_t n) {
  std::vector<std::int64_t> sizes;
  for (const auto& g : entity.groups) sizes.push_back(static_cast<std::int64_t>(g.size()));
  return total_mixed_pair_count(sizes, n);
}

}  // namespace manirank
