#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "manirank/metrics.hpp"
#include "manirank/model.hpp"
#include "manirank/rational.hpp"

namespace manirank {

/// Mixes a base seed with a stream index (splitmix64 finalizer on both), so
/// every ranking or experiment cell gets an independent, order-free stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// std::mt19937_64 plus portable conversions; the standard distributions are
/// implementation-defined, these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, bound), bound > 0, rejection-sampled.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

struct MallowsConfig {
  Ranking modal;
  double theta = 0.0;
  std::size_t num_rankings = 1;
  std::uint64_t seed = 0;
};

/// Repeated insertion: the i-th modal candidate lands k slots above the end of
/// the partial order with probability proportional to exp(-theta k), k <= i.
/// Ranking i is drawn from its own stream derive_seed(seed, i).
class MallowsSampler {
 public:
  /// Throws InvalidInput for negative or non-finite theta, or zero rankings.
  explicit MallowsSampler(MallowsConfig config);

  const MallowsConfig& config() const { return config_; }
  std::size_t candidate_count() const { return config_.modal.size(); }

  Ranking sample(std::uint64_t i) const;
  /// Same draw as sample(i), written into a reusable buffer.
  void sample_into(std::uint64_t i, std::vector<Index>& out) const;

 private:
  std::size_t displacement(std::size_t slots, Rng& rng) const;

  MallowsConfig config_;
  std::vector<double> powers_;  // q^t, q = exp(-theta)
};

RankingSet sample_mallows(const MallowsConfig& config);

struct Window {
  Rational target;
  Rational tolerance;

  Rational lower() const;  // clamped to [0, 1]
  Rational upper() const;
  bool contains(const Score& score) const { return lower() <= score && score <= upper(); }
};

struct ScenarioTargets {
  std::map<std::string, Window, std::less<>> attributes;
  std::optional<Window> intersection;
};

/// ARP target for every attribute of `index` plus an IRP target.
ScenarioTargets uniform_targets(const GroupIndex& index, Window arp, Window irp);

/// "low-fair" 0.70/0.70/1.00, "medium-fair" 0.50/0.50/0.75, "high-fair"
/// 0.30/0.30/0.54, tolerance 0.05. Throws InvalidInput for other names.
ScenarioTargets named_scenario(std::string_view name, const GroupIndex& index,
                               Rational tolerance = Rational::parse_decimal("0.05"));

struct ScenarioOptions {
  std::size_t restarts = 50;
  /// Swap proposals per restart, scaled by n.
  std::size_t steps_per_candidate = 400;
};

/// Seeded local search over position swaps for a modal ranking whose measured
/// scores sit inside every window. Starts from the block order that sorts
/// candidates by their normalized group positions. Throws
/// ScenarioUnreachable when the restart budget runs out, DegenerateAttribute
/// or DegenerateIntersection when a targeted entity has fewer than two groups.
Ranking build_scenario(const CandidateTable& table, const GroupIndex& index, const ScenarioTargets& targets,
                       std::uint64_t seed, const ScenarioOptions& options = {});

/// Full cross product of attribute values with `per_cell` candidates each.
/// Values are "<attr lowercased><k>", ids "c<k>", cells in lexicographic order.
CandidateTable synthetic_population(const std::vector<std::pair<std::string, std::size_t>>& attributes,
                                    std::size_t per_cell);

}  // namespace manirank
