#include "manirank/mallows.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "manirank/errors.hpp"

namespace manirank {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t Rng::below(std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do x = next();
  while (x >= limit);
  return x % bound;
}

MallowsSampler::MallowsSampler(MallowsConfig config) : config_(std::move(config)) {
  if (!std::isfinite(config_.theta) || config_.theta < 0.0)
    throw Error(ErrorKind::kInvalidInput, "theta must be a finite non-negative number");
  if (config_.num_rankings == 0) throw Error(ErrorKind::kInvalidInput, "num_rankings must be positive");
  const std::size_t n = config_.modal.size();
  powers_.resize(n + 1);
  const double q = std::exp(-config_.theta);
  powers_[0] = 1.0;
  for (std::size_t t = 1; t <= n; ++t) powers_[t] = powers_[t - 1] * q;
}

std::size_t MallowsSampler::displacement(std::size_t slots, Rng& rng) const {
  if (config_.theta == 0.0) return static_cast<std::size_t>(rng.below(slots));
  // truncated geometric by inverse CDF: P(k <= K) = (1 - q^(K+1)) / (1 - q^slots)
  const double target = rng.uniform() * (1.0 - powers_[slots]);
  const double bar = 1.0 - target;
  const auto first = powers_.begin() + 1;
  const auto it = std::upper_bound(first, powers_.begin() + static_cast<std::ptrdiff_t>(slots) + 1, bar,
                                   [](double value, double p) { return p < value; });
  const auto t = static_cast<std::size_t>(it - powers_.begin());
  return std::min(t, slots) - 1;
}

void MallowsSampler::sample_into(std::uint64_t i, std::vector<Index>& out) const {
  Rng rng(derive_seed(config_.seed, i));
  const std::size_t n = config_.modal.size();
  out.clear();
  out.reserve(n);
  for (std::size_t item = 0; item < n; ++item) {
    const std::size_t k = displacement(item + 1, rng);
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(item - k), config_.modal.at(item));
  }
}

Ranking MallowsSampler::sample(std::uint64_t i) const {
  std::vector<Index> order;
  sample_into(i, order);
  return Ranking(std::move(order));
}

RankingSet sample_mallows(const MallowsConfig& config) {
  const MallowsSampler sampler(config);
  std::vector<Ranking> rankings;
  rankings.reserve(config.num_rankings);
  for (std::size_t i = 0; i < config.num_rankings; ++i) rankings.push_back(sampler.sample(i));
  return RankingSet(std::move(rankings));
}

Rational Window::lower() const {
  const Rational lo = target - tolerance;
  return lo < Rational(0) ? Rational(0) : lo;
}

Rational Window::upper() const {
  const Rational hi = target + tolerance;
  return hi > Rational(1) ? Rational(1) : hi;
}

ScenarioTargets uniform_targets(const GroupIndex& index, Window arp, Window irp) {
  ScenarioTargets targets;
  for (const auto& e : index.attributes()) targets.attributes.emplace(e.name, arp);
  targets.intersection = irp;
  return targets;
}

ScenarioTargets named_scenario(std::string_view name, const GroupIndex& index, Rational tolerance) {
  auto d = [](const char* s) { return Rational::parse_decimal(s); };
  if (name == "low-fair") return uniform_targets(index, {d("0.70"), tolerance}, {d("1.00"), tolerance});
  if (name == "medium-fair") return uniform_targets(index, {d("0.50"), tolerance}, {d("0.75"), tolerance});
  if (name == "high-fair") return uniform_targets(index, {d("0.30"), tolerance}, {d("0.54"), tolerance});
  throw Error(ErrorKind::kInvalidInput, "unknown scenario '" + std::string(name) + "'");
}

namespace {

struct Tracked {
  const GroupEntity* entity;
  Window window;
  std::vector<std::int64_t> favored;

  Score score() const {
    Score hi = Score(favored[0], entity->groups[0].mixed_pairs), lo = hi;
    for (std::size_t g = 1; g < favored.size(); ++g) {
      const Score f(favored[g], entity->groups[g].mixed_pairs);
      if (f > hi) hi = f;
      if (f < lo) lo = f;
    }
    return hi - lo;
  }

  double distance() const {
    const Score s = score();
    if (s < window.lower()) return (window.lower() - s).to_double();
    if (s > window.upper()) return (s - window.upper()).to_double();
    return 0.0;
  }

  void apply_swap(Index x, Index y, std::int64_t span) {
    const auto gx = entity->group_of[x];
    const auto gy = entity->group_of[y];
    if (gx == gy) return;
    favored[gx] -= span;
    favored[gy] += span;
  }
};

Ranking block_order(const GroupIndex& index) {
  const std::size_t n = index.candidate_count();
  std::vector<Rational> key(n, Rational(0));
  for (const auto& e : index.attributes()) {
    if (e.num_groups() < 2) continue;
    const auto last = static_cast<std::int64_t>(e.num_groups() - 1);
    for (Index c = 0; c < n; ++c) key[c] = key[c] + Rational(e.group_of[c], last);
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return key[a] < key[b]; });
  return Ranking(std::move(order));
}

}  // namespace

Ranking build_scenario(const CandidateTable& table, const GroupIndex& index, const ScenarioTargets& targets,
                       std::uint64_t seed, const ScenarioOptions& options) {
  const std::size_t n = table.size();
  if (n != index.candidate_count())
    throw Error(ErrorKind::kInconsistentCandidateSet, "candidate table differs from group index");
  std::vector<Tracked> tracked;
  for (const auto& [name, window] : targets.attributes) {
    const GroupEntity& e = index.attribute(name);
    if (e.num_groups() < 2)
      throw Error(ErrorKind::kDegenerateAttribute, "attribute '" + name + "' has a single group");
    tracked.push_back({&e, window, {}});
  }
  if (targets.intersection) {
    if (index.intersection().num_groups() < 2)
      throw Error(ErrorKind::kDegenerateIntersection, "intersection has a single group");
    tracked.push_back({&index.intersection(), *targets.intersection, {}});
  }
  for (const auto& t : tracked)
    if (t.window.tolerance <= Rational(0) || t.window.target < Rational(0) || t.window.target > Rational(1))
      throw Error(ErrorKind::kInvalidInput, "targets must lie in [0, 1] with positive tolerance");

  Rng rng(derive_seed(seed, 0x5ce7a));
  Ranking ranking = block_order(index);
  auto reset = [&] {
    for (auto& t : tracked) t.favored = favored_counts(ranking, *t.entity);
  };
  auto objective = [&] {
    double total = 0.0;
    for (const auto& t : tracked) total += t.distance();
    return total;
  };
  auto swap = [&](std::size_t a, std::size_t b) {
    const auto span = static_cast<std::int64_t>(b - a);
    for (auto& t : tracked) t.apply_swap(ranking.at(a), ranking.at(b), span);
    ranking.swap_positions(a, b);
  };

  const double log_n = std::log(static_cast<double>(n));
  const std::size_t steps = options.steps_per_candidate * n;
  Ranking best = ranking;
  double best_value = -1.0;
  for (std::size_t restart = 0; restart < options.restarts; ++restart) {
    if (restart > 0) {
      ranking = best;
      for (std::size_t k = 0; k < n / 2; ++k) {
        const auto a = static_cast<std::size_t>(rng.below(n));
        const auto b = static_cast<std::size_t>(rng.below(n));
        if (a != b) ranking.swap_positions(std::min(a, b), std::max(a, b));
      }
    }
    reset();
    double current = objective();
    for (std::size_t step = 0; step < steps && current > 0.0; ++step) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      auto d = static_cast<std::size_t>(std::exp(rng.uniform() * log_n));
      d = std::clamp<std::size_t>(d, 1, n - 1);
      const bool up_ok = i >= d, down_ok = i + d < n;
      if (!up_ok && !down_ok) continue;
      const bool down = down_ok && (!up_ok || (rng.next() & 1));
      const std::size_t a = down ? i : i - d;
      const std::size_t b = down ? i + d : i;
      swap(a, b);
      const double next = objective();
      if (next <= current) {
        current = next;
      } else {
        swap(a, b);
      }
    }
    if (best_value < 0.0 || current < best_value) {
      best = ranking;
      best_value = current;
    }
    if (current == 0.0) {
      for (const auto& t : tracked)
        if (!t.window.contains(rank_parity(ranking, *t.entity)))
          throw std::logic_error("scenario search accepted a ranking outside its windows");
      return ranking;
    }
  }
  throw Error(ErrorKind::kScenarioUnreachable,
              "no ranking inside the target windows after " + std::to_string(options.restarts) + " restarts");
}

CandidateTable synthetic_population(const std::vector<std::pair<std::string, std::size_t>>& attributes,
                                    std::size_t per_cell) {
  if (attributes.empty() || per_cell == 0)
    throw Error(ErrorKind::kInvalidInput, "population needs at least one attribute and one candidate per cell");
  std::vector<std::string> names;
  std::size_t cells = 1;
  for (const auto& [name, size] : attributes) {
    if (size == 0) throw Error(ErrorKind::kInvalidInput, "attribute '" + name + "' has an empty domain");
    names.push_back(name);
    cells *= size;
  }
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> values;
  std::vector<std::size_t> digit(attributes.size(), 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::vector<std::string> row;
    for (std::size_t k = 0; k < attributes.size(); ++k) {
      std::string label = attributes[k].first;
      std::transform(label.begin(), label.end(), label.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      row.push_back(label + std::to_string(digit[k] + 1));
    }
    for (std::size_t m = 0; m < per_cell; ++m) {
      ids.push_back("c" + std::to_string(ids.size() + 1));
      values.push_back(row);
    }
    for (std::size_t k = attributes.size(); k-- > 0;) {
      if (++digit[k] < attributes[k].second) break;
      digit[k] = 0;
    }
  }
  return CandidateTable(std::move(ids), std::move(names), std::move(values));
}

}  // namespace manirank
