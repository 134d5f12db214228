#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>

#include "manirank/consensus.hpp"
#include "manirank/errors.hpp"

namespace manirank {
namespace {

__extension__ typedef __int128 i128;
using Clock = std::chrono::steady_clock;

constexpr std::int64_t kInfinity = std::numeric_limits<std::int64_t>::max();
constexpr std::size_t kChunkBits = 8;
constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;

// Linear-size lookup for sum_{u in mask} M[c][u], evaluated eight candidates at a time.
class MaskedRowSums {
 public:
  MaskedRowSums() = default;
  MaskedRowSums(std::size_t n, auto&& entry) : n_(n), chunks_((n + kChunkBits - 1) / kChunkBits) {
    table_.assign(n_ * chunks_ * kChunkSize, 0);
    for (std::size_t c = 0; c < n_; ++c)
      for (std::size_t k = 0; k < chunks_; ++k) {
        std::int64_t* t = &table_[(c * chunks_ + k) * kChunkSize];
        for (std::size_t bits = 1; bits < kChunkSize; ++bits) {
          const std::size_t low = static_cast<std::size_t>(std::countr_zero(bits));
          const std::size_t u = k * kChunkBits + low;
          t[bits] = t[bits & (bits - 1)] + (u < n_ ? entry(c, u) : 0);
        }
      }
  }

  std::int64_t operator()(std::size_t c, std::uint64_t mask) const {
    const std::int64_t* t = &table_[c * chunks_ * kChunkSize];
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < chunks_; ++k, mask >>= kChunkBits) sum += t[k * kChunkSize + (mask & 0xFF)];
    return sum;
  }

 private:
  std::size_t n_ = 0;
  std::size_t chunks_ = 0;
  std::vector<std::int64_t> table_;
};

// One constrained entity, compiled for the search.
struct Constraint {
  std::vector<std::uint32_t> group_of;
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> omega;
  std::vector<std::int64_t> base;  // |G|(n-1) - |G|(|G|-1)/2: favored count = base - position sum
  std::vector<std::int64_t> f_min;  // favored-count range any satisfying order must meet
  std::vector<std::int64_t> f_max;
  std::int64_t delta_num = 0;
  std::int64_t delta_den = 1;
  std::size_t offset = 0;  // first slot of this entity in the flat state arrays
};

std::vector<Constraint> compile(const FairnessSpec& spec, const GroupIndex& index) {
  const auto n = static_cast<std::int64_t>(index.candidate_count());
  std::vector<Constraint> out;
  std::size_t offset = 0;
  auto add = [&](const GroupEntity& e, Rational delta) {
    if (e.num_groups() < 2) return;
    Constraint c;
    c.group_of = e.group_of;
    for (const auto& g : e.groups) {
      const auto m = static_cast<std::int64_t>(g.size());
      c.sizes.push_back(m);
      c.omega.push_back(g.mixed_pairs);
      c.base.push_back(m * (n - 1) - m * (m - 1) / 2);
    }
    c.delta_num = delta.numerator();
    c.delta_den = delta.denominator();
    // omega-weighted FPRs average 1/2, so FPR_g lies within (1 - w_g) delta of 1/2, w_g = omega_g / sum omega
    i128 total = 0;
    for (auto w : c.omega) total += w;
    const i128 p = c.delta_num, q = c.delta_den;
    for (auto w : c.omega) {
      const i128 den = 2 * total * q;
      const i128 spread = 2 * (total - w) * p;
      const i128 hi = w * (total * q + spread);
      const i128 lo = w * (total * q - spread);
      c.f_max.push_back(static_cast<std::int64_t>(hi / den));
      c.f_min.push_back(static_cast<std::int64_t>(lo <= 0 ? 0 : (lo + den - 1) / den));
    }
    c.offset = offset;
    offset += e.num_groups();
    out.push_back(std::move(c));
  };
  if (spec.constrain_attributes)
    for (const auto& e : index.attributes()) add(e, spec.attribute_threshold(e.name));
  if (spec.constrain_intersection) add(index.intersection(), spec.intersection_threshold());
  return out;
}

// a/b > c/d for positive b, d
inline bool frac_greater(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  return static_cast<i128>(a) * d > static_cast<i128>(c) * b;
}

// Can every group's FPR still land within delta of each other, given `placed`
// candidates fixed and the rest free to take any of the remaining slots?
bool entity_feasible(const Constraint& c, const std::int64_t* count, const std::int64_t* pos_sum,
                     std::int64_t placed, std::int64_t n) {
  const std::size_t groups = c.sizes.size();
  std::int64_t lo_max_num = 0, lo_max_den = 1;
  std::int64_t hi_min_num = 1, hi_min_den = 1;
  const i128 p = c.delta_num, q = c.delta_den;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::int64_t r = c.sizes[g] - count[g];
    const std::int64_t tri = r * (r - 1) / 2;
    const std::int64_t pos_min = pos_sum[g] + r * placed + tri;
    const std::int64_t pos_max = pos_sum[g] + r * (n - 1) - tri;
    const std::int64_t f_hi = c.base[g] - pos_min;
    const std::int64_t f_lo = c.base[g] - pos_max;
    if (f_lo > c.f_max[g] || f_hi < c.f_min[g]) return false;
    if (frac_greater(f_lo, c.omega[g], lo_max_num, lo_max_den)) {
      lo_max_num = f_lo;
      lo_max_den = c.omega[g];
    }
    if (frac_greater(hi_min_num, hi_min_den, f_hi, c.omega[g])) {
      hi_min_num = f_hi;
      hi_min_den = c.omega[g];
    }
  }
  // max lower bound - min upper bound <= delta
  const i128 lhs = q * (static_cast<i128>(lo_max_num) * hi_min_den - static_cast<i128>(hi_min_num) * lo_max_den);
  return lhs <= p * lo_max_den * hi_min_den;
}

// Open-addressing dominance memo keyed by (unplaced set, per-group position sums).
class DominanceMemo {
 public:
  DominanceMemo(std::size_t capacity, std::size_t key_words) : words_(key_words + 1) {
    capacity_ = std::bit_ceil(std::max<std::size_t>(capacity, 16));
    slots_.assign(capacity_ * words_, 0);
  }

  // Returns false if an equal state was already reached at cost <= `cost`;
  // otherwise records `cost` for the state and returns true.
  bool admit(const std::uint64_t* key, std::int64_t cost) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i + 1 < words_; ++i) h = (h ^ key[i]) * 1099511628211ULL ^ (h >> 29);
    std::size_t slot = static_cast<std::size_t>(h) & (capacity_ - 1);
    for (std::size_t probe = 0; probe < capacity_; ++probe) {
      std::uint64_t* entry = &slots_[slot * words_];
      if (entry[0] == 0) {
        if (used_ * 10 >= capacity_ * 7) return true;  // full: stop recording
        std::copy(key, key + words_ - 1, entry);
        entry[words_ - 1] = static_cast<std::uint64_t>(cost);
        ++used_;
        return true;
      }
      if (std::equal(key, key + words_ - 1, entry)) {
        auto& stored = entry[words_ - 1];
        if (static_cast<std::int64_t>(stored) <= cost) return false;
        stored = static_cast<std::uint64_t>(cost);
        return true;
      }
      slot = (slot + 1) & (capacity_ - 1);
    }
    return true;
  }

 private:
  std::size_t words_;
  std::size_t capacity_ = 0;
  std::size_t used_ = 0;
  std::vector<std::uint64_t> slots_;
};

// Exact cost of the cheapest order of every subset: table[U] = min_c rows(c, U-c) + table[U-c].
void tabulate(std::size_t n, const MaskedRowSums& rows, std::vector<std::uint32_t>& table) {
  const std::uint64_t states = std::uint64_t{1} << n;
  table.resize(states);
  table[0] = 0;
  for (std::uint64_t mask = 1; mask < states; ++mask) {
    std::int64_t best = kInfinity;
    for (std::uint64_t m = mask; m; m &= m - 1) {
      const auto c = static_cast<std::size_t>(std::countr_zero(m));
      const std::uint64_t rest = mask & ~(std::uint64_t{1} << c);
      best = std::min(best, rows(c, rest) + static_cast<std::int64_t>(table[rest]));
    }
    table[mask] = static_cast<std::uint32_t>(best);
  }
}

// An order achieving table[all], lowest index first among co-optimal choices.
std::vector<Index> trace(std::size_t n, const MaskedRowSums& rows, const std::vector<std::uint32_t>& table) {
  std::vector<Index> order;
  std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  while (mask) {
    for (std::uint64_t m = mask; m; m &= m - 1) {
      const auto c = static_cast<std::size_t>(std::countr_zero(m));
      const std::uint64_t rest = mask & ~(std::uint64_t{1} << c);
      if (rows(c, rest) + static_cast<std::int64_t>(table[rest]) == static_cast<std::int64_t>(table[mask])) {
        order.push_back(static_cast<Index>(c));
        mask = rest;
        break;
      }
    }
  }
  return order;
}

}  // namespace

struct KemenySolver::Impl {
  std::size_t n = 0;
  KemenyOptions options;
  std::vector<std::int64_t> w;
  MaskedRowSums row_sums;  // sum_{u in mask} W[c][u]
  MaskedRowSums min_sums;  // sum_{u in mask} min(W[c][u], W[u][c])
  std::vector<std::uint32_t> completion;  // exact unconstrained cost of ordering each subset

  std::int64_t pair_min_bound(std::uint64_t mask) const {
    std::int64_t total = 0;
    for (std::uint64_t m = mask; m; m &= m - 1) total += min_sums(static_cast<std::size_t>(std::countr_zero(m)), mask);
    return total / 2;
  }

  std::int64_t cost_of(std::span<const Index> order) const {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) total += w[order[i] * n + order[j]];
    return total;
  }

  SearchOutcome run(const std::vector<Constraint>& constraints, const std::optional<Ranking>& incumbent,
                    const Repair* repair = nullptr) const;
};

KemenySolver::KemenySolver(const PrecedenceMatrix& precedence, KemenyOptions options) : impl_(new Impl) {
  Impl& s = *impl_;
  s.n = precedence.size();
  s.options = options;
  const std::size_t limit = std::min<std::size_t>(options.max_exact_candidates, 63);
  if (s.n > limit)
    throw Error(ErrorKind::kInstanceTooLarge, "exact search supports at most " + std::to_string(limit) +
                                                  " candidates, got " + std::to_string(s.n));
  s.w.assign(s.n * s.n, 0);
  for (std::size_t a = 0; a < s.n; ++a)
    for (std::size_t b = 0; b < s.n; ++b) s.w[a * s.n + b] = precedence(static_cast<Index>(a), static_cast<Index>(b));
  s.row_sums = MaskedRowSums(s.n, [&](std::size_t c, std::size_t u) { return s.w[c * s.n + u]; });
  s.min_sums = MaskedRowSums(s.n, [&](std::size_t c, std::size_t u) {
    return std::min(s.w[c * s.n + u], s.w[u * s.n + c]);
  });

  const std::int64_t worst = total_pair_count(static_cast<std::int64_t>(s.n)) * precedence.total_weight();
  if (s.n <= options.max_dp_bound_candidates && worst < std::numeric_limits<std::uint32_t>::max())
    tabulate(s.n, s.row_sums, s.completion);
}

KemenySolver::~KemenySolver() = default;
KemenySolver::KemenySolver(KemenySolver&&) noexcept = default;
KemenySolver& KemenySolver::operator=(KemenySolver&&) noexcept = default;

std::size_t KemenySolver::size() const { return impl_->n; }

SearchOutcome KemenySolver::solve(const std::optional<Ranking>& incumbent) const { return impl_->run({}, incumbent); }

SearchOutcome KemenySolver::solve_constrained(const FairnessSpec& spec, const GroupIndex& index,
                                              const std::optional<Ranking>& incumbent,
                                              const Repair& repair) const {
  if (index.candidate_count() != impl_->n)
    throw Error(ErrorKind::kInconsistentCandidateSet, "group index and precedence matrix sizes differ");
  spec.validate();
  return impl_->run(compile(spec, index), incumbent, repair ? &repair : nullptr);
}

SearchOutcome KemenySolver::Impl::run(const std::vector<Constraint>& constraints,
                                      const std::optional<Ranking>& incumbent, const Repair* repair) const {
  const auto nn = static_cast<std::int64_t>(n);
  const std::int64_t pairs = total_pair_count(nn);
  std::size_t total_groups = 0;
  for (const auto& c : constraints) total_groups += c.sizes.size();

  std::vector<std::int64_t> count(total_groups, 0);
  std::vector<std::int64_t> pos_sum(total_groups, 0);
  auto place = [&](Index cand, std::int64_t position, int sign) {
    for (const auto& c : constraints) {
      const std::size_t g = c.offset + c.group_of[cand];
      count[g] += sign;
      pos_sum[g] += sign * position;
    }
  };
  auto feasible = [&](std::int64_t placed) {
    for (const auto& c : constraints)
      if (!entity_feasible(c, &count[c.offset], &pos_sum[c.offset], placed, nn)) return false;
    return true;
  };
  auto feasible_order = [&](std::span<const Index> order) {
    for (std::size_t p = 0; p < n; ++p) place(order[p], static_cast<std::int64_t>(p), +1);
    const bool ok = feasible(nn);
    std::fill(count.begin(), count.end(), 0);
    std::fill(pos_sum.begin(), pos_sum.end(), 0);
    return ok;
  };

  const auto start = Clock::now();
  auto out_of_time = [&] { return options.time_budget && Clock::now() - start > *options.time_budget; };

  SearchOutcome out;
  std::int64_t best_cost = kInfinity;
  std::vector<Index> best_order;
  auto offer = [&](std::span<const Index> order) {
    const std::int64_t cost = cost_of(order);
    if (cost < best_cost && feasible_order(order)) {
      best_cost = cost;
      best_order.assign(order.begin(), order.end());
    }
  };
  if (incumbent && incumbent->size() == n) offer(incumbent->order());
  auto offer_relaxed = [&](const std::vector<Index>& order) {
    offer(order);
    if (!repair) return;
    if (const auto fixed = (*repair)(Ranking(order)); fixed && fixed->size() == n) offer(fixed->order());
  };

  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;

  // Completion bound in use: lower(prefix) = (scaled prefix + table[rest] - offset) / scale.
  std::int64_t scale = 1;
  std::int64_t offset = 0;
  const MaskedRowSums* rows = &row_sums;
  const std::vector<std::uint32_t>* table = completion.empty() ? nullptr : &completion;

  // Lagrangian strengthening: penalize each constrained group's position sum
  // with a multiplier. Position penalties are pairwise costs (a ahead of b
  // adds lambda_b), so the same subset DP gives an exact relaxed optimum.
  MaskedRowSums dual_rows;
  std::vector<std::uint32_t> dual_table, scratch_table;
  if (!constraints.empty() && table && options.dual_iterations > 0) {
    const std::int64_t d = std::max<std::int64_t>(1, options.dual_scale);
    std::vector<std::int64_t> s_lo, s_hi;
    for (const auto& c : constraints)
      for (std::size_t g = 0; g < c.sizes.size(); ++g) {
        s_lo.push_back(c.base[g] - c.f_max[g]);
        s_hi.push_back(c.base[g] - c.f_min[g]);
      }
    const std::int64_t w_max = *std::max_element(w.begin(), w.end());
    std::vector<double> nu(total_groups, 0.0);
    std::vector<std::int64_t> nu_int(total_groups, 0), lambda(n, 0);

    std::int64_t best_bound = d * static_cast<std::int64_t>(completion[all]);  // nu = 0
    std::vector<Index> relaxed = trace(n, row_sums, completion);
    offer_relaxed(relaxed);
    double mu = 1.0;
    int stall = 0;
    for (std::size_t it = 0; it < options.dual_iterations && !out_of_time(); ++it) {
      if (best_cost != kInfinity && best_bound > d * (best_cost - 1)) break;  // incumbent proven optimal
      // subgradient at the relaxed optimum
      std::vector<std::int64_t> sums(total_groups, 0);
      for (std::size_t p = 0; p < n; ++p)
        for (const auto& c : constraints) sums[c.offset + c.group_of[relaxed[p]]] += static_cast<std::int64_t>(p);
      std::vector<double> grad(total_groups, 0.0);
      double norm = 0.0;
      for (std::size_t g = 0; g < total_groups; ++g) {
        std::int64_t edge = sums[g];
        if (nu_int[g] > 0 || sums[g] > s_hi[g]) edge = s_hi[g];
        else if (nu_int[g] < 0 || sums[g] < s_lo[g]) edge = s_lo[g];
        grad[g] = static_cast<double>(sums[g] - edge);
        norm += grad[g] * grad[g];
      }
      if (norm == 0.0) break;
      const double target = best_cost != kInfinity ? static_cast<double>(d * best_cost)
                                                   : static_cast<double>(best_bound) * 1.05 + static_cast<double>(d);
      const double step = mu * std::max(target - static_cast<double>(best_bound), static_cast<double>(d)) / norm;
      for (std::size_t g = 0; g < total_groups; ++g) {
        nu[g] += step * grad[g];
        nu_int[g] = std::llround(nu[g]);
      }

      std::fill(lambda.begin(), lambda.end(), 0);
      for (const auto& c : constraints)
        for (std::size_t x = 0; x < n; ++x) lambda[x] += nu_int[c.offset + c.group_of[x]];
      const std::int64_t lambda_min = *std::min_element(lambda.begin(), lambda.end());
      for (auto& l : lambda) l -= lambda_min;
      const std::int64_t lambda_max = *std::max_element(lambda.begin(), lambda.end());
      if (static_cast<i128>(pairs) * (d * w_max + lambda_max) >= std::numeric_limits<std::uint32_t>::max()) break;
      MaskedRowSums trial_rows(n, [&](std::size_t c, std::size_t u) { return d * w[c * n + u] + lambda[u]; });
      tabulate(n, trial_rows, scratch_table);
      std::int64_t trial_offset = -lambda_min * pairs;
      for (std::size_t g = 0; g < total_groups; ++g)
        trial_offset += nu_int[g] * (nu_int[g] > 0 ? s_hi[g] : s_lo[g]);
      const std::int64_t value = static_cast<std::int64_t>(scratch_table[all]) - trial_offset;
      relaxed = trace(n, trial_rows, scratch_table);
      offer_relaxed(relaxed);
      if (value > best_bound) {
        best_bound = value;
        std::swap(dual_table, scratch_table);
        dual_rows = std::move(trial_rows);
        scale = d;
        offset = trial_offset;
        stall = 0;
      } else if (++stall >= 2) {
        mu /= 2;
        stall = 0;
      }
    }
    if (scale != 1) {
      rows = &dual_rows;
      table = &dual_table;
    }
  }

  // lower bound on the objective of any completion, in scaled units
  auto prunes = [&](std::int64_t scaled_lower) {
    return best_cost != kInfinity && scaled_lower - offset > scale * (best_cost - 1);
  };

  const bool use_memo = !constraints.empty() || !table;
  const std::size_t key_words = 1 + (total_groups + 3) / 4;
  std::optional<DominanceMemo> memo;
  if (use_memo) {
    const std::size_t wanted = n >= 40 ? options.memo_capacity
                                       : std::min(options.memo_capacity, std::size_t{16} << n);
    memo.emplace(wanted, key_words);
  }
  std::vector<std::uint64_t> key(key_words, 0);

  bool aborted = out_of_time();
  std::uint64_t nodes = 0;
  std::vector<Index> prefix(n);

  struct Child {
    std::int64_t key;  // scaled step + completion bound
    std::int64_t step;
    std::int64_t scaled_step;
    std::int64_t child_pair_min;
    Index cand;
  };

  // remaining: unplaced set; depth: candidates placed so far.
  auto dfs = [&](auto&& self, std::uint64_t remaining, std::size_t depth, std::int64_t cost, std::int64_t scaled_cost,
                 std::int64_t pair_min) -> void {
    ++nodes;
    if (options.time_budget && (nodes & 1023) == 0 && out_of_time()) aborted = true;
    if (aborted) return;
    if (remaining == 0) {
      if (cost < best_cost) {
        best_cost = cost;
        best_order = prefix;
      }
      return;
    }
    Child children[64];
    std::size_t k = 0;
    for (std::uint64_t m = remaining; m; m &= m - 1) {
      const auto c = static_cast<Index>(std::countr_zero(m));
      const std::uint64_t rest = remaining & ~(std::uint64_t{1} << c);
      const std::int64_t step = row_sums(c, rest);
      Child ch{0, step, step, 0, c};
      if (table) {
        ch.scaled_step = scale == 1 ? step : (*rows)(c, rest);
        ch.key = ch.scaled_step + static_cast<std::int64_t>((*table)[rest]);
      } else {
        ch.child_pair_min = pair_min - min_sums(c, rest);
        ch.key = step + ch.child_pair_min;
      }
      if (prunes(scaled_cost + ch.key)) continue;
      children[k++] = ch;
    }
    std::sort(children, children + k, [](const Child& a, const Child& b) {
      return a.key != b.key ? a.key < b.key : a.cand < b.cand;
    });
    for (std::size_t i = 0; i < k && !aborted; ++i) {
      const Child& ch = children[i];
      if (prunes(scaled_cost + ch.key)) break;
      const std::uint64_t rest = remaining & ~(std::uint64_t{1} << ch.cand);
      const std::int64_t child_cost = cost + ch.step;
      place(ch.cand, static_cast<std::int64_t>(depth), +1);
      bool go = feasible(static_cast<std::int64_t>(depth + 1));
      if (go && memo) {
        key[0] = rest;
        for (std::size_t g = 0; g < total_groups; ++g) {
          if (g % 4 == 0) key[1 + g / 4] = 0;
          key[1 + g / 4] |= static_cast<std::uint64_t>(pos_sum[g] & 0xFFFF) << (16 * (g % 4));
        }
        go = memo->admit(key.data(), child_cost);
      }
      if (go) {
        prefix[depth] = ch.cand;
        self(self, rest, depth + 1, child_cost, scaled_cost + ch.scaled_step, ch.child_pair_min);
      }
      place(ch.cand, static_cast<std::int64_t>(depth), -1);
    }
  };
  const std::int64_t root_pair_min = table ? 0 : pair_min_bound(all);
  if (!aborted) dfs(dfs, all, 0, 0, 0, root_pair_min);

  out.nodes_explored = nodes;
  out.exhausted = !aborted;
  if (best_cost != kInfinity) {
    out.ranking = Ranking(best_order);
    out.objective = best_cost;
  }
  return out;
}

}  // namespace manirank
