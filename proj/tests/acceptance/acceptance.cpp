// Acceptance suite. Prints one PASS/FAIL line per criterion, exits 1 on any FAIL.
// Usage: manirank_acceptance [criterion...]   (default: all)

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "manirank/consensus.hpp"
#include "manirank/errors.hpp"
#include "manirank/fair_consensus.hpp"
#include "manirank/mallows.hpp"
#include "manirank/metrics.hpp"
#include "oracle.hpp"

namespace {

using namespace manirank;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double x, int digits = 1) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

// Every successful fair result produced anywhere in the suite is checked here.
struct GuaranteeLedger {
  std::size_t runs = 0;
  std::size_t violations = 0;
  std::string first_violation;

  void check(const std::string& where, const Ranking& ranking, const FairnessSpec& spec, const GroupIndex& index) {
    ++runs;
    const auto report = mani_rank_check(ranking, spec, index);
    if (!report.satisfied && violations++ == 0) first_violation = where;
  }
} guarantee;

const std::vector<PipelineMethod> kHeuristics = {PipelineMethod::kBorda, PipelineMethod::kCopeland,
                                                 PipelineMethod::kSchulze, PipelineMethod::kPickFairest};

// 1 -------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  const std::vector<std::string> deltas = {"0", "0.1", "0.25", "0.5", "1"};
  oracle::Gen gen(20240601);
  Outcome out;
  std::size_t instances = 0, comparisons = 0, infeasible = 0, stalled = 0;
  for (; instances < 220; ++instances) {
    const auto inst = gen.instance(gen.between(2, 8), gen.between(1, 7), gen.between(1, 2), instances % 4 == 0);
    const auto set = inst.ranking_set();
    const auto table = inst.table();
    const auto index = build_group_index(table);
    const auto w = build_precedence_matrix(set);

    const auto unconstrained = kemeny_exact(w);
    ++comparisons;
    if (!unconstrained.optimal || unconstrained.objective != oracle::best_unconstrained(inst)) {
      out.pass = false;
      out.detail = "kemeny_exact mismatch on instance " + std::to_string(instances);
    }

    for (const auto& d : deltas) {
      const auto delta = Rational::parse_decimal(d);
      const auto spec = FairnessSpec::uniform(delta);
      const auto expected = oracle::best_fair(inst, delta, delta);

      std::optional<std::int64_t> brute;
      try {
        brute = brute_force_fair_kemeny(set, spec, index).objective;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kInfeasible) throw;
      }
      std::optional<std::int64_t> got;
      try {
        const auto sol = fair_kemeny(w, spec, index);
        guarantee.check("fair-kemeny oracle instance " + std::to_string(instances), sol.ranking, spec, index);
        if (!sol.optimal || sol.objective != w.disagreement(sol.ranking)) {
          out.pass = false;
          out.detail = "fair_kemeny result not proven on instance " + std::to_string(instances);
        }
        got = sol.objective;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kInfeasible) throw;
      }
      ++comparisons;
      if (!expected) ++infeasible;
      if (got != expected || brute != expected) {
        out.pass = false;
        out.detail = "fair_kemeny mismatch on instance " + std::to_string(instances) + " delta " + d;
      }

      for (auto method : kHeuristics) {
        try {
          const auto r = fair_pipeline(method, set, spec, index);
          guarantee.check(std::string(to_string(method)) + " oracle instance", r.fair, spec, index);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kRepairStalled) throw;
          ++stalled;
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 120) {
    out.pass = false;
    out.detail = "took " + fixed(elapsed) + " s";
  }
  if (out.pass)
    out.detail = std::to_string(instances) + " instances, " + std::to_string(comparisons) + " exact comparisons (" +
                 std::to_string(infeasible) + " infeasible agreed), " + fixed(elapsed) + " s";
  std::cerr << "  [1] heuristic repairs stalled: " << stalled << "\n";
  return out;
}

// 3, 4, 6 -------------------------------------------------------------------

constexpr std::chrono::milliseconds kSolveBudget{3000};
constexpr std::size_t kTrials = 2;
constexpr std::size_t kBaseRankings = 150;

struct ScenarioResults {
  Outcome ablation, pof, ordering;
};

bool any_above(const FairnessReport& report, bool intersection, const Rational& limit) {
  for (const auto& e : report.entities)
    if (e.is_intersection == intersection && e.score > limit) return true;
  return false;
}

ScenarioResults low_fair_scenario() {
  const auto start = Clock::now();
  ScenarioResults res;
  const auto table = synthetic_population({{"Race", 3}, {"Gender", 2}}, 4);
  const auto index = build_group_index(table);
  const auto modal = build_scenario(table, index, named_scenario("low-fair", index), 1);
  const auto tenth = Rational::parse_decimal("0.1");
  const auto full = FairnessSpec::uniform(tenth);
  auto attribute_only = full;
  attribute_only.constrain_intersection = false;
  auto intersection_only = full;
  intersection_only.constrain_attributes = false;
  // score view that evaluates every entity regardless of what was constrained
  const auto evaluate = [&](const Ranking& r) { return mani_rank_check(r, full, index); };

  std::size_t ablation_ok = 0, ablation_total = 0;
  std::size_t pof_trials = 0, pof_ok = 0, unproven = 0;
  std::size_t order_trials = 0, order_ok = 0;
  std::vector<std::string> notes;

  const std::vector<double> thetas = {0.1, 0.5, 1.0};
  for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
    for (std::size_t trial = 0; trial < kTrials; ++trial) {
      const auto seed = derive_seed(derive_seed(77, ti), trial);
      const auto set = sample_mallows({modal, thetas[ti], kBaseRankings, seed});
      const auto w = build_precedence_matrix(set);
      KemenyOptions options;
      options.time_budget = kSolveBudget;
      const KemenySolver solver(w, options);
      const auto plain = kemeny_exact(solver, w);
      if (!plain.optimal) ++unproven;
      const std::string tag = "theta " + fixed(thetas[ti]) + " trial " + std::to_string(trial);

      if (trial == 0) {
        ++ablation_total;
        const auto fa = fair_kemeny(solver, w, attribute_only, index);
        const auto fi = fair_kemeny(solver, w, intersection_only, index);
        const auto ff = fair_kemeny(solver, w, full, index);
        guarantee.check("ablation attribute-only " + tag, fa.ranking, attribute_only, index);
        guarantee.check("ablation intersection-only " + tag, fi.ranking, intersection_only, index);
        guarantee.check("ablation full " + tag, ff.ranking, full, index);
        const bool a_ok = any_above(evaluate(fa.ranking), true, tenth);
        const bool i_ok = any_above(evaluate(fi.ranking), false, tenth);
        const bool f_ok = evaluate(ff.ranking).satisfied;
        const bool p_ok = !evaluate(plain.ranking).satisfied;
        if (a_ok && i_ok && f_ok && p_ok) {
          ++ablation_ok;
        } else {
          notes.push_back(tag + ": attribute-only IRP>0.1 " + (a_ok ? "yes" : "no") + ", intersection-only ARP>0.1 " +
                          (i_ok ? "yes" : "no") + ", full satisfied " + (f_ok ? "yes" : "no") +
                          ", plain violates " + (p_ok ? "yes" : "no"));
        }
      }

      // PoF sweep with warm start
      ++pof_trials;
      bool monotone = true, nonnegative = true;
      std::optional<Ranking> warm;
      std::optional<Rational> previous;
      std::optional<Rational> loss_at_tenth;
      Ranking fair_at_tenth = plain.ranking;
      for (int step = 1; step <= 10; ++step) {
        const auto delta = Rational(step, 10);
        const auto spec = FairnessSpec::uniform(delta);
        const auto sol = fair_kemeny(solver, w, spec, index, warm);
        guarantee.check("pof sweep " + tag, sol.ranking, spec, index);
        warm = sol.ranking;
        const auto pof = price_of_fairness(set, sol.ranking, plain.ranking);
        if (pof < Rational(0)) nonnegative = false;
        if (previous && pof > *previous) monotone = false;
        previous = pof;
        if (step == 1) {
          fair_at_tenth = sol.ranking;
          loss_at_tenth = pd_loss(set, sol.ranking);
        }
      }
      if (monotone && nonnegative) {
        ++pof_ok;
      } else {
        notes.push_back(tag + ": PoF monotone " + (monotone ? "yes" : "no") + ", non-negative " +
                        (nonnegative ? "yes" : "no"));
      }

      // method ordering at delta 0.1
      ++order_trials;
      std::map<PipelineMethod, Rational> loss;
      for (auto method : kHeuristics) {
        try {
          const auto r = fair_pipeline(method, set, full, index);
          guarantee.check(std::string(to_string(method)) + " " + tag, r.fair, full, index);
          loss.emplace(method, r.pd_loss_fair);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kRepairStalled) throw;
          notes.push_back(tag + ": fair-" + std::string(to_string(method)) + " repair stalled");
        }
      }
      const auto has = [&](PipelineMethod m) { return loss.count(m) > 0; };
      const bool complete = has(PipelineMethod::kBorda) && has(PipelineMethod::kCopeland) &&
                            has(PipelineMethod::kSchulze);
      if (complete) {
        const auto& fb = loss.at(PipelineMethod::kBorda);
        const auto& fc = loss.at(PipelineMethod::kCopeland);
        const auto& fs = loss.at(PipelineMethod::kSchulze);
        const bool ordered = *loss_at_tenth <= fc && *loss_at_tenth <= fs && fc <= fb && fs <= fb;
        if (ordered) ++order_ok;
        std::cerr << "  [6] " << tag << " pd loss fair-kemeny " << loss_at_tenth->to_decimal() << " fair-copeland "
                  << fc.to_decimal() << " fair-schulze " << fs.to_decimal() << " fair-borda " << fb.to_decimal()
                  << (ordered ? "" : "  (out of order)") << "\n";
      }
    }
  }
  for (const auto& n : notes) std::cerr << "  [3/4/6] " << n << "\n";
  const double elapsed = seconds_since(start);

  res.ablation.pass = ablation_ok == ablation_total;
  res.ablation.detail = std::to_string(ablation_ok) + "/" + std::to_string(ablation_total) +
                        " thetas show the expected pattern at n=24, delta 0.1; scenario stage " + fixed(elapsed) + " s";
  res.pof.pass = pof_ok == pof_trials;
  res.pof.detail = std::to_string(pof_ok) + "/" + std::to_string(pof_trials) +
                   " trials weakly decreasing and non-negative over delta 0.1..1.0";
  if (unproven) {
    res.pof.detail += "; unaware optimum unproven in " + std::to_string(unproven) + " trials";
  }
  res.ordering.pass = order_ok * 5 >= order_trials * 4;
  res.ordering.detail = std::to_string(order_ok) + "/" + std::to_string(order_trials) +
                        " trials with fair-kemeny <= fair-copeland, fair-schulze <= fair-borda (need 80%)";
  if (elapsed >= 300) {
    res.ablation.pass = false;
    res.ablation.detail += " (over the 5 minute limit)";
  }
  return res;
}

// 5 -------------------------------------------------------------------------

Outcome mallows_sampler() {
  Outcome out;
  constexpr std::size_t n = 5, samples = 50000;
  const auto perms = oracle::all_permutations(n);
  std::map<oracle::Order, std::size_t> slot;
  for (std::size_t i = 0; i < perms.size(); ++i) slot[perms[i]] = i;
  const oracle::Order modal_order = {3, 0, 4, 1, 2};
  const Ranking modal(modal_order);
  const double critical = boost::math::quantile(
      boost::math::complement(boost::math::chi_squared(static_cast<double>(perms.size() - 1)), 0.01));
  std::ostringstream stats;
  for (double theta : {0.2, 0.6, 1.0}) {
    std::vector<double> weight(perms.size());
    double z = 0;
    for (std::size_t i = 0; i < perms.size(); ++i) {
      weight[i] = std::exp(-theta * static_cast<double>(oracle::kendall_tau(perms[i], modal_order)));
      z += weight[i];
    }
    std::vector<std::size_t> observed(perms.size(), 0);
    const MallowsSampler sampler({modal, theta, samples, 5150});
    std::vector<Index> buf;
    for (std::size_t s = 0; s < samples; ++s) {
      sampler.sample_into(s, buf);
      ++observed[slot.at(oracle::Order(buf.begin(), buf.end()))];
    }
    double chi = 0;
    for (std::size_t i = 0; i < perms.size(); ++i) {
      const double expected = static_cast<double>(samples) * weight[i] / z;
      const double diff = static_cast<double>(observed[i]) - expected;
      chi += diff * diff / expected;
    }
    if (chi > critical) out.pass = false;
    stats << " theta " << fixed(theta) << " chi2 " << fixed(chi) << ";";
  }

  // mean distance to the modal ranking shrinks as theta grows, on every seed
  std::size_t monotone_runs = 0;
  constexpr std::size_t kRuns = 10;
  for (std::uint64_t seed = 1; seed <= kRuns; ++seed) {
    const auto centre = Ranking(std::vector<Index>{7, 2, 9, 0, 4, 11, 1, 8, 5, 10, 3, 6});
    double last = 1e18;
    bool ok = true;
    for (double theta : {0.0, 0.2, 0.6, 1.0, 2.0}) {
      const auto set = sample_mallows({centre, theta, 2000, seed});
      double total = 0;
      for (const auto& r : set.rankings()) total += static_cast<double>(kendall_tau(r, centre));
      const double mean = total / static_cast<double>(set.size());
      if (!(mean < last)) ok = false;
      last = mean;
    }
    if (ok) ++monotone_runs;
  }
  if (monotone_runs != kRuns) out.pass = false;
  out.detail = "critical " + fixed(critical) + " at df 119;" + stats.str() + " mean KT decreasing in " +
               std::to_string(monotone_runs) + "/" + std::to_string(kRuns) + " seeded runs";
  return out;
}

// 7 -------------------------------------------------------------------------

Outcome scalability() {
  Outcome out;
  const auto delta = Rational::parse_decimal("0.33");
  const auto spec = FairnessSpec::uniform(delta);

  // n = 10000, |R| = 100
  {
    const auto start = Clock::now();
    const auto table = synthetic_population({{"Gender", 2}, {"Race", 2}}, 2500);
    const auto index = build_group_index(table);
    // block order: every member of one cell ahead of the next
    const auto set = sample_mallows({Ranking::identity(table.size()), 0.002, 100, 91});
    const auto r = fair_pipeline(PipelineMethod::kBorda, set, spec, index);
    guarantee.check("fair-borda n=10000", r.fair, spec, index);
    const double elapsed = seconds_since(start);
    if (elapsed >= 300) out.pass = false;
    out.detail = "n=10000 |R|=100 " + fixed(elapsed) + " s (" + std::to_string(r.trace.swaps.size()) + " swaps)";
  }

  // n = 100, 1,000,000 rankings streamed
  {
    const auto start = Clock::now();
    const auto table = synthetic_population({{"Gender", 2}, {"Race", 2}}, 25);
    const auto index = build_group_index(table);
    constexpr std::size_t m = 1000000;
    const MallowsSampler sampler({Ranking::identity(table.size()), 0.05, m, 92});
    BordaAccumulator tally(table.size());
    std::vector<Index> buf;
    for (std::size_t i = 0; i < m; ++i) {
      sampler.sample_into(i, buf);
      tally.add(buf);
    }
    const auto repaired = make_mr_fair(tally.ranking(), spec, index);
    guarantee.check("fair-borda streamed", repaired.ranking, spec, index);
    const double elapsed = seconds_since(start);
    if (elapsed >= 300) out.pass = false;
    out.detail += "; n=100 |R|=1000000 streamed " + fixed(elapsed) + " s (" +
                  std::to_string(repaired.trace.swaps.size()) + " swaps)";
  }
  return out;
}

// 8 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "manirank_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "exp.json") << R"({
  "population": {"attributes": [{"name": "Race", "values": 3}, {"name": "Gender", "values": 2}], "per_cell": 2},
  "scenario": "low-fair",
  "num_rankings": 30,
  "thetas": [0.2, 0.8],
  "deltas": ["0.1", "0.5"],
  "methods": ["fair-kemeny", "fair-borda", "fair-copeland", "fair-schulze", "correct-pick", "kemeny"],
  "trials": 2,
  "seed": 5
})";
  }
  const std::string bin = MANIRANK_CLI_PATH;
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  const auto run = [&](const std::string& args) {
    const std::string cmd = "'" + bin + "' " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };

  std::vector<std::string> compared;
  std::size_t mismatches = 0, failures = 0;
  for (const char* copy : {"a", "b"}) {
    const auto dir = root / copy;
    if (run("generate --population Race:3,Gender:2 --per-cell 2 --scenario low-fair --theta 0.5 --num-rankings 25 "
            "--seed 9 --out " + q(dir / "gen")) != 0)
      ++failures;
    for (const char* method : {"fair-kemeny", "fair-borda", "fair-copeland", "fair-schulze", "correct-pick",
                               "kemeny", "borda", "copeland", "schulze", "pick-fairest", "kemeny-weighted"}) {
      if (run(std::string("aggregate --method ") + method + " --delta 0.2 --candidates " +
              q(root / "a/gen/candidates.csv") + " --rankings " + q(root / "a/gen/rankings.csv") + " --out " +
              q(dir / "agg" / method)) != 0)
        ++failures;
    }
    if (run("metrics --candidates " + q(root / "a/gen/candidates.csv") + " --rankings " +
            q(root / "a/gen/rankings.csv") + " --out " + q(dir / "metrics")) != 0)
      ++failures;
    if (run("experiment --config " + q(root / "exp.json") + " --out " + q(dir / "exp")) != 0) ++failures;
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "a");
    compared.push_back(rel.string());
    if (!fs::exists(root / "b" / rel) || slurp(entry.path()) != slurp(root / "b" / rel)) {
      ++mismatches;
      std::cerr << "  [8] differs: " << rel.string() << "\n";
    }
  }
  out.pass = failures == 0 && mismatches == 0 && compared.size() >= 20;
  out.detail = std::to_string(compared.size()) + " files from generate, aggregate (11 methods), metrics, experiment; " +
               std::to_string(mismatches) + " differ, " + std::to_string(failures) + " commands failed";
  fs::remove_all(root);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto want = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

  std::map<int, std::pair<std::string, Outcome>> results;
  const auto record = [&](int c, const std::string& name, Outcome o) { results[c] = {name, std::move(o)}; };
  const auto guarded = [&](int c, const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(c, name, {false, std::string("threw: ") + e.what()});
    }
  };

  if (want(1)) guarded(1, "oracle equivalence", [&] { record(1, "oracle equivalence", oracle_equivalence()); });
  if (want(3) || want(4) || want(6)) {
    try {
      auto s = low_fair_scenario();
      record(3, "ablation", s.ablation);
      record(4, "PoF monotonicity", s.pof);
      record(6, "method ordering", s.ordering);
    } catch (const std::exception& e) {
      for (int c : {3, 4, 6}) record(c, "scenario", {false, std::string("threw: ") + e.what()});
    }
  }
  if (want(5)) guarded(5, "Mallows sampler", [&] { record(5, "Mallows sampler", mallows_sampler()); });
  if (want(7)) guarded(7, "scalability", [&] { record(7, "scalability", scalability()); });
  if (want(8)) guarded(8, "determinism", [&] { record(8, "determinism", determinism()); });
  if (want(2)) {
    Outcome g;
    g.pass = guarantee.violations == 0 && guarantee.runs > 0;
    g.detail = std::to_string(guarantee.runs) + " successful fair runs checked, " +
               std::to_string(guarantee.violations) + " violations" +
               (guarantee.violations ? " (first: " + guarantee.first_violation + ")" : "");
    record(2, "MANI-Rank guarantee", g);
  }

  bool all = true;
  for (int c = 1; c <= 8; ++c) {
    if (!want(c)) continue;
    const auto& [name, o] = results.at(c);
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c << " " << name << ": " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
