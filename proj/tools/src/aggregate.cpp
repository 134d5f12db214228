#include <chrono>
#include <ostream>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"
#include "report.hpp"

namespace manirank::cli {

namespace {

std::string method_list() {
  std::string out;
  for (auto m : kMethods) out += (out.empty() ? "" : ", ") + std::string(m);
  return out;
}

}  // namespace

int cmd_aggregate(const AggregateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!is_method(o.method))
      throw Error(ErrorKind::kInvalidInput, "unknown method '" + o.method + "' (expected one of " + method_list() + ")");
    const std::string candidate_bytes = read_file(o.candidates);
    const auto table = parse_candidates(candidate_bytes, o.candidates.string());
    const std::string ranking_bytes = read_file(o.rankings);
    const auto rankings = parse_rankings(ranking_bytes, table, o.rankings.string());
    const auto fairness = make_fairness(o.fairness, table);

    KemenyOptions options;
    options.time_budget = o.time_budget;
    const auto start = std::chrono::steady_clock::now();
    const auto precedence = build_precedence_matrix(rankings);
    const auto result = run_method(o.method, rankings, precedence, fairness, nullptr, options);
    const auto elapsed = std::chrono::steady_clock::now() - start;

    const auto report = mani_rank_check(result.consensus, fairness.spec, fairness.index);
    const auto loss = pd_loss(precedence, result.consensus);
    Json j;
    j["method"] = o.method;
    j["fairness"] = spec_json(fairness.spec);
    j["consensus"] = ranking_json(result.consensus, table);
    j["report"] = fairness_report_json(report);
    j["pd_loss"] = rational_json(loss);
    j["pof"] = result.unaware ? rational_json(price_of_fairness(rankings, result.consensus, *result.unaware))
                              : Json(nullptr);
    j["unaware"] = result.unaware ? ranking_json(*result.unaware, table) : Json(nullptr);
    j["swaps"] = result.swaps ? Json(*result.swaps) : Json(nullptr);
    j["objective"] = result.exact ? Json(result.exact->objective) : Json(nullptr);
    j["optimal"] = result.exact ? Json(result.exact->optimal) : Json(nullptr);
    if (o.timing) j["millis"] = std::chrono::duration<double, std::milli>(elapsed).count();
    j["seed"] = nullptr;
    j["inputs"] = Json{{"candidates", input_json(o.candidates.string(), candidate_bytes)},
                       {"rankings", input_json(o.rankings.string(), ranking_bytes)}};

    const std::string consensus_csv = format_ranking(result.consensus, table);
    const std::string report_json = render(j);
    write_file_atomic(o.out / "consensus.csv", consensus_csv);
    write_file_atomic(o.out / "report.json", report_json);

    out << o.method << ": satisfied=" << (report.satisfied ? "true" : "false") << " pd_loss=" << loss.to_decimal(6);
    if (result.exact && !result.exact->optimal) out << " (best found within budget, optimality not proven)";
    out << '\n';
    return int{kExitOk};
  });
}

}  // namespace manirank::cli
