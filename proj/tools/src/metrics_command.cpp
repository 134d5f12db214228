#include <ostream>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"
#include "report.hpp"

namespace manirank::cli {

int cmd_metrics(const MetricsOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.format != "csv" && o.format != "json" && o.format != "both")
      throw Error(ErrorKind::kInvalidInput, "--format must be csv, json or both");
    const std::string candidate_bytes = read_file(o.candidates);
    const auto table = parse_candidates(candidate_bytes, o.candidates.string());
    const std::string ranking_bytes = read_file(o.rankings);
    const auto base = parse_rankings(ranking_bytes, table, o.rankings.string());
    const auto fairness = make_fairness(o.fairness, table);
    const auto precedence = build_precedence_matrix(base);

    struct Source {
      std::string path;
      std::string bytes;
      RankingSet rankings;
    };
    std::vector<Source> sources;
    if (o.score.empty()) {
      sources.push_back({o.rankings.string(), ranking_bytes, base});
    } else {
      for (const auto& path : o.score) {
        std::string bytes = read_file(path);
        auto set = parse_rankings(bytes, table, path.string());
        sources.push_back({path.string(), std::move(bytes), std::move(set)});
      }
    }

    std::string csv;
    Json scored = Json::array();
    Json inputs{{"candidates", input_json(o.candidates.string(), candidate_bytes)},
                {"rankings", input_json(o.rankings.string(), ranking_bytes)}};
    Json scored_inputs = Json::array();
    bool header_done = false;
    for (const auto& source : sources) {
      scored_inputs.push_back(input_json(source.path, source.bytes));
      for (std::size_t i = 0; i < source.rankings.size(); ++i) {
        const auto& ranking = source.rankings[i];
        const auto report = mani_rank_check(ranking, fairness.spec, fairness.index);
        const auto loss = pd_loss(precedence, ranking);
        if (!header_done) {
          std::vector<std::string> header{"source", "row", "satisfied"};
          for (const auto& e : report.entities) header.push_back(score_column(e));
          for (const auto& e : report.entities)
            for (const auto& g : e.groups) header.push_back("fpr:" + e.name + ":" + g.label);
          header.push_back("pd_loss");
          csv += format_csv_row(header);
          header_done = true;
        }
        std::vector<std::string> row{source.path, std::to_string(i + 1), report.satisfied ? "true" : "false"};
        for (const auto& e : report.entities) row.push_back(e.evaluated ? e.score.to_decimal(6) : "");
        for (const auto& e : report.entities)
          for (const auto& g : e.groups) row.push_back(g.fpr.to_decimal(6));
        row.push_back(loss.to_decimal(6));
        csv += format_csv_row(row);
        scored.push_back(Json{{"source", source.path},
                              {"row", i + 1},
                              {"ranking", ranking_json(ranking, table)},
                              {"report", fairness_report_json(report)},
                              {"pd_loss", rational_json(loss)}});
      }
    }
    inputs["scored"] = scored_inputs;
    const Json j{{"fairness", spec_json(fairness.spec)}, {"inputs", inputs}, {"rankings", scored}};

    if (o.format != "json") write_file_atomic(o.out / "metrics.csv", csv);
    if (o.format != "csv") write_file_atomic(o.out / "metrics.json", render(j));
    out << "scored " << scored.size() << " ranking(s)\n";
    return int{kExitOk};
  });
}

}  // namespace manirank::cli
