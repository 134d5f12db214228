#include <ostream>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"
#include "manirank/mallows.hpp"
#include "report.hpp"

namespace manirank::cli {

namespace {

std::vector<std::pair<std::string, std::size_t>> parse_population(const std::string& text) {
  std::vector<std::pair<std::string, std::size_t>> attributes;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const auto end = std::min(text.find(',', begin), text.size());
    const std::string item = text.substr(begin, end - begin);
    const auto colon = item.find(':');
    std::size_t used = 0;
    std::size_t count = 0;
    try {
      if (colon == std::string::npos || colon == 0) throw std::invalid_argument(item);
      count = std::stoul(item.substr(colon + 1), &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidInput, "--population expects NAME:COUNT items, got '" + item + "'");
    }
    if (used != item.size() - colon - 1 || count < 1)
      throw Error(ErrorKind::kInvalidInput, "--population count must be a positive integer in '" + item + "'");
    attributes.emplace_back(item.substr(0, colon), count);
    begin = end + 1;
  }
  return attributes;
}

Json targets_json(const ScenarioTargets& targets) {
  auto window = [](const Window& w) {
    return Json{{"target", rational_json(w.target)},
                {"tolerance", rational_json(w.tolerance)},
                {"lower", rational_json(w.lower())},
                {"upper", rational_json(w.upper())}};
  };
  Json attrs = Json::object();
  for (const auto& [name, w] : targets.attributes) attrs[name] = window(w);
  return Json{{"attributes", attrs}, {"intersection", targets.intersection ? window(*targets.intersection) : Json(nullptr)}};
}

Json modal_scores_json(const Ranking& modal, const GroupIndex& index) {
  const auto report = mani_rank_check(modal, FairnessSpec::uniform(1), index);
  Json arp_scores = Json::object();
  Json irp_score = nullptr;
  for (const auto& e : report.entities) {
    if (!e.evaluated) continue;
    if (e.is_intersection) irp_score = rational_json(e.score);
    else arp_scores[e.name] = rational_json(e.score);
  }
  return Json{{"arp", arp_scores}, {"irp", irp_score}, {"report", fairness_report_json(report)}};
}

}  // namespace

int cmd_generate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.candidates.has_value() == o.population.has_value())
      throw Error(ErrorKind::kInvalidInput, "give exactly one of --candidates or --population");
    if (o.modal.has_value() == o.scenario.has_value())
      throw Error(ErrorKind::kInvalidInput, "give exactly one of --modal or --scenario");
    if (o.num_rankings < 1) throw Error(ErrorKind::kInvalidInput, "--num-rankings must be at least 1");

    std::string candidate_bytes;
    std::optional<CandidateTable> parsed;
    if (o.candidates) {
      candidate_bytes = read_file(*o.candidates);
      parsed = parse_candidates(candidate_bytes, o.candidates->string());
    } else {
      if (o.per_cell < 1) throw Error(ErrorKind::kInvalidInput, "--per-cell must be at least 1");
      parsed = synthetic_population(parse_population(*o.population), o.per_cell);
      candidate_bytes = format_candidates(*parsed);
    }
    const CandidateTable& table = *parsed;
    const auto index = build_group_index(table);

    Ranking modal;
    Json targets = nullptr;
    std::string modal_bytes;
    if (o.modal) {
      modal_bytes = read_file(*o.modal);
      const auto set = parse_rankings(modal_bytes, table, o.modal->string());
      if (set.size() != 1) throw ParseError(o.modal->string(), 2, std::nullopt, "modal file must hold exactly one ranking");
      modal = set[0];
    } else {
      Rational tolerance;
      try {
        tolerance = Rational::parse_decimal(o.tolerance, 6);
      } catch (const std::exception& e) {
        throw Error(ErrorKind::kInvalidInput, std::string("--tolerance: ") + e.what());
      }
      const auto scenario = named_scenario(*o.scenario, index, tolerance);
      modal = build_scenario(table, index, scenario, o.seed);
      targets = targets_json(scenario);
    }

    const MallowsSampler sampler({modal, o.theta, o.num_rankings, o.seed});
    AtomicFile rankings_file(o.out / "rankings.csv");
    std::vector<Index> buffer;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < o.num_rankings; ++i) {
      sampler.sample_into(i, buffer);
      ids.clear();
      for (Index c : buffer) ids.push_back(table.id(c));
      rankings_file.stream() << format_csv_row(ids);
    }

    Json j;
    j["modal"] = ranking_json(modal, table);
    j["scenario"] = o.scenario ? Json(*o.scenario) : Json(nullptr);
    j["targets"] = targets;
    j["scores"] = modal_scores_json(modal, index);
    j["theta"] = o.theta;
    j["num_rankings"] = o.num_rankings;
    j["seed"] = o.seed;
    Json inputs = Json::object();
    inputs["candidates"] = o.candidates ? input_json(o.candidates->string(), candidate_bytes)
                                        : Json{{"population", *o.population}, {"per_cell", o.per_cell}};
    if (o.modal) inputs["modal"] = input_json(o.modal->string(), modal_bytes);
    j["inputs"] = inputs;

    if (!o.candidates) write_file_atomic(o.out / "candidates.csv", candidate_bytes);
    write_file_atomic(o.out / "modal.csv", format_ranking(modal, table));
    write_file_atomic(o.out / "modal_report.json", render(j));
    rankings_file.commit();
    out << "wrote " << o.num_rankings << " rankings over " << table.size() << " candidates\n";
    return int{kExitOk};
  });
}

}  // namespace manirank::cli
