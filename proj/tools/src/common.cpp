#include <cstdlib>
#include <string>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"
#include "manirank/fair_consensus.hpp"
#include "report.hpp"

namespace manirank::cli {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kUnknownAttribute: return kExitUsage;
    case ErrorKind::kInconsistentCandidateSet:
    case ErrorKind::kDegenerateGroup:
    case ErrorKind::kDegenerateAttribute:
    case ErrorKind::kDegenerateIntersection: return kExitParse;
    case ErrorKind::kInfeasible: return kExitInfeasible;
    case ErrorKind::kRepairStalled: return kExitRepairStalled;
    case ErrorKind::kBudgetExceeded: return kExitBudgetExceeded;
    case ErrorKind::kScenarioUnreachable: return kExitScenarioUnreachable;
    case ErrorKind::kInstanceTooLarge: return kExitInstanceTooLarge;
  }
  return kExitUsage;
}

bool is_method(std::string_view name) {
  for (auto m : kMethods)
    if (m == name) return true;
  return false;
}

namespace {

Rational parse_threshold(const std::string& text, const std::string& flag) {
  try {
    return Rational::parse_decimal(text, 6);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kInvalidInput, flag + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

Fairness make_fairness(const FairnessFlags& flags, const CandidateTable& table) {
  FairnessSpec spec = FairnessSpec::uniform(parse_threshold(flags.delta, "--delta"));
  for (const auto& item : flags.delta_attr) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::kInvalidInput, "--delta-attr expects NAME=VALUE, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    if (!table.attribute_position(name)) throw Error(ErrorKind::kUnknownAttribute, "unknown attribute '" + name + "'");
    spec.delta_per_attribute[name] = parse_threshold(item.substr(eq + 1), "--delta-attr " + name);
  }
  if (flags.delta_inter) spec.delta_intersection = parse_threshold(*flags.delta_inter, "--delta-inter");
  if (flags.intersection) {
    if (*flags.intersection == "none") {
      spec.constrain_intersection = false;
    } else {
      spec.intersection_attrs = split(*flags.intersection, ',');
    }
  }
  if (flags.attributes) {
    if (*flags.attributes != "none")
      throw Error(ErrorKind::kInvalidInput, "--attributes accepts only 'none', got '" + *flags.attributes + "'");
    spec.constrain_attributes = false;
  }
  spec.validate();
  GroupIndex index = build_group_index(table, spec.intersection_attrs);
  return Fairness{std::move(spec), std::move(index)};
}

std::optional<std::chrono::milliseconds> budget_from_env() {
  const char* raw = std::getenv("MANIRANK_TIME_BUDGET_MS");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const long long ms = std::strtoll(raw, &end, 10);
  if (*end != '\0' || ms < 0)
    throw Error(ErrorKind::kInvalidInput, std::string("MANIRANK_TIME_BUDGET_MS must be a non-negative integer, got '") +
                                              raw + "'");
  return std::chrono::milliseconds(ms);
}

MethodRun run_method(std::string_view method, const RankingSet& rankings, const PrecedenceMatrix& precedence,
                     const Fairness& fairness, const KemenySolver* solver, const KemenyOptions& options,
                     const std::optional<Ranking>& warm_start) {
  const auto& [spec, index] = fairness;
  std::optional<KemenySolver> own;
  auto exact_solver = [&]() -> const KemenySolver& {
    if (solver) return *solver;
    if (!own) own.emplace(precedence, options);
    return *own;
  };
  auto pipeline = [&](PipelineMethod m) {
    auto result = fair_pipeline(m, rankings, spec, index);
    return MethodRun{std::move(result.fair), std::move(result.unaware), result.trace.swaps.size(), std::nullopt};
  };

  if (method == "kemeny") {
    auto sol = kemeny_exact(exact_solver(), precedence);
    return MethodRun{sol.ranking, std::nullopt, std::nullopt, sol};
  }
  if (method == "fair-kemeny") {
    const auto& s = exact_solver();
    auto sol = fair_kemeny(s, precedence, spec, index, warm_start);
    return MethodRun{sol.ranking, kemeny_exact(s, precedence).ranking, std::nullopt, sol};
  }
  if (method == "borda") return MethodRun{borda(rankings), std::nullopt, std::nullopt, std::nullopt};
  if (method == "copeland") return MethodRun{copeland(precedence), std::nullopt, std::nullopt, std::nullopt};
  if (method == "schulze") return MethodRun{schulze(precedence), std::nullopt, std::nullopt, std::nullopt};
  if (method == "pick-fairest")
    return MethodRun{pick_fairest_perm(rankings, spec, index), std::nullopt, std::nullopt, std::nullopt};
  if (method == "fair-borda") return pipeline(PipelineMethod::kBorda);
  if (method == "fair-copeland") return pipeline(PipelineMethod::kCopeland);
  if (method == "fair-schulze") return pipeline(PipelineMethod::kSchulze);
  if (method == "correct-pick") return pipeline(PipelineMethod::kPickFairest);
  if (method == "kemeny-weighted") {
    auto sol = kemeny_weighted(rankings, spec, index, options);
    return MethodRun{sol.ranking, std::nullopt, std::nullopt, sol};
  }
  throw Error(ErrorKind::kInvalidInput, "unknown method '" + std::string(method) + "'");
}

Json rational_json(const Rational& value) {
  return Json{{"num", value.numerator()}, {"den", value.denominator()}, {"decimal", value.to_decimal(6)}};
}

Json spec_json(const FairnessSpec& spec) {
  Json j;
  j["delta"] = rational_json(spec.delta_default);
  Json per = Json::object();
  for (const auto& [name, value] : spec.delta_per_attribute) per[name] = rational_json(value);
  j["delta_per_attribute"] = per;
  j["delta_intersection"] = rational_json(spec.intersection_threshold());
  j["intersection_attributes"] = spec.intersection_attrs ? Json(*spec.intersection_attrs) : Json(nullptr);
  j["constrain_attributes"] = spec.constrain_attributes;
  j["constrain_intersection"] = spec.constrain_intersection;
  return j;
}

Json fairness_report_json(const FairnessReport& report) {
  Json entities = Json::array();
  for (const auto& e : report.entities) {
    Json groups = Json::array();
    for (const auto& g : e.groups)
      groups.push_back(Json{{"label", g.label},
                            {"size", g.size},
                            {"favored", g.favored},
                            {"mixed_pairs", g.mixed_pairs},
                            {"fpr", rational_json(g.fpr)}});
    entities.push_back(Json{{"name", e.name},
                            {"kind", e.is_intersection ? "irp" : "arp"},
                            {"constrained", e.constrained},
                            {"evaluated", e.evaluated},
                            {"threshold", rational_json(e.threshold)},
                            {"score", rational_json(e.score)},
                            {"within_threshold", e.within_threshold()},
                            {"groups", groups}});
  }
  Json j{{"satisfied", report.satisfied}, {"entities", entities}};
  j["max_violation"] = report.max_violation
                           ? Json{{"entity", report.max_violation->entity},
                                  {"score", rational_json(report.max_violation->score)}}
                           : Json(nullptr);
  j["warnings"] = report.warnings;
  return j;
}

Json ranking_json(const Ranking& ranking, const CandidateTable& table) {
  Json ids = Json::array();
  for (Index c : ranking.order()) ids.push_back(table.id(c));
  return ids;
}

Json input_json(const std::string& path, const std::string& bytes) {
  return Json{{"path", path}, {"fnv1a", fnv1a_hex(bytes)}, {"bytes", bytes.size()}};
}

std::string render(const Json& json) { return json.dump(2) + "\n"; }

std::string score_column(const EntityReport& entity) {
  return entity.is_intersection ? std::string("irp") : "arp:" + entity.name;
}

}  // namespace manirank::cli
