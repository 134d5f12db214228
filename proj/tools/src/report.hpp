#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "manirank/metrics.hpp"
#include "manirank/model.hpp"

namespace manirank::cli {

using Json = nlohmann::ordered_json;

Json rational_json(const Rational& value);
Json spec_json(const FairnessSpec& spec);
Json fairness_report_json(const FairnessReport& report);
Json ranking_json(const Ranking& ranking, const CandidateTable& table);
Json input_json(const std::string& path, const std::string& bytes);

/// Two-space indented JSON with a trailing newline.
std::string render(const Json& json);

/// ARP / IRP column name for an entity.
std::string score_column(const EntityReport& entity);

}  // namespace manirank::cli

#include <exception>
#include <ostream>

#include "manirank/cli/commands.hpp"
#include "manirank/cli/io.hpp"

namespace manirank::cli {

/// Runs a command body, mapping failures onto exit codes with one line on `err`.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace manirank::cli
