#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "manirank/model.hpp"

namespace manirank::cli {

/// Malformed input file. `row` is the 1-based physical line where the
/// offending record starts; `column` is 1-based when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t row, std::optional<std::size_t> column, const std::string& message);

  std::size_t row() const { return row_; }
  std::optional<std::size_t> column() const { return column_; }

 private:
  std::size_t row_;
  std::optional<std::size_t> column_;
};

/// File system failure (unreadable input, unwritable output).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRecord {
  std::size_t row = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 records: quoted fields may hold commas, doubled quotes and line
/// breaks. CRLF is accepted. Blank lines are skipped.
std::vector<CsvRecord> parse_csv(std::string_view text, const std::string& file);
std::string format_csv_row(const std::vector<std::string>& fields);

/// Header `candidate_id,<attr1>,...`, then one row per candidate.
CandidateTable parse_candidates(std::string_view text, const std::string& file = "candidates");
std::string format_candidates(const CandidateTable& table);

/// One ranking per row, candidate ids best first; no header.
RankingSet parse_rankings(std::string_view text, const CandidateTable& table, const std::string& file = "rankings");
std::string format_rankings(const RankingSet& rankings, const CandidateTable& table);
std::string format_ranking(const Ranking& ranking, const CandidateTable& table);

std::string read_file(const std::filesystem::path& path);

/// Output stream backed by a sibling temporary file that replaces `path` only
/// on commit(); an uncommitted file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  ~AtomicFile();
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

/// Writes to a sibling temporary and renames it over `path`, creating parent
/// directories as needed.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a, 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace manirank::cli
