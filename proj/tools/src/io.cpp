#include "manirank/cli/io.hpp"

#include <cstdint>
#include <set>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "manirank/errors.hpp"

namespace manirank::cli {

namespace {

std::string locate(const std::string& file, std::size_t row, std::optional<std::size_t> column) {
  std::string where = file + " row " + std::to_string(row);
  if (column) where += " column " + std::to_string(*column);
  return where;
}

bool needs_quotes(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

}  // namespace

ParseError::ParseError(const std::string& file, std::size_t row, std::optional<std::size_t> column,
                       const std::string& message)
    : std::runtime_error(locate(file, row, column) + ": " + message), row_(row), column_(column) {}

std::vector<CsvRecord> parse_csv(std::string_view text, const std::string& file) {
  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < text.size()) {
    CsvRecord record;
    record.row = line;
    std::string field;
    bool any = false;
    while (true) {
      if (i < text.size() && text[i] == '"') {
        ++i;
        while (true) {
          if (i >= text.size()) throw ParseError(file, record.row, record.fields.size() + 1, "unterminated quoted field");
          if (text[i] == '"') {
            if (i + 1 < text.size() && text[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          field += text[i++];
        }
        any = true;
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw ParseError(file, line, record.fields.size() + 1, "text after closing quote");
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') throw ParseError(file, line, record.fields.size() + 1, "stray quote in unquoted field");
          field += text[i++];
        }
        any = any || !field.empty();
      }
      record.fields.push_back(std::move(field));
      field.clear();
      if (i < text.size() && text[i] == ',') {
        ++i;
        any = true;
        continue;
      }
      break;
    }
    if (i < text.size() && text[i] == '\r') ++i;
    if (i < text.size() && text[i] == '\n') ++i;
    ++line;
    if (any) records.push_back(std::move(record));
  }
  return records;
}

std::string format_csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += ',';
    if (!needs_quotes(fields[k])) {
      out += fields[k];
      continue;
    }
    out += '"';
    for (char ch : fields[k]) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  out += '\n';
  return out;
}

CandidateTable parse_candidates(std::string_view text, const std::string& file) {
  const auto records = parse_csv(text, file);
  if (records.empty()) throw ParseError(file, 1, std::nullopt, "missing header");
  const auto& header = records.front().fields;
  if (header.front() != "candidate_id")
    throw ParseError(file, records.front().row, 1, "header must start with candidate_id");
  std::vector<std::string> attributes(header.begin() + 1, header.end());
  std::set<std::string> seen_attrs;
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (attributes[a].empty()) throw ParseError(file, records.front().row, a + 2, "empty attribute name");
    if (!seen_attrs.insert(attributes[a]).second)
      throw ParseError(file, records.front().row, a + 2, "duplicate attribute '" + attributes[a] + "'");
  }
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> values;
  std::set<std::string> seen_ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size())
      throw ParseError(file, rec.row, std::nullopt,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(rec.fields.size()));
    if (rec.fields[0].empty()) throw ParseError(file, rec.row, 1, "empty candidate id");
    if (!seen_ids.insert(rec.fields[0]).second)
      throw ParseError(file, rec.row, 1, "duplicate candidate id '" + rec.fields[0] + "'");
    ids.push_back(rec.fields[0]);
    values.emplace_back(rec.fields.begin() + 1, rec.fields.end());
  }
  if (ids.size() < 2) throw ParseError(file, records.back().row, std::nullopt, "at least two candidates required");
  return CandidateTable(std::move(ids), std::move(attributes), std::move(values));
}

std::string format_candidates(const CandidateTable& table) {
  std::vector<std::string> header{"candidate_id"};
  header.insert(header.end(), table.attributes().begin(), table.attributes().end());
  std::string out = format_csv_row(header);
  for (Index c = 0; c < table.size(); ++c) {
    std::vector<std::string> row{table.id(c)};
    row.insert(row.end(), table.values()[c].begin(), table.values()[c].end());
    out += format_csv_row(row);
  }
  return out;
}

RankingSet parse_rankings(std::string_view text, const CandidateTable& table, const std::string& file) {
  const auto records = parse_csv(text, file);
  if (records.empty()) throw ParseError(file, 1, std::nullopt, "no rankings");
  const std::size_t n = table.size();
  std::vector<Ranking> rankings;
  rankings.reserve(records.size());
  std::vector<char> placed(n);
  for (const auto& rec : records) {
    std::fill(placed.begin(), placed.end(), 0);
    std::vector<Index> order;
    order.reserve(n);
    for (std::size_t k = 0; k < rec.fields.size(); ++k) {
      const auto id = table.find(rec.fields[k]);
      if (!id) throw ParseError(file, rec.row, k + 1, "unknown candidate '" + rec.fields[k] + "'");
      if (placed[*id]) throw ParseError(file, rec.row, k + 1, "candidate '" + rec.fields[k] + "' listed twice");
      placed[*id] = 1;
      order.push_back(*id);
    }
    if (order.size() != n) {
      for (Index c = 0; c < n; ++c)
        if (!placed[c])
          throw ParseError(file, rec.row, std::nullopt,
                           "ranking omits candidate '" + table.id(c) + "' (" + std::to_string(order.size()) + " of " +
                               std::to_string(n) + " listed)");
    }
    rankings.emplace_back(std::move(order));
  }
  return RankingSet(std::move(rankings));
}

std::string format_ranking(const Ranking& ranking, const CandidateTable& table) {
  std::vector<std::string> ids;
  ids.reserve(ranking.size());
  for (Index c : ranking.order()) ids.push_back(table.id(c));
  return format_csv_row(ids);
}

std::string format_rankings(const RankingSet& rankings, const CandidateTable& table) {
  std::string out;
  for (const auto& r : rankings.rankings()) out += format_ranking(r, table);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return buffer.str();
}

AtomicFile::AtomicFile(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path_.parent_path().string() + "': " + ec.message());
  }
  temp_ = path_;
  temp_ += ".tmp." + std::to_string(::getpid());
  out_.open(temp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot write '" + temp_.string() + "'");
}

AtomicFile::~AtomicFile() {
  if (committed_) return;
  out_.close();
  std::error_code ec;
  std::filesystem::remove(temp_, ec);
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw IoError("failed writing '" + temp_.string() + "'");
  out_.close();
  std::error_code ec;
  std::filesystem::rename(temp_, path_, ec);
  if (ec) throw IoError("cannot replace '" + path_.string() + "': " + ec.message());
  committed_ = true;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  AtomicFile file(path);
  file.stream().write(content.data(), static_cast<std::streamsize>(content.size()));
  file.commit();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[static_cast<std::size_t>(k)] = digits[h & 0xF];
  return out;
}

}  // namespace manirank::cli
