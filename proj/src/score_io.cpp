#include "blaser/score_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "blaser/error.hpp"
#include "byte_io.hpp"

namespace blaser {

std::string format_score_row(const ScoreRow& row) {
  std::string line = row.id;
  char buf[32];
  for (double v : row.values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    line += '\t';
    line += buf;
  }
  return line;
}

void write_score_tsv(const std::filesystem::path& path, std::span<const ScoreRow> rows) {
  std::string text;
  for (const auto& row : rows) {
    text += format_score_row(row);
    text += '\n';
  }
  detail::write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

std::vector<ScoreRow> read_score_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open '" + path.string() + "'");
  std::vector<ScoreRow> rows;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    ScoreRow row;
    std::size_t tab = line.find('\t');
    row.id = line.substr(0, tab);
    if (row.id.empty() || tab == std::string::npos) {
      throw ValidationError(row.id, where + ": expected id<TAB>value");
    }
    while (tab != std::string::npos) {
      const std::size_t start = tab + 1;
      tab = line.find('\t', start);
      const std::size_t end = tab == std::string::npos ? line.size() : tab;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, v);
      if (ec != std::errc() || ptr != line.data() + end) {
        throw ValidationError(row.id, where + ": malformed number '" + line.substr(start, end - start) + "'");
      }
      row.values.push_back(v);
    }
    if (!seen.emplace(row.id, rows.size()).second) {
      throw ValidationError(row.id, where + ": duplicate id");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> align_scores(std::span<const ScoreRow> rows, std::span<const std::string> ids,
                                 std::size_t column) {
  std::unordered_map<std::string_view, const ScoreRow*> by_id;
  for (const auto& r : rows) by_id.emplace(r.id, &r);
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError(id, "missing from score file");
    if (column >= it->second->values.size()) throw ValidationError(id, "score column out of range");
    out.push_back(it->second->values[column]);
  }
  return out;
}

}  // namespace blaser
