#pragma once

// Tab-separated score files: one "id<TAB>value[<TAB>value...]" line per
// instance, no header.

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace blaser {

struct ScoreRow {
  std::string id;
  std::vector<double> values;
};

void write_score_tsv(const std::filesystem::path& path, std::span<const ScoreRow> rows);

// Values are printed with 17 significant digits so they round-trip exactly.
std::string format_score_row(const ScoreRow& row);

// Throws ValidationError on a malformed line or a duplicate id.
std::vector<ScoreRow> read_score_tsv(const std::filesystem::path& path);

// Reorders `column` of `rows` to follow `ids`; throws ValidationError when an
// id is missing.
std::vector<double> align_scores(std::span<const ScoreRow> rows, std::span<const std::string> ids,
                                 std::size_t column = 0);

}  // namespace blaser
