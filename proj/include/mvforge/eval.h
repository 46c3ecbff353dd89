#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mvforge/metrics.h"

namespace mvforge {

// Test references, in file order.
struct ReferenceSet {
  std::vector<std::string> track_ids;
  std::map<std::string, std::string> texts;
};

// Reads `track_id` + `target` from a dataset file (one JSON object per line).
ReferenceSet load_references(const std::filesystem::path& path);

// Predictions aligned to the reference order.
struct PredictionSet {
  std::string setting_name;  // "1234", "baseline", "sanity:14", ...
  std::vector<std::string> track_ids;
  std::vector<std::string> predictions;
};

// Requires exactly one row per test id. Unknown or duplicate ids are errors
// naming the id; missing ids are an error listing the count and first 10.
PredictionSet load_predictions(const std::filesystem::path& path,
                               const std::vector<std::string>& test_ids,
                               std::string setting_name);

struct ResultsRow {
  std::string setting;
  MetricReport report;

  bool operator==(const ResultsRow&) const = default;
};

using ResultsTable = std::vector<ResultsRow>;

// One report per set, in the given order.
ResultsTable run_evaluation(const std::vector<PredictionSet>& sets, const ReferenceSet& references,
                            const Embedder& embedder, std::size_t jobs = 1);

enum class TableFormat { Markdown, Csv };

TableFormat parse_table_format(const std::string& name);

// Per column, true for every row whose one-decimal value is >= the
// `top`-th largest value of that column; ties at the boundary all count.
std::vector<std::vector<bool>> top_k_mask(const ResultsTable& table, int top);

// "1234" -> "①+②+③+④", "sanity:14" -> "sanity ①+④", others unchanged.
std::string display_setting_name(const std::string& setting);

// Markdown bolds top-k cells; CSV is plain `setting,<8 columns>` at one
// decimal. Throws ArgumentError on an empty table.
std::string render_table(const ResultsTable& table, TableFormat format, int highlight_top);

// Inverse of the CSV rendering.
ResultsTable parse_table_csv(const std::string& csv);

}  // namespace mvforge
