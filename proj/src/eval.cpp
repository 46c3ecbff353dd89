#include "mvforge/eval.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "mvforge/error.h"
#include "mvforge/parallel.h"

namespace mvforge {
namespace {

using json = nlohmann::json;

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", round_half_up(v, 1));
  return buf;
}

// Visits each nonblank line of a JSON-lines file as (line number, object).
void for_each_json_line(const std::filesystem::path& path, const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": not a JSON object");
    fn(lineno, j);
  }
}

std::string string_field(const json& j, const char* key, const std::filesystem::path& path, std::size_t lineno) {
  if (!j.contains(key) || !j[key].is_string())
    throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": missing string field '" + key + "'");
  return j[key].get<std::string>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ArgumentError("unterminated quote in CSV line");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

ReferenceSet load_references(const std::filesystem::path& path) {
  ReferenceSet refs;
  for_each_json_line(path, [&](std::size_t lineno, const json& j) {
    const std::string id = string_field(j, "track_id", path, lineno);
    if (!refs.texts.emplace(id, string_field(j, "target", path, lineno)).second)
      throw ArgumentError("duplicate reference track_id: " + id);
    refs.track_ids.push_back(id);
  });
  if (refs.track_ids.empty()) throw ArgumentError("no references in " + path.string());
  return refs;
}

PredictionSet load_predictions(const std::filesystem::path& path, const std::vector<std::string>& test_ids,
                               std::string setting_name) {
  const std::set<std::string> known(test_ids.begin(), test_ids.end());
  std::map<std::string, std::string> rows;
  for_each_json_line(path, [&](std::size_t lineno, const json& j) {
    const std::string id = string_field(j, "track_id", path, lineno);
    if (!known.count(id)) throw ArgumentError("unknown track_id: " + id + " (line " + std::to_string(lineno) + ")");
    if (!rows.emplace(id, string_field(j, "prediction", path, lineno)).second)
      throw ArgumentError("duplicate track_id: " + id + " (line " + std::to_string(lineno) + ")");
  });

  std::vector<std::string> missing;
  for (const std::string& id : test_ids)
    if (!rows.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "missing predictions for " + std::to_string(missing.size()) + " ids:";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, missing.size()); ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ...";
    throw ArgumentError(msg);
  }

  PredictionSet set;
  set.setting_name = std::move(setting_name);
  for (const std::string& id : test_ids) {
    set.track_ids.push_back(id);
    set.predictions.push_back(rows.at(id));
  }
  return set;
}

ResultsTable run_evaluation(const std::vector<PredictionSet>& sets, const ReferenceSet& references,
                            const Embedder& embedder, std::size_t jobs) {
  for (const PredictionSet& s : sets) {
    if (s.track_ids.size() != s.predictions.size()) throw ArgumentError("prediction set " + s.setting_name + " is ragged");
    for (const std::string& id : s.track_ids)
      if (!references.texts.count(id)) throw ArgumentError("no reference for " + id + " in " + s.setting_name);
  }
  const std::size_t outer = std::min(jobs, sets.size());
  const std::size_t inner = std::max<std::size_t>(1, jobs / std::max<std::size_t>(1, outer));
  const auto reports = parallel_map(sets.size(), outer, [&](std::size_t i) {
    const PredictionSet& s = sets[i];
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(s.track_ids.size());
    for (std::size_t k = 0; k < s.track_ids.size(); ++k)
      pairs.emplace_back(s.predictions[k], references.texts.at(s.track_ids[k]));
    return evaluate_pairs(pairs, embedder, inner);
  });
  ResultsTable table;
  for (std::size_t i = 0; i < sets.size(); ++i) table.push_back({sets[i].setting_name, reports[i]});
  return table;
}

TableFormat parse_table_format(const std::string& name) {
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  if (name == "csv") return TableFormat::Csv;
  throw ArgumentError("unknown table format: " + name + " (expected markdown or csv)");
}

std::vector<std::vector<bool>> top_k_mask(const ResultsTable& table, int top) {
  std::vector<std::vector<bool>> mask(table.size(), std::vector<bool>(kMetricColumns.size(), false));
  if (top <= 0 || table.empty()) return mask;
  for (std::size_t c = 0; c < kMetricColumns.size(); ++c) {
    std::vector<double> col;
    for (const ResultsRow& r : table) col.push_back(round_half_up(r.report.values()[c], 1));
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double cutoff = sorted[std::min<std::size_t>(static_cast<std::size_t>(top), sorted.size()) - 1];
    for (std::size_t r = 0; r < table.size(); ++r) mask[r][c] = col[r] >= cutoff;
  }
  return mask;
}

std::string display_setting_name(const std::string& setting) {
  static const char* kCircled[] = {"", "①", "②", "③", "④"};
  auto circled = [](const std::string& digits) -> std::optional<std::string> {
    if (digits.empty() || digits.find_first_not_of("1234") != std::string::npos) return std::nullopt;
    std::string out;
    for (char d : digits) {
      if (!out.empty()) out += "+";
      out += kCircled[d - '0'];
    }
    return out;
  };
  if (auto c = circled(setting)) return *c;
  const std::string prefix = "sanity:";
  if (setting.rfind(prefix, 0) == 0)
    if (auto c = circled(setting.substr(prefix.size()))) return "sanity " + *c;
  return setting;
}

std::string render_table(const ResultsTable& table, TableFormat format, int highlight_top) {
  if (table.empty()) throw ArgumentError("cannot render an empty table");
  std::ostringstream out;
  if (format == TableFormat::Csv) {
    out << "setting";
    for (auto col : kMetricColumns) out << ',' << col;
    out << '\n';
    for (const ResultsRow& r : table) {
      out << csv_field(r.setting);
      for (double v : r.report.values()) out << ',' << one_decimal(v);
      out << '\n';
    }
    return out.str();
  }
  const auto bold = top_k_mask(table, highlight_top);
  out << "| Setting |";
  for (auto col : kMetricColumns) out << ' ' << col << " |";
  out << "\n|---|";
  for (std::size_t c = 0; c < kMetricColumns.size(); ++c) out << "---:|";
  out << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << "| " << display_setting_name(table[r].setting) << " |";
    const auto values = table[r].report.values();
    for (std::size_t c = 0; c < values.size(); ++c) {
      const std::string cell = one_decimal(values[c]);
      out << ' ' << (bold[r][c] ? "**" + cell + "**" : cell) << " |";
    }
    out << '\n';
  }
  return out.str();
}

ResultsTable parse_table_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  ResultsTable table;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (header) {
      header = false;
      if (fields.size() != kMetricColumns.size() + 1) throw ArgumentError("CSV header must have 9 columns");
      for (std::size_t c = 0; c < kMetricColumns.size(); ++c)
        if (fields[c + 1] != kMetricColumns[c]) throw ArgumentError("unexpected CSV column: " + fields[c + 1]);
      continue;
    }
    if (fields.size() != kMetricColumns.size() + 1)
      throw ArgumentError("CSV row needs 9 fields: " + line);
    std::array<double, 8> v{};
    for (std::size_t c = 0; c < v.size(); ++c) {
      std::size_t used = 0;
      try {
        v[c] = std::stod(fields[c + 1], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[c + 1].size()) throw ArgumentError("not a number: '" + fields[c + 1] + "'");
    }
    table.push_back({fields[0], MetricReport::from_values(v)});
  }
  if (header) throw ArgumentError("CSV has no header");
  return table;
}

}  // namespace mvforge
