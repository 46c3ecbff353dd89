#include <gtest/gtest.h>

#include <fstream>

#include "mvforge/error.h"
#include "mvforge/eval.h"
#include "tempdir.h"

using namespace mvforge;
using test_support::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

ResultsRow row(const std::string& name, std::array<double, 8> v) { return {name, MetricReport::from_values(v)}; }

}  // namespace

TEST(Loaders, ReferencesAndPredictionsAlign) {
  TempDir dir;
  write_text(dir / "ref.jsonl",
             "{\"track_id\":\"b\",\"target\":\"Overview: B\"}\n{\"track_id\":\"a\",\"target\":\"Overview: A\"}\n");
  const ReferenceSet refs = load_references(dir / "ref.jsonl");
  EXPECT_EQ(refs.track_ids, (std::vector<std::string>{"b", "a"}));
  write_text(dir / "pred.jsonl", "{\"track_id\":\"a\",\"prediction\":\"pa\"}\n{\"track_id\":\"b\",\"prediction\":\"pb\"}\n");
  const PredictionSet p = load_predictions(dir / "pred.jsonl", refs.track_ids, "1234");
  EXPECT_EQ(p.track_ids, refs.track_ids);
  EXPECT_EQ(p.predictions, (std::vector<std::string>{"pb", "pa"}));
}

TEST(Loaders, ErrorsNameTheOffendingId) {
  TempDir dir;
  const std::vector<std::string> ids = {"a", "b"};
  auto message = [&](const std::string& body) {
    write_text(dir / "p.jsonl", body);
    try {
      load_predictions(dir / "p.jsonl", ids, "x");
    } catch (const ArgumentError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("{\"track_id\":\"zz\",\"prediction\":\"p\"}\n").find("unknown track_id: zz"), std::string::npos);
  EXPECT_NE(message("{\"track_id\":\"a\",\"prediction\":\"p\"}\n{\"track_id\":\"a\",\"prediction\":\"q\"}\n")
                .find("duplicate track_id: a"),
            std::string::npos);
  EXPECT_NE(message("{\"track_id\":\"a\",\"prediction\":\"p\"}\n").find("missing predictions for 1 ids: b"),
            std::string::npos);

  write_text(dir / "r.jsonl", "{\"track_id\":\"a\",\"target\":\"x\"}\n{\"track_id\":\"a\",\"target\":\"y\"}\n");
  EXPECT_THROW(load_references(dir / "r.jsonl"), ArgumentError);
}

TEST(RunEvaluation, IdentityIsHundredAcrossSettings) {
  ReferenceSet refs;
  refs.track_ids = {"a", "b"};
  refs.texts = {{"a", "Overview: rain over a city.\nFrame [0..2s]: wet streets."}, {"b", "Overview: sun."}};
  PredictionSet same{"1234", refs.track_ids, {refs.texts["a"], refs.texts["b"]}};
  PredictionSet other{"14", refs.track_ids, {"something else", "Overview: sun."}};
  const ResultsTable t = run_evaluation({same, other}, refs, HashedEmbedder(), 4);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].setting, "1234");
  for (double v : t[0].report.rounded().values()) EXPECT_EQ(v, 100.0);
  EXPECT_LT(t[1].report.bleu1, 100.0);
}

TEST(TopK, TiesAtTheBoundaryAllCount) {
  const ResultsTable t = {row("a", {5, 1, 1, 1, 1, 1, 1, 1}), row("b", {4, 1, 1, 1, 1, 1, 1, 1}),
                          row("c", {4, 1, 1, 1, 1, 1, 1, 1}), row("d", {3, 2, 1, 1, 1, 1, 1, 1})};
  const auto m = top_k_mask(t, 2);
  EXPECT_EQ((std::vector<bool>{m[0][0], m[1][0], m[2][0], m[3][0]}), (std::vector<bool>{true, true, true, false}));
  // Column 1: value 2 once, then three 1s tie for second.
  EXPECT_EQ((std::vector<bool>{m[0][1], m[1][1], m[2][1], m[3][1]}), (std::vector<bool>{true, true, true, true}));
  const auto none = top_k_mask(t, 0);
  for (const auto& r : none)
    for (bool b : r) EXPECT_FALSE(b);
}

TEST(TopK, ComparesOneDecimalValues) {
  const ResultsTable t = {row("a", {10.04, 0, 0, 0, 0, 0, 0, 0}), row("b", {9.96, 0, 0, 0, 0, 0, 0, 0})};
  const auto m = top_k_mask(t, 1);
  EXPECT_TRUE(m[0][0]);
  EXPECT_TRUE(m[1][0]);
}

TEST(Render, DisplayNames) {
  EXPECT_EQ(display_setting_name("1234"), "①+②+③+④");
  EXPECT_EQ(display_setting_name("14"), "①+④");
  EXPECT_EQ(display_setting_name("sanity:14"), "sanity ①+④");
  EXPECT_EQ(display_setting_name("baseline"), "baseline");
}

TEST(Render, MarkdownBoldsTopCells) {
  const ResultsTable t = {row("1234", {42.94, 14.6, 22.9, 23.2, 22.7, 87.4, 86.4, 86.9}),
                          row("baseline", {8.3, 0.2, 20.7, 9.2, 11.8, 80.9, 76.5, 78.6})};
  const std::string md = render_table(t, TableFormat::Markdown, 1);
  EXPECT_NE(md.find("| Setting | BLEU-1 | BLEU | ROUGE-P"), std::string::npos);
  EXPECT_NE(md.find("| ①+②+③+④ | **42.9** | **14.6**"), std::string::npos);
  EXPECT_NE(md.find("| baseline | 8.3 | 0.2 |"), std::string::npos);
  EXPECT_THROW(render_table({}, TableFormat::Csv, 3), ArgumentError);
}

TEST(Render, CsvRoundTrip) {
  const ResultsTable t = {row("1234", {42.9, 14.6, 22.9, 23.2, 22.7, 87.4, 86.4, 86.9}),
                          row("sanity:14", {39.7, 12.5, 20.3, 20.8, 20.3, 86.1, 85.6, 85.9})};
  const std::string csv = render_table(t, TableFormat::Csv, 3);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "setting,BLEU-1,BLEU,ROUGE-P,ROUGE-R,ROUGE-F1,BERT-P,BERT-R,BERT-F1");
  EXPECT_EQ(parse_table_csv(csv), t);
  EXPECT_THROW(parse_table_csv("setting,BLEU-1\nx,1\n"), ArgumentError);
}

TEST(Render, FormatNames) {
  EXPECT_EQ(parse_table_format("markdown"), TableFormat::Markdown);
  EXPECT_EQ(parse_table_format("md"), TableFormat::Markdown);
  EXPECT_EQ(parse_table_format("csv"), TableFormat::Csv);
  EXPECT_THROW(parse_table_format("xlsx"), ArgumentError);
}
