#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "mvforge/corpus.h"
#include "mvforge/error.h"
#include "mvforge/media.h"
#include "mvforge/synth.h"
#include "tempdir.h"

using namespace mvforge;
using test_support::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Two good tracks (one moving MV, one frozen MV), one without MV, and a few
// broken lines.
std::filesystem::path small_catalog(const TempDir& dir) {
  write_wav(dir / "a.wav", synth::silence(4.0, 16000));
  write_wav(dir / "b.wav", synth::silence(6.0, 16000));
  write_wav(dir / "c.wav", synth::silence(3.0, 16000));
  const auto moving = synth::moving_square(20, 64, 48, 16, 3);
  const auto frozen = synth::identical_frames(20, 64, 48, 120);
  write_luma_video(dir / "a.avi", moving, 5.0);
  write_luma_video(dir / "b.avi", frozen, 5.0);
  write_text(dir / "a.txt", "la la la\n");
  write_text(dir / "broken.wav", "not a wav");
  const auto manifest = dir / "manifest.tsv";
  write_text(manifest,
             "# id\taudio\tvideo\tgenres\tenergy\tvalence\tlyrics\n"
             "a\ta.wav\ta.avi\tpop; dance\t0.5\t0.25\ta.txt\n"
             "b\tb.wav\tb.avi\trock\t-\t-\t-\n"
             "\n"
             "c\tc.wav\t-\t\t\t\t-\n"
             "d\tbroken.wav\t-\tpop\t0.1\t0.1\t-\n"
             "e\ta.wav\t-\tpop\t1.5\t0.1\t-\n"
             "f\ta.wav\tmissing.avi\tpop\t0.1\t0.1\t-\n"
             "g\ta.wav\n");
  return manifest;
}

}  // namespace

TEST(Ingest, AcceptsGoodLinesAndRejectsTheRest) {
  TempDir dir;
  const Corpus c = ingest_catalog(small_catalog(dir), 3);
  EXPECT_EQ(c.ids(), (std::vector<std::string>{"a", "b", "c"}));
  const TrackRecord* a = c.find_track("a");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->genre_tags, (std::vector<std::string>{"pop", "dance"}));
  EXPECT_EQ(a->energy, 0.5);
  EXPECT_EQ(a->valence, 0.25);
  EXPECT_EQ(a->lyrics, "la la la\n");
  EXPECT_FALSE(c.find_track("b")->energy.has_value());
  EXPECT_FALSE(c.find_track("b")->lyrics.has_value());
  ASSERT_NE(c.find_mv("a"), nullptr);
  EXPECT_NEAR(c.find_mv("a")->duration_s, 4.0, 1e-9);
  EXPECT_EQ(c.find_mv("c"), nullptr);

  std::vector<std::string> rejected;
  for (const auto& r : c.rejects()) rejected.push_back(r.track_id);
  EXPECT_EQ(rejected, (std::vector<std::string>{"d", "e", "f", "g"}));
  EXPECT_EQ(c.rejects()[0].reason.rfind("audio: ", 0), 0u);
  EXPECT_NE(c.rejects()[1].reason.find("energy out of [0,1]"), std::string::npos);
  EXPECT_EQ(c.rejects()[2].reason.rfind("video: ", 0), 0u);
  EXPECT_NE(c.rejects()[3].reason.find("expected 7"), std::string::npos);
}

TEST(Ingest, SameResultForAnyJobCount) {
  TempDir dir;
  const auto m = small_catalog(dir);
  EXPECT_EQ(ingest_catalog(m, 1), ingest_catalog(m, 8));
}

TEST(Ingest, DuplicateIdIsFatal) {
  TempDir dir;
  write_wav(dir / "a.wav", synth::silence(1.0, 16000));
  write_text(dir / "m.tsv", "a\ta.wav\t-\t\t\t\t-\na\ta.wav\t-\t\t\t\t-\n");
  EXPECT_THROW(ingest_catalog(dir / "m.tsv"), IngestError);
  EXPECT_THROW(ingest_catalog(dir / "nope.tsv"), IngestError);
}

TEST(Corpus, ConstructorChecksInvariants) {
  EXPECT_THROW(Corpus({{"a"}, {"a"}}, {}, {}), IngestError);
  EXPECT_THROW(Corpus({{"a"}}, {{"b", "v.avi", 1.0}}, {}), IngestError);
  EXPECT_THROW(Corpus({{"a"}}, {{"a", "v.avi", 0.0}}, {}), IngestError);
  TrackRecord t{"a"};
  t.energy = 2.0;
  EXPECT_THROW(Corpus({t}, {}, {}), IngestError);
}

TEST(Corpus, StoreRoundTrip) {
  TempDir dir;
  const Corpus c = ingest_catalog(small_catalog(dir));
  save_corpus(c, dir / "corpus.jsonl");
  // Rejects live in their own file.
  EXPECT_EQ(load_corpus(dir / "corpus.jsonl"), Corpus(c.tracks(), c.mvs(), {}));
}

TEST(StaticFilter, ExcludesFrozenKeepsMovingDropsNoMv) {
  TempDir dir;
  const Corpus c = ingest_catalog(small_catalog(dir));
  const FilterResult r = filter_static_mvs(c, {}, 2);
  EXPECT_EQ(r.corpus.ids(), (std::vector<std::string>{"a"}));
  EXPECT_EQ(r.report.retained, 1u);
  EXPECT_EQ(r.report.excluded_static, 1u);
  EXPECT_EQ(r.report.excluded_no_mv, 1u);
  ASSERT_EQ(r.report.excluded.size(), 1u);
  EXPECT_EQ(r.report.excluded[0].track_id, "b");
  EXPECT_EQ(r.report.excluded[0].static_flag, true);
  EXPECT_EQ(r.report.motion.at("b"), 0.0);
  EXPECT_GT(r.report.motion.at("a"), 2.0);
  EXPECT_EQ(r.corpus.find_mv("a")->static_flag, false);
}

TEST(StaticFilter, Idempotent) {
  TempDir dir;
  const Corpus c = ingest_catalog(small_catalog(dir));
  const FilterResult once = filter_static_mvs(c, {});
  const FilterResult twice = filter_static_mvs(once.corpus, {});
  EXPECT_EQ(twice.corpus, once.corpus);
  EXPECT_EQ(twice.report.excluded_static, 0u);
}

TEST(StaticFilter, RejectsBadParams) {
  EXPECT_THROW(filter_static_mvs(Corpus{}, {2.0, 1}), ArgumentError);
  EXPECT_THROW(filter_static_mvs(Corpus{}, {0.0, 16}), ArgumentError);
}

TEST(Split, PartitionsAndIsSeeded) {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("t" + std::to_string(i));
  const CorpusSplit a = split_ids(ids, 70, 42);
  EXPECT_EQ(a.train_ids.size(), 70u);
  EXPECT_EQ(a.test_ids.size(), 30u);
  std::set<std::string> all(a.train_ids.begin(), a.train_ids.end());
  all.insert(a.test_ids.begin(), a.test_ids.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(split_ids(ids, 70, 42), a);
  EXPECT_NE(split_ids(ids, 70, 43).test_ids, a.test_ids);
}

TEST(Split, FrozenPermutation) {
  // Pins the shuffle so a change of RNG or bound sampling is noticed.
  const CorpusSplit s = split_ids({"a", "b", "c", "d", "e", "f"}, 4, 7);
  EXPECT_EQ(s.train_ids, (std::vector<std::string>{"f", "b", "e", "c"}));
  EXPECT_EQ(s.test_ids, (std::vector<std::string>{"a", "d"}));
}

TEST(Split, RejectsDegenerateCounts) {
  EXPECT_THROW(split_ids({"a", "b"}, 0, 0), ArgumentError);
  EXPECT_THROW(split_ids({"a", "b"}, 2, 0), ArgumentError);
}

TEST(Split, FileRoundTrip) {
  TempDir dir;
  const CorpusSplit s = split_ids({"a", "b", "c", "d"}, 3, 1);
  write_split(s, dir / "split.tsv");
  const CorpusSplit back = read_split(dir / "split.tsv");
  EXPECT_EQ(back.train_ids, s.train_ids);
  EXPECT_EQ(back.test_ids, s.test_ids);
}

TEST(Rejects, FileRoundTrip) {
  TempDir dir;
  const std::vector<Reject> r = {{"a", "audio: bad"}, {"b", "video: gone"}};
  write_rejects(r, dir / "r.tsv");
  EXPECT_EQ(read_rejects(dir / "r.tsv"), r);
}
