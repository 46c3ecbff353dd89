// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures, so ctest fails when any criterion does.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.h"
#include "mvforge/audio_features.h"
#include "mvforge/corpus.h"
#include "mvforge/dataset.h"
#include "mvforge/description.h"
#include "mvforge/eval.h"
#include "mvforge/media.h"
#include "mvforge/metrics.h"
#include "mvforge/synth.h"
#include "oracles.h"
#include "tempdir.h"

namespace fs = std::filesystem;
using namespace mvforge;
using test_support::run_cli_args;
using test_support::TempDir;

namespace {

// Tolerances and sizes, pinned.
constexpr int kRougeCases = 12000;
constexpr double kRougeBudgetS = 60.0;
constexpr int kBleuCorpora = 1000;
constexpr double kBleuTolerance = 1e-9;
constexpr int kBertCases = 1000;
constexpr double kBertTolerance = 1e-9;
constexpr double kTempoToleranceBpm = 2.0;
constexpr int kKeysRequired = 22;
constexpr double kDownbeatToleranceS = 0.070;
constexpr double kChordAccuracyRequired = 0.90;
constexpr double kAudioBudgetS = 120.0;
constexpr std::size_t kBreakdownPer30s = 15;
constexpr const char* kCreatedAt = "2024-01-01T00:00:00Z";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

oracle::Tokens random_tokens(std::mt19937& rng, std::size_t min_len, std::size_t max_len, int symbols) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> sym(0, symbols - 1);
  oracle::Tokens t(len(rng));
  for (auto& s : t) s = std::string(1, static_cast<char>('a' + sym(rng)));
  return t;
}

// Copy of `ref` with a few substitutions, deletions and insertions, so
// corpora reach nonzero 4-gram precision often enough to exercise it.
oracle::Tokens mutate(std::mt19937& rng, const oracle::Tokens& ref, int symbols) {
  oracle::Tokens out;
  std::uniform_int_distribution<int> op(0, 9), sym(0, symbols - 1);
  for (const auto& t : ref) {
    const int o = op(rng);
    if (o == 0) continue;
    out.push_back(o == 1 ? std::string(1, static_cast<char>('a' + sym(rng))) : t);
    if (o == 2) out.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
  }
  if (out.empty()) out.push_back("a");
  return out;
}

// ---- 1. metric oracles

Outcome metric_oracles() {
  std::mt19937 rng(20240101);

  const auto t0 = Clock::now();
  int rouge_mismatch = 0;
  for (int i = 0; i < kRougeCases; ++i) {
    const auto a = random_tokens(rng, 0, 8, 4), b = random_tokens(rng, 0, 8, 4);
    const std::size_t lcs = oracle::lcs_by_enumeration(a, b);
    const PrfScore s = rouge_l(a, b);
    double p = 0, r = 0, f = 0;
    if (!a.empty() && !b.empty() && lcs > 0) {
      p = 100.0 * static_cast<double>(lcs) / static_cast<double>(a.size());
      r = 100.0 * static_cast<double>(lcs) / static_cast<double>(b.size());
      f = 2.0 * p * r / (p + r);
    }
    if (lcs_length(a, b) != lcs || std::abs(s.precision - p) > 1e-9 || std::abs(s.recall - r) > 1e-9 ||
        std::abs(s.f1 - f) > 1e-9)
      ++rouge_mismatch;
  }
  const double rouge_s = seconds_since(t0);

  int bleu_mismatch = 0, bleu4_nonzero = 0;
  double bleu_worst = 0.0;
  for (int c = 0; c < kBleuCorpora; ++c) {
    std::vector<oracle::Tokens> cands, refs;
    const int pairs = 1 + c % 5;
    for (int p = 0; p < pairs; ++p) {
      refs.push_back(random_tokens(rng, 1, 12, 4));
      cands.push_back(c % 2 ? mutate(rng, refs.back(), 4) : random_tokens(rng, 1, 12, 4));
    }
    for (int n = 1; n <= 4; ++n) {
      const double got = bleu(cands, refs, n), want = oracle::bleu_by_counting(cands, refs, n);
      bleu_worst = std::max(bleu_worst, std::abs(got - want));
      if (std::abs(got - want) > kBleuTolerance) ++bleu_mismatch;
      if (n == 4 && want > 0.0) ++bleu4_nonzero;
    }
  }

  int bert_mismatch = 0;
  const OneHotEmbedder onehot({"a", "b", "c", "d", "e", "f"});
  for (int i = 0; i < kBertCases; ++i) {
    const auto cand = random_tokens(rng, 1, 10, 6), ref = random_tokens(rng, 1, 10, 6);
    const PrfScore s = bert_score(cand, ref, onehot);
    const oracle::Prf o = oracle::bertscore_onehot_by_counting(cand, ref);
    if (std::abs(s.precision - o.p) > kBertTolerance || std::abs(s.recall - o.r) > kBertTolerance ||
        std::abs(s.f1 - o.f) > kBertTolerance)
      ++bert_mismatch;
  }

  Outcome out;
  out.pass = rouge_mismatch == 0 && rouge_s < kRougeBudgetS && bleu_mismatch == 0 && bleu4_nonzero > 0 &&
             bert_mismatch == 0;
  out.detail = "ROUGE-L " + std::to_string(kRougeCases) + " cases, " + std::to_string(rouge_mismatch) +
               " mismatches in " + fmt("%.2f", rouge_s) + " s; BLEU " + std::to_string(kBleuCorpora) +
               " corpora x n=1..4, " + std::to_string(bleu_mismatch) + " mismatches (max |diff| " +
               fmt("%.1e", bleu_worst) + ", " + std::to_string(bleu4_nonzero) + " nonzero BLEU-4); BERTScore " +
               std::to_string(kBertCases) + " cases, " + std::to_string(bert_mismatch) + " mismatches";
  return out;
}

// ---- shared toy pipeline (criteria 2, 5 and 6)

struct ToyWorkspace {
  TempDir root{"mvforge-accept"};
  fs::path manifest;
  std::string failure;

  ToyWorkspace() {
    synth::ToyCorpusOptions o;
    o.tracks = 10;
    o.duration_s = 30.0;
    manifest = synth::write_toy_corpus(root / "toy", o);
  }

  // ingest -> filter -> split in a fresh output directory; "" on success.
  std::string prepare(const fs::path& out, int jobs) {
    const std::string j = std::to_string(jobs);
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"--out", out.string(), "--jobs", j, "ingest", "--manifest", manifest.string()},
             {"--out", out.string(), "--jobs", j, "filter"},
             {"--out", out.string(), "--jobs", j, "split", "--train-count", "7", "--seed", "3"}}) {
      const auto r = run_cli_args(args);
      if (r.code != kExitOk) return args[4] + " exited " + std::to_string(r.code) + ": " + r.err;
    }
    return "";
  }
};

ToyWorkspace& toy() {
  static ToyWorkspace w;
  return w;
}

// ---- 2. identity bound

Outcome identity_bound(const fs::path& test_jsonl) {
  Outcome out;
  if (!fs::exists(test_jsonl)) {
    out.detail = "missing " + test_jsonl.string();
    return out;
  }
  const ReferenceSet refs = load_references(test_jsonl);
  PredictionSet same{"1234", refs.track_ids, {}};
  for (const auto& id : refs.track_ids) same.predictions.push_back(refs.texts.at(id));

  std::vector<std::string> texts;
  for (const auto& [id, t] : refs.texts) texts.push_back(t);
  const HashedEmbedder hashed;
  const OneHotEmbedder onehot = OneHotEmbedder::from_texts(texts);
  bool all_hundred = true;
  std::string shown;
  for (const Embedder* e : {static_cast<const Embedder*>(&hashed), static_cast<const Embedder*>(&onehot)}) {
    const ResultsTable t = run_evaluation({same}, refs, *e, 4);
    const std::string csv = render_table(t, TableFormat::Csv, 0);
    const std::string row = csv.substr(csv.find('\n') + 1);
    all_hundred = all_hundred && row == "1234,100.0,100.0,100.0,100.0,100.0,100.0,100.0,100.0\n";
    for (double v : t[0].report.rounded().values()) all_hundred = all_hundred && v == 100.0;
    if (shown.empty()) shown = row.substr(0, row.size() - 1);
  }
  out.pass = all_hundred && !refs.track_ids.empty();
  out.detail = std::to_string(refs.track_ids.size()) + " test pairs, hashed and one-hot embedders -> " + shown;
  return out;
}

// ---- 3. results table fixture

Outcome table_fixture() {
  Outcome out;
  const ResultsTable table = parse_table_csv(slurp(MVFORGE_TABLE_FIXTURE));
  const std::string md = render_table(table, TableFormat::Markdown, 3);

  // Bold cells as printed in the published table: the same three rows in
  // every column.
  const std::set<std::string> bold_rows = {"1234", "123", "134"};
  std::map<std::string, std::vector<std::string>> cells;
  std::istringstream in(md);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::size_t row = 0;
  while (std::getline(in, line) && row < table.size()) {
    std::vector<std::string> parts;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, '|');) {
      const auto b = cell.find_first_not_of(' ');
      if (b == std::string::npos) continue;
      parts.push_back(cell.substr(b, cell.find_last_not_of(' ') - b + 1));
    }
    parts.erase(parts.begin());
    cells[table[row].setting] = parts;
    ++row;
  }

  int wrong = 0;
  for (const auto& r : table)
    for (std::size_t c = 0; c < kMetricColumns.size(); ++c) {
      const std::string& cell = cells[r.setting].at(c);
      const bool bold = cell.size() > 4 && cell.rfind("**", 0) == 0;
      if (bold != (bold_rows.count(r.setting) > 0)) ++wrong;
    }

  const std::vector<std::string> baseline = {"8.3", "0.2", "20.7", "9.2", "11.8", "80.9", "76.5", "78.6"};
  const bool baseline_ok = cells["baseline"] == baseline;
  out.pass = table.size() == 11 && wrong == 0 && baseline_ok;
  std::string shown;
  for (const auto& c : cells["baseline"]) shown += (shown.empty() ? "" : ", ") + c;
  out.detail = std::to_string(table.size()) + " rows, " + std::to_string(wrong) +
               " cells with wrong emphasis; baseline renders " + shown;
  return out;
}

// ---- 4. audio features on synthetic signals

Outcome audio_features() {
  const auto t0 = Clock::now();
  constexpr double rate = 22050.0;

  synth::ClickTrack click;
  click.bpm = 120.0;
  click.duration_s = 30.0;
  click.sample_rate = rate;
  const double tempo = estimate_tempo(onset_envelope(synth::click_track(click))).bpm;
  const bool tempo_ok = std::abs(tempo - 120.0) <= kTempoToleranceBpm;

  int keys_ok = 0;
  for (int pc = 0; pc < 12; ++pc)
    for (Mode mode : {Mode::Major, Mode::Minor}) {
      const KeyEstimate k = estimate_key(chroma(synth::scale_clip(57 + pc, mode, 0.4, rate)));
      keys_ok += k.key == Key{(9 + pc) % 12, mode} ? 1 : 0;
    }

  // Accented 4/4 with the first beat off the frame grid.
  synth::ClickTrack accented = click;
  accented.accent_db = 8.0;
  accented.offset_s = 0.333;
  const AudioBuffer acc_audio = synth::click_track(accented);
  const OnsetEnvelope env = onset_envelope(acc_audio);
  const BeatGrid grid = track_beats(env, estimate_tempo(env).bpm, 4);
  const double bar_s = 4 * 60.0 / accented.bpm;
  double worst_db = 0.0;
  for (double d : grid.downbeats_s) {
    const double k = std::round((d - accented.offset_s) / bar_s);
    worst_db = std::max(worst_db, std::abs(d - (accented.offset_s + k * bar_s)));
  }
  const auto expected_bars = static_cast<std::size_t>(std::floor((click.duration_s - accented.offset_s) / bar_s));
  const bool downbeats_ok =
      worst_db <= kDownbeatToleranceS && grid.downbeats_s.size() + 1 >= expected_bars;

  // Sustained triads under a click at 100 BPM; labels read per beat interval
  // from the full extraction chain.
  const double beat = 0.6;
  const std::vector<synth::TriadSpan> spans = {{0, Mode::Major, 4}, {9, Mode::Minor, 4}, {5, Mode::Major, 4},
                                               {7, Mode::Major, 4}, {2, Mode::Minor, 4}, {4, Mode::Minor, 4},
                                               {10, Mode::Major, 4}, {3, Mode::Major, 4}};
  AudioBuffer triads = synth::triad_sequence(spans, beat, rate, 0.15);
  synth::ClickTrack pulse = click;
  pulse.bpm = 60.0 / beat;
  pulse.duration_s = triads.duration_s();
  pulse.amplitude = 0.3;
  synth::mix_into(triads, synth::click_track(pulse));
  const LowLevelFeatures f = extract_all(triads);
  int chord_ok = 0, chord_total = 0;
  for (std::size_t s = 0; s < spans.size(); ++s)
    for (int b = 0; b < spans[s].beats; ++b, ++chord_total) {
      const double mid = (static_cast<double>(s * 4 + static_cast<std::size_t>(b)) + 0.5) * beat;
      for (const auto& seg : f.chords)
        if (mid >= seg.start_s && mid < seg.end_s) chord_ok += seg.label == chord_label(spans[s].root, spans[s].mode);
    }
  const double chord_acc = static_cast<double>(chord_ok) / chord_total;

  const double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = tempo_ok && keys_ok >= kKeysRequired && downbeats_ok && chord_acc >= kChordAccuracyRequired &&
             elapsed < kAudioBudgetS;
  out.detail = "tempo " + fmt("%.2f", tempo) + " BPM; keys " + std::to_string(keys_ok) + "/24; downbeats " +
               std::to_string(grid.downbeats_s.size()) + " (worst offset " + fmt("%.0f", worst_db * 1000) +
               " ms); chords " + std::to_string(chord_ok) + "/" + std::to_string(chord_total) + " beat intervals; " +
               fmt("%.1f", elapsed) + " s";
  return out;
}

// ---- 5. dataset determinism

Outcome dataset_determinism(fs::path& reference_run) {
  Outcome out;
  ToyWorkspace& w = toy();
  std::vector<fs::path> runs;
  for (int jobs : {1, 8})
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = w.root / ("det-j" + std::to_string(jobs) + "-r" + std::to_string(rep));
      if (auto e = w.prepare(dir, jobs); !e.empty()) {
        out.detail = e;
        return out;
      }
      for (const char* mask : {"1234", "14"}) {
        const auto r = run_cli_args(
            {"--out", dir.string(), "--jobs", std::to_string(jobs), "build", "--mask", mask, "--created-at", kCreatedAt});
        if (r.code != kExitOk) {
          out.detail = std::string("build ") + mask + " exited " + std::to_string(r.code) + ": " + r.err;
          return out;
        }
      }
      runs.push_back(dir);
    }
  reference_run = runs.front();

  std::size_t files = 0, differing = 0, lines = 0, bad_lines = 0, bad_breakdowns = 0;
  std::string first_problem;
  for (const char* mask : {"1234", "14"}) {
    for (const char* file : {"train.jsonl", "test.jsonl", "meta.json"}) {
      const std::string base = slurp(runs[0] / "datasets" / mask / file);
      ++files;
      for (std::size_t i = 1; i < runs.size(); ++i)
        if (slurp(runs[i] / "datasets" / mask / file) != base) {
          ++differing;
          if (first_problem.empty()) first_problem = runs[i].filename().string() + "/" + mask + "/" + file + " differs";
        }
    }
    for (const char* file : {"train.jsonl", "test.jsonl"})
      for (const auto& line : lines_of(runs[0] / "datasets" / mask / file)) {
        ++lines;
        const std::string problem = check_example_line(line, AblationMask::parse(mask));
        if (!problem.empty()) {
          ++bad_lines;
          if (first_problem.empty()) first_problem = problem;
          continue;
        }
        if (parse_target(example_from_json_line(line).target).breakdown.size() != kBreakdownPer30s) ++bad_breakdowns;
      }
  }
  out.pass = differing == 0 && bad_lines == 0 && bad_breakdowns == 0 && lines == 20;
  out.detail = std::to_string(runs.size()) + " runs (jobs 1 and 8, twice each), " + std::to_string(files) +
               " files, " + std::to_string(differing) + " differing; " + std::to_string(lines) + " lines, " +
               std::to_string(bad_lines) + " schema failures, " + std::to_string(bad_breakdowns) +
               " targets without " + std::to_string(kBreakdownPer30s) + " breakdown entries" +
               (first_problem.empty() ? "" : " (" + first_problem + ")");
  return out;
}

// ---- 6. ablation inventory

Outcome ablation_inventory(const fs::path& prepared) {
  Outcome out;
  const auto r = run_cli_args({"--out", prepared.string(), "--jobs", "4", "ablate", "--created-at", kCreatedAt});
  if (r.code != kExitOk) {
    out.detail = "ablate exited " + std::to_string(r.code) + ": " + r.err;
    return out;
  }
  const auto run = nlohmann::json::parse(slurp(prepared / "runs" / "ablate.json"));
  std::vector<std::string> emitted;
  for (const auto& d : run["datasets"]) emitted.push_back(d["name"].get<std::string>());

  std::set<std::string> dirs;
  for (const auto& e : fs::directory_iterator(prepared / "datasets")) dirs.insert(e.path().filename().string());

  // Canonical names follow the published table rows after the baseline.
  const ResultsTable fixture = parse_table_csv(slurp(MVFORGE_TABLE_FIXTURE));
  std::vector<std::string> expected;
  for (const auto& row : fixture)
    if (row.setting != "baseline") expected.push_back(row.setting);

  bool sanity_ok = true;
  for (const char* s : {"sanity_1234", "sanity_14"}) {
    const fs::path d = prepared / "datasets" / s;
    sanity_ok = sanity_ok && !fs::exists(d / "train.jsonl");
    for (const auto& line : lines_of(d / "test.jsonl"))
      sanity_ok = sanity_ok && check_example_line(line, AblationMask::none()).empty();
    const auto meta = nlohmann::json::parse(slurp(d / "meta.json"));
    sanity_ok = sanity_ok && meta["sanity"] == true && meta["mask"] == "";
  }
  out.pass = emitted == expected && dirs.size() == expected.size() && sanity_ok;
  std::string shown;
  for (const auto& n : emitted) shown += (shown.empty() ? "" : " ") + n;
  out.detail = std::to_string(emitted.size()) + " datasets: " + shown + (sanity_ok ? "" : "; sanity sets malformed");
  return out;
}

// ---- 7. static filter

Outcome static_filter() {
  Outcome out;
  TempDir dir("mvforge-static");
  write_wav(dir / "a.wav", synth::silence(6.0, 16000));
  write_luma_video(dir / "frozen.avi", synth::identical_frames(30, 96, 64, 128), 5.0);
  write_luma_video(dir / "moving.avi", synth::moving_square(30, 96, 64, 20, 3), 5.0);
  std::ofstream(dir / "m.tsv") << "frozen\ta.wav\tfrozen.avi\tpop\t-\t-\t-\n"
                                  "moving\ta.wav\tmoving.avi\tpop\t-\t-\t-\n";
  const Corpus c = ingest_catalog(dir / "m.tsv");
  const FilterResult once = filter_static_mvs(c, {});
  const FilterResult twice = filter_static_mvs(once.corpus, {});
  const bool excluded = once.report.excluded.size() == 1 && once.report.excluded[0].track_id == "frozen";
  const bool retained = once.corpus.ids() == std::vector<std::string>{"moving"};
  const bool idempotent = twice.corpus == once.corpus && twice.report.excluded_static == 0;
  out.pass = c.size() == 2 && excluded && retained && idempotent;
  out.detail = "motion frozen " + fmt("%.2f", once.report.motion.count("frozen") ? once.report.motion.at("frozen") : -1) +
               ", moving " + fmt("%.2f", once.report.motion.count("moving") ? once.report.motion.at("moving") : -1) +
               "; excluded " + (excluded ? "frozen" : "?") + ", retained " + (retained ? "moving" : "?") +
               ", second pass " + (idempotent ? "unchanged" : "changed");
  return out;
}

// ---- 8. split arithmetic

Outcome split_arithmetic() {
  Outcome out;
  std::vector<std::string> ids;
  for (int i = 0; i < 56446; ++i) ids.push_back("track" + std::to_string(i));
  const CorpusSplit a = split_ids(ids, 55000, 17);
  const CorpusSplit b = split_ids(ids, 55000, 17);
  std::set<std::string> all(a.train_ids.begin(), a.train_ids.end());
  all.insert(a.test_ids.begin(), a.test_ids.end());
  out.pass = a.test_ids.size() == 1446 && a.train_ids.size() == 55000 && a == b && all.size() == ids.size();
  out.detail = "train " + std::to_string(a.train_ids.size()) + ", test " + std::to_string(a.test_ids.size()) +
               ", same seed " + (a == b ? "identical" : "different") + ", " + std::to_string(all.size()) +
               " distinct ids";
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.detail = std::string("threw: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  };

  fs::path det_run;
  report(1, "metric oracles", metric_oracles);
  report(5, "dataset determinism", [&] { return dataset_determinism(det_run); });
  report(2, "identity bound", [&] { return identity_bound(det_run / "datasets" / "1234" / "test.jsonl"); });
  report(3, "results table fixture", table_fixture);
  report(4, "audio features on synthetic signals", audio_features);
  report(6, "ablation inventory", [&] {
    const fs::path dir = toy().root / "ablate";
    if (auto e = toy().prepare(dir, 4); !e.empty()) return Outcome{false, e};
    return ablation_inventory(dir);
  });
  report(7, "static filter", static_filter);
  report(8, "split arithmetic", split_arithmetic);
  return failures;
}
