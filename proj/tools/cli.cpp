#include "mvforge/cli.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "mvforge/audio_features.h"
#include "mvforge/config.h"
#include "mvforge/corpus.h"
#include "mvforge/dataset.h"
#include "mvforge/error.h"
#include "mvforge/eval.h"
#include "mvforge/metrics.h"
#include "mvforge/prompts.h"
#include "mvforge/providers.h"
#include "mvforge/synth.h"

namespace mvforge {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Fixed file names inside the output directory; each stage reads what the
// previous one wrote.
constexpr const char* kCorpusFile = "corpus.jsonl";
constexpr const char* kFilteredFile = "filtered.jsonl";
constexpr const char* kSplitFile = "split.tsv";
constexpr const char* kSplitMetaFile = "split.json";
constexpr const char* kFeaturesFile = "features.txt";
constexpr const char* kAnnotationsFile = "annotations.jsonl";
constexpr const char* kDatasetsDir = "datasets";

struct GlobalOptions {
  std::string config_path;
  std::size_t jobs = 1;
  bool dry_run = false;
  std::string out_dir;
};

struct StageOptions {
  std::string manifest;
  std::optional<double> threshold;
  std::optional<int> sample_count;
  std::optional<std::size_t> train_count;
  std::optional<std::uint64_t> seed;
  std::string mask;
  std::string created_at;
  std::string references;
  std::vector<std::string> predictions;
  std::string format = "markdown";
  std::optional<int> top;
  std::string output;
  std::string fixture;
  std::string embedder;
  std::string toy_dir;
  synth::ToyCorpusOptions toy;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Shared state of one command invocation plus its run manifest.
class Session {
 public:
  Session(std::string command, const GlobalOptions& g, std::ostream& out, std::ostream& err)
      : command(std::move(command)), global(g), out(out), err(err), started_(std::chrono::steady_clock::now()) {
    config = g.config_path.empty() ? Config{} : load_config(g.config_path);
    out_dir = g.out_dir.empty() ? config.paths.output_dir : fs::path(g.out_dir);
    manifest_["command"] = this->command;
    manifest_["started_at"] = utc_now();
    manifest_["config_path"] = g.config_path;
    manifest_["config_hash"] = config_hash(config);
    manifest_["jobs"] = g.jobs;
    manifest_["inputs"] = ojson::object();
    manifest_["outputs"] = ojson::array();
    manifest_["counts"] = ojson::object();
  }

  fs::path path(const std::string& name) const { return out_dir / name; }

  fs::path require(const std::string& name, const std::string& producer) {
    const fs::path p = path(name);
    if (!fs::exists(p)) throw ArgumentError(p.string() + " not found; run `mvforge " + producer + "` first");
    input(name, p);
    return p;
  }

  void input(const std::string& key, const fs::path& p) { manifest_["inputs"][key] = p.generic_string(); }
  void output(const fs::path& p) { manifest_["outputs"].push_back(p.generic_string()); }
  void count(const std::string& key, std::size_t n) { manifest_["counts"][key] = n; }
  ojson& extra(const std::string& key) { return manifest_[key]; }

  void write_manifest(int exit_code) {
    manifest_["exit_code"] = exit_code;
    manifest_["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    const fs::path dir = out_dir / "runs";
    fs::create_directories(dir);
    std::ofstream f(dir / (command + ".json"), std::ios::binary | std::ios::trunc);
    f << manifest_.dump(2) << '\n';
  }

  std::string command;
  GlobalOptions global;
  Config config;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;

 private:
  ojson manifest_;
  std::chrono::steady_clock::time_point started_;
};

int finish_with_rejects(Session& s, const std::vector<Reject>& rejects, const std::string& file) {
  const fs::path p = s.path(file);
  write_rejects(rejects, p);
  s.output(p);
  s.count("rejected", rejects.size());
  for (const Reject& r : rejects) s.err << "reject " << r.track_id << ": " << r.reason << '\n';
  return rejects.empty() ? kExitOk : kExitRejects;
}

CorpusSplit load_split(Session& s) {
  CorpusSplit split = read_split(s.require(kSplitFile, "split"));
  const fs::path meta = s.path(kSplitMetaFile);
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    split.seed = nlohmann::json::parse(in).at("seed").get<std::uint64_t>();
  }
  return split;
}

std::vector<std::string> split_order(const CorpusSplit& split) {
  std::vector<std::string> ids = split.train_ids;
  ids.insert(ids.end(), split.test_ids.begin(), split.test_ids.end());
  return ids;
}

PromptLibrary prompts_for(const Session& s) {
  return s.config.paths.prompts_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::load(s.config.paths.prompts_dir);
}

std::shared_ptr<Provider> provider_for(Session& s) {
  const Config& c = s.config;
  std::shared_ptr<Backend> backend;
  if (c.provider.backend == "http") {
    HttpBackendConfig hc;
    hc.base_url = c.provider.base_url;
    hc.model = c.provider.model;
    hc.api_key = resolve_api_key(c);
    hc.timeout_s = c.provider.timeout_s;
    backend = std::make_shared<HttpBackend>(hc);
  } else {
    backend = std::make_shared<MockBackend>(c.provider.seed);
  }
  ProviderOptions opts;
  opts.cache_dir = c.paths.cache_dir.empty() ? s.path("cache") : c.paths.cache_dir;
  opts.retry.max_attempts = c.provider.max_attempts;
  opts.requests_per_minute = c.provider.requests_per_minute;
  opts.max_in_flight = c.provider.max_in_flight;
  s.extra("provider") = {{"backend", backend->id()}, {"cache_dir", opts.cache_dir->generic_string()}};
  return std::make_shared<Provider>(backend, opts);
}

void record_provider_stats(Session& s, const Provider& provider) {
  const ProviderStats st = provider.stats();
  ojson& p = s.extra("provider");
  p["cache_hits"] = st.cache_hits;
  p["cache_misses"] = st.cache_misses;
  p["backend_calls"] = st.backend_calls;
  p["retries"] = st.retries;
  if (const auto* http = dynamic_cast<const HttpBackend*>(&provider.backend()))
    p["network_calls"] = http->network_calls();
  else
    p["network_calls"] = 0;
}

AnnotateOptions annotate_options(const Session& s) {
  AnnotateOptions o;
  o.meter = s.config.audio.meter;
  o.meter_overrides = s.config.audio.meter_overrides;
  o.frame_interval_s = s.config.audio.frame_interval_s;
  o.jobs = s.global.jobs;
  return o;
}

std::map<std::string, LowLevelFeatures> known_features(Session& s) {
  const fs::path p = s.path(kFeaturesFile);
  if (!fs::exists(p)) return {};
  s.input("features", p);
  return read_feature_dump(p);
}

std::map<std::string, TrackAnnotation> known_annotations(Session& s) {
  const fs::path p = s.path(kAnnotationsFile);
  if (!fs::exists(p)) return {};
  s.input("annotations", p);
  return read_annotations(p);
}

// ---- subcommands

int cmd_ingest(Session& s, const StageOptions& o) {
  const fs::path manifest = !o.manifest.empty() ? fs::path(o.manifest) : s.config.paths.manifest;
  if (manifest.empty()) throw ArgumentError("no manifest given (--manifest or paths.manifest)");
  if (s.global.dry_run) {
    s.out << "dry run: ingest " << manifest.string() << " -> " << s.path(kCorpusFile).string() << '\n';
    return kExitOk;
  }
  s.input("manifest", manifest);
  const Corpus corpus = ingest_catalog(manifest, s.global.jobs);
  fs::create_directories(s.out_dir);
  save_corpus(corpus, s.path(kCorpusFile));
  s.output(s.path(kCorpusFile));
  s.count("accepted", corpus.size());
  s.out << "accepted " << corpus.size() << ", rejected " << corpus.rejects().size() << '\n';
  return finish_with_rejects(s, corpus.rejects(), "ingest_rejects.tsv");
}

int cmd_filter(Session& s, const StageOptions& o) {
  StaticFilterParams params;
  params.threshold = o.threshold.value_or(s.config.audio.static_threshold);
  params.sample_count = o.sample_count.value_or(s.config.audio.sample_count);
  const Corpus corpus = load_corpus(s.require(kCorpusFile, "ingest"));
  if (s.global.dry_run) {
    s.out << "dry run: filter " << corpus.mvs().size() << " videos (threshold " << params.threshold << ", "
          << params.sample_count << " frames)\n";
    return kExitOk;
  }
  const FilterResult r = filter_static_mvs(corpus, params, s.global.jobs);
  save_corpus(r.corpus, s.path(kFilteredFile));
  s.output(s.path(kFilteredFile));

  ojson report;
  report["threshold"] = params.threshold;
  report["sample_count"] = params.sample_count;
  report["retained"] = r.report.retained;
  report["excluded_static"] = r.report.excluded_static;
  report["excluded_no_mv"] = r.report.excluded_no_mv;
  report["rejected"] = r.report.rejected;
  report["motion"] = r.report.motion;
  ojson flags = ojson::object();
  for (const MvRecord& mv : r.corpus.mvs()) flags[mv.track_id] = false;
  for (const MvRecord& mv : r.report.excluded) flags[mv.track_id] = true;
  report["static_flag"] = flags;
  std::ofstream(s.path("filter_report.json"), std::ios::binary) << report.dump(2) << '\n';
  s.output(s.path("filter_report.json"));

  s.count("retained", r.report.retained);
  s.count("excluded_static", r.report.excluded_static);
  s.count("excluded_no_mv", r.report.excluded_no_mv);
  s.out << "retained " << r.report.retained << ", excluded static " << r.report.excluded_static << ", no video "
        << r.report.excluded_no_mv << ", rejected " << r.report.rejected << '\n';
  const auto& all = r.corpus.rejects();
  const std::vector<Reject> fresh(all.begin() + static_cast<std::ptrdiff_t>(corpus.rejects().size()), all.end());
  return finish_with_rejects(s, fresh, "filter_rejects.tsv");
}

int cmd_split(Session& s, const StageOptions& o) {
  const std::size_t train_count = o.train_count.value_or(s.config.split.train_count);
  const std::uint64_t seed = o.seed.value_or(s.config.split.seed);
  const Corpus corpus = load_corpus(s.require(kFilteredFile, "filter"));
  if (s.global.dry_run) {
    s.out << "dry run: split " << corpus.size() << " ids, train " << train_count << ", seed " << seed << '\n';
    return kExitOk;
  }
  const CorpusSplit split = split_corpus(corpus, train_count, seed);
  write_split(split, s.path(kSplitFile));
  const ojson meta = {{"seed", seed},
                      {"train_count", split.train_ids.size()},
                      {"test_count", split.test_ids.size()},
                      {"strategy", "seeded uniform shuffle"}};
  std::ofstream(s.path(kSplitMetaFile), std::ios::binary) << meta.dump(2) << '\n';
  s.output(s.path(kSplitFile));
  s.output(s.path(kSplitMetaFile));
  s.count("train", split.train_ids.size());
  s.count("test", split.test_ids.size());
  s.out << "train " << split.train_ids.size() << ", test " << split.test_ids.size() << " (seed " << seed << ")\n";
  return kExitOk;
}

int cmd_features(Session& s, const StageOptions&) {
  const Corpus corpus = load_corpus(s.require(kFilteredFile, "filter"));
  const std::vector<std::string> ids = split_order(load_split(s));
  if (s.global.dry_run) {
    s.out << "dry run: extract features for " << ids.size() << " tracks\n";
    return kExitOk;
  }
  const FeatureStageResult r = extract_corpus_features(corpus, ids, annotate_options(s));
  write_feature_dump(r.features, ids, s.path(kFeaturesFile));
  s.output(s.path(kFeaturesFile));
  s.count("features", r.features.size());
  s.out << "features " << r.features.size() << ", rejected " << r.rejects.size() << '\n';
  return finish_with_rejects(s, r.rejects, "features_rejects.tsv");
}

int cmd_caption(Session& s, const StageOptions&) {
  const Corpus corpus = load_corpus(s.require(kFilteredFile, "filter"));
  const std::vector<std::string> ids = split_order(load_split(s));
  const auto features = known_features(s);
  if (s.global.dry_run) {
    s.out << "dry run: annotate " << ids.size() << " tracks (" << features.size() << " with known features)\n";
    return kExitOk;
  }
  const auto provider = provider_for(s);
  const PromptLibrary prompts = prompts_for(s);
  const AnnotateResult r = annotate_corpus(corpus, ids, *provider, prompts, annotate_options(s), features);
  write_annotations(r.annotations, ids, s.path(kAnnotationsFile));
  s.output(s.path(kAnnotationsFile));
  record_provider_stats(s, *provider);
  s.extra("prompt_hashes") = prompts.hashes();
  s.count("annotated", r.annotations.size());
  s.out << "annotated " << r.annotations.size() << ", rejected " << r.rejects.size() << '\n';
  return finish_with_rejects(s, r.rejects, "caption_rejects.tsv");
}

int cmd_build(Session& s, const StageOptions& o, bool all_masks) {
  const Corpus corpus = load_corpus(s.require(kFilteredFile, "filter"));
  const CorpusSplit split = load_split(s);
  const AblationMask mask = all_masks ? AblationMask::all() : AblationMask::parse(o.mask);
  if (!all_masks && mask.empty()) throw ArgumentError("--mask must name at least one input (1-4)");
  const fs::path out_dir = s.path(kDatasetsDir);
  if (s.global.dry_run) {
    s.out << "dry run: " << (all_masks ? "ablation suite" : "dataset " + mask.name()) << " over "
          << split.train_ids.size() << " train / " << split.test_ids.size() << " test ids -> " << out_dir.string()
          << '\n';
    return kExitOk;
  }
  const auto provider = provider_for(s);
  const PromptLibrary prompts = prompts_for(s);
  BuildContext ctx{corpus, split, *provider, prompts, annotate_options(s), {}, known_features(s), known_annotations(s)};
  ctx.dataset.output_dir = out_dir;
  ctx.dataset.seed = split.seed;
  ctx.dataset.prompt_hashes = prompts.hashes();
  ctx.dataset.created_at = o.created_at;
  ctx.dataset.frame_interval_s = s.config.audio.frame_interval_s;

  const BuildReport report = all_masks ? ablation_suite(ctx) : build_dataset(ctx, mask);
  record_provider_stats(s, *provider);
  ojson datasets = ojson::array();
  for (const DatasetSummary& d : report.datasets) {
    datasets.push_back({{"name", d.name}, {"dir", d.dir.generic_string()}, {"train", d.train_count}, {"test", d.test_count}});
    s.output(d.dir);
    if (d.sanity)
      s.out << d.name << ": test " << d.test_count << '\n';
    else
      s.out << d.name << ": train " << d.train_count << ", test " << d.test_count << '\n';
  }
  s.extra("datasets") = datasets;
  s.count("datasets", report.datasets.size());
  s.count("annotated", report.annotations.size());
  return finish_with_rejects(s, report.rejects, all_masks ? "ablate_rejects.tsv" : "build_rejects.tsv");
}

std::unique_ptr<Embedder> embedder_for(const Session& s, const std::string& override_name,
                                       const std::vector<std::string>& texts) {
  const std::string name = override_name.empty() ? s.config.eval.embedder : override_name;
  if (name == "hashed") return std::make_unique<HashedEmbedder>(s.config.eval.embedding_dim);
  if (name == "onehot") return std::make_unique<OneHotEmbedder>(OneHotEmbedder::from_texts(texts));
  if (name == "http") {
    HttpEmbedderConfig hc;
    hc.base_url = s.config.provider.base_url;
    hc.model = s.config.eval.embedding_model;
    hc.api_key = resolve_api_key(s.config);
    hc.timeout_s = s.config.provider.timeout_s;
    return std::make_unique<HttpEmbedder>(hc);
  }
  throw ArgumentError("unknown embedder: " + name);
}

void emit(Session& s, const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    s.out << text;
    return;
  }
  std::ofstream f(output, std::ios::binary | std::ios::trunc);
  if (!f) throw ArgumentError("cannot write " + output);
  f << text;
  s.output(output);
}

int cmd_evaluate(Session& s, const StageOptions& o) {
  const fs::path refs_path = o.references.empty() ? s.path(kDatasetsDir) / "1234" / "test.jsonl" : fs::path(o.references);
  if (o.predictions.empty()) throw ArgumentError("at least one --predictions [NAME=]PATH is required");
  s.input("references", refs_path);
  const ReferenceSet refs = load_references(refs_path);

  std::vector<PredictionSet> sets;
  for (const std::string& spec : o.predictions) {
    const auto eq = spec.find('=');
    const fs::path p = eq == std::string::npos ? fs::path(spec) : fs::path(spec.substr(eq + 1));
    const std::string name = eq == std::string::npos ? p.stem().string() : spec.substr(0, eq);
    s.input("predictions:" + name, p);
    sets.push_back(load_predictions(p, refs.track_ids, name));
  }
  if (s.global.dry_run) {
    s.out << "dry run: score " << sets.size() << " prediction sets against " << refs.track_ids.size() << " references\n";
    return kExitOk;
  }
  std::vector<std::string> texts;
  for (const auto& [id, t] : refs.texts) texts.push_back(t);
  for (const PredictionSet& ps : sets) texts.insert(texts.end(), ps.predictions.begin(), ps.predictions.end());
  const auto embedder = embedder_for(s, o.embedder, texts);

  const ResultsTable table = run_evaluation(sets, refs, *embedder, s.global.jobs);
  const int top = o.top.value_or(s.config.eval.highlight_top);
  emit(s, render_table(table, parse_table_format(o.format), top), o.output);
  s.extra("metrics") = {{"tokenizer", std::string(kTokenizerVersion)},
                        {"bleu", "corpus-level, no smoothing"},
                        {"rouge_l", "macro mean over pairs"},
                        {"bertscore", "greedy, no idf, no rescaling"},
                        {"embedder", embedder->id()}};
  ojson rows = ojson::array();
  for (const ResultsRow& r : table) {
    const auto v = r.report.values();
    rows.push_back({{"setting", r.setting}, {"values", std::vector<double>(v.begin(), v.end())}});
  }
  s.extra("results") = rows;
  s.count("settings", table.size());
  s.count("pairs", refs.track_ids.size());
  return kExitOk;
}

int cmd_report(Session& s, const StageOptions& o) {
  if (o.fixture.empty()) throw ArgumentError("--fixture is required");
  std::ifstream in(o.fixture, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + o.fixture);
  std::ostringstream ss;
  ss << in.rdbuf();
  s.input("fixture", o.fixture);
  const ResultsTable table = parse_table_csv(ss.str());
  if (s.global.dry_run) {
    s.out << "dry run: render " << table.size() << " rows\n";
    return kExitOk;
  }
  emit(s, render_table(table, parse_table_format(o.format), o.top.value_or(s.config.eval.highlight_top)), o.output);
  s.count("rows", table.size());
  return kExitOk;
}

int cmd_toy_corpus(Session& s, const StageOptions& o) {
  if (o.toy_dir.empty()) throw ArgumentError("--dir is required");
  if (s.global.dry_run) {
    s.out << "dry run: write " << o.toy.tracks << " toy tracks to " << o.toy_dir << '\n';
    return kExitOk;
  }
  const fs::path manifest = synth::write_toy_corpus(o.toy_dir, o.toy);
  s.output(manifest);
  s.count("tracks", o.toy.tracks);
  s.out << manifest.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Music-video description dataset builder and evaluator", "mvforge"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  StageOptions o;
  app.add_option("--config", g.config_path, "YAML configuration file");
  app.add_option("--jobs", g.jobs, "Per-track parallelism")->check(CLI::Range(1, 1024));
  app.add_flag("--dry-run", g.dry_run, "Print planned work without writing");
  app.add_option("--out", g.out_dir, "Output directory (overrides paths.output_dir)");

  auto* ingest = app.add_subcommand("ingest", "Read a manifest into the corpus store");
  ingest->add_option("--manifest", o.manifest, "Tab-separated manifest");

  auto* filter = app.add_subcommand("filter", "Drop music videos made of static images");
  filter->add_option("--threshold", o.threshold, "Mean luminance change below which a video is static");
  filter->add_option("--sample-count", o.sample_count, "Frames sampled per video");

  auto* split = app.add_subcommand("split", "Seeded train/test split");
  split->add_option("--train-count", o.train_count, "Number of training ids");
  split->add_option("--seed", o.seed, "Shuffle seed");

  auto* features = app.add_subcommand("features", "Tempo, key, downbeats and chords per track");
  auto* caption = app.add_subcommand("caption", "Run the provider chain for every split id");

  auto* build = app.add_subcommand("build", "Write one dataset for a mask");
  build->add_option("--mask", o.mask, "Input sources, e.g. 1234 or 14")->required();
  build->add_option("--created-at", o.created_at, "Timestamp recorded in meta.json");

  auto* ablate = app.add_subcommand("ablate", "Write the eight ablation datasets and the sanity test sets");
  ablate->add_option("--created-at", o.created_at, "Timestamp recorded in meta.json");

  auto* evaluate = app.add_subcommand("evaluate", "Score prediction files against test references");
  evaluate->add_option("--predictions", o.predictions, "[NAME=]PATH, repeatable")->required();
  evaluate->add_option("--references", o.references, "Dataset test file (default datasets/1234/test.jsonl)");
  evaluate->add_option("--format", o.format, "markdown or csv");
  evaluate->add_option("--top", o.top, "Bold the top N values per column");
  evaluate->add_option("--output", o.output, "Write the table here instead of stdout");
  evaluate->add_option("--embedder", o.embedder, "hashed, onehot or http");

  auto* report = app.add_subcommand("report", "Render a results CSV as a table");
  report->add_option("--fixture", o.fixture, "CSV with a setting column and eight metric columns")->required();
  report->add_option("--top", o.top, "Bold the top N values per column");
  report->add_option("--format", o.format, "markdown or csv");
  report->add_option("--output", o.output, "Write the table here instead of stdout");

  auto* toy = app.add_subcommand("toy-corpus", "Synthesize a small corpus with known ground truth");
  toy->add_option("--dir", o.toy_dir, "Destination directory")->required();
  toy->add_option("--tracks", o.toy.tracks, "Number of tracks");
  toy->add_option("--duration", o.toy.duration_s, "Clip length in seconds");
  toy->add_option("--silent", o.toy.silent_tracks, "Last N tracks get silent audio");
  toy->add_option("--static", o.toy.static_tracks, "First N tracks get a frozen video");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFatal;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::unique_ptr<Session> session;
  try {
    session = std::make_unique<Session>(sub->get_name(), g, out, err);
    Session& s = *session;
    int code = kExitOk;
    if (sub == ingest) code = cmd_ingest(s, o);
    else if (sub == filter) code = cmd_filter(s, o);
    else if (sub == split) code = cmd_split(s, o);
    else if (sub == features) code = cmd_features(s, o);
    else if (sub == caption) code = cmd_caption(s, o);
    else if (sub == build) code = cmd_build(s, o, false);
    else if (sub == ablate) code = cmd_build(s, o, true);
    else if (sub == evaluate) code = cmd_evaluate(s, o);
    else if (sub == report) code = cmd_report(s, o);
    else if (sub == toy) code = cmd_toy_corpus(s, o);
    if (!g.dry_run) s.write_manifest(code);
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (session && !g.dry_run && fs::is_directory(session->out_dir)) {
      try {
        session->extra("error") = e.what();
        session->write_manifest(kExitFatal);
      } catch (const std::exception&) {
      }
    }
    return kExitFatal;
  }
}

}  // namespace mvforge
