#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mvforge/audio_features.h"
#include "mvforge/cli.h"
#include "mvforge/corpus.h"
#include "mvforge/dataset.h"
#include "mvforge/description.h"
#include "mvforge/error.h"
#include "mvforge/eval.h"
#include "mvforge/media.h"
#include "mvforge/metrics.h"

namespace py = pybind11;
using namespace mvforge;

namespace {

std::vector<TokenSeq> tokenize_all(const std::vector<std::string>& texts) {
  std::vector<TokenSeq> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(tokenize(t));
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  const auto v = r.values();
  for (std::size_t i = 0; i < v.size(); ++i) d[py::str(std::string(kMetricColumns[i]))] = v[i];
  return d;
}

MetricReport report_from_dict(const std::map<std::string, double>& d) {
  std::array<double, 8> v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto it = d.find(std::string(kMetricColumns[i]));
    if (it == d.end()) throw ArgumentError("missing column " + std::string(kMetricColumns[i]));
    v[i] = it->second;
  }
  return MetricReport::from_values(v);
}

py::tuple prf(const PrfScore& s) { return py::make_tuple(s.precision, s.recall, s.f1); }

}  // namespace

PYBIND11_MODULE(_mvforge, m) {
  m.doc() = "Music-video description dataset tooling: features, datasets, metrics.";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<IngestError>(m, "IngestError", base.ptr());
  py::register_exception<MediaError>(m, "MediaError", base.ptr());
  py::register_exception<NoRhythmicContent>(m, "NoRhythmicContent", base.ptr());
  py::register_exception<NoTonalContent>(m, "NoTonalContent", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<TaggingError>(m, "TaggingError", base.ptr());

  // metrics
  m.def("tokenize", [](const std::string& s) { return tokenize(s); });
  m.def(
      "bleu",
      [](const std::vector<std::string>& candidates, const std::vector<std::string>& references, int max_n) {
        return bleu(tokenize_all(candidates), tokenize_all(references), max_n);
      },
      py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4);
  m.def(
      "rouge_l", [](const std::string& c, const std::string& r) { return prf(rouge_l(tokenize(c), tokenize(r))); },
      "(precision, recall, f1) in percent");
  m.def(
      "bert_score_hashed",
      [](const std::string& c, const std::string& r, std::size_t dim, std::uint64_t seed) {
        return prf(bert_score(tokenize(c), tokenize(r), HashedEmbedder(dim, seed)));
      },
      py::arg("candidate"), py::arg("reference"), py::arg("dimension") = 64, py::arg("seed") = 0);
  m.def(
      "evaluate_pairs",
      [](const std::vector<std::pair<std::string, std::string>>& pairs, std::size_t jobs) {
        py::gil_scoped_release release;
        const MetricReport r = evaluate_pairs(pairs, HashedEmbedder(), jobs);
        py::gil_scoped_acquire acquire;
        return report_dict(r);
      },
      py::arg("pairs"), py::arg("jobs") = 1, "All eight columns for (prediction, reference) pairs, hashed embedder.");
  m.def("round_half_up", &round_half_up, py::arg("value"), py::arg("decimals") = 1);
  m.attr("METRIC_COLUMNS") = [] {
    std::vector<std::string> cols;
    for (auto c : kMetricColumns) cols.emplace_back(c);
    return cols;
  }();

  // results tables
  m.def(
      "render_table",
      [](const std::vector<std::pair<std::string, std::map<std::string, double>>>& rows, const std::string& format,
         int top) {
        ResultsTable t;
        for (const auto& [name, cols] : rows) t.push_back({name, report_from_dict(cols)});
        return render_table(t, parse_table_format(format), top);
      },
      py::arg("rows"), py::arg("format") = "markdown", py::arg("top") = 3);
  m.def("parse_table_csv", [](const std::string& csv) {
    py::list out;
    for (const auto& row : parse_table_csv(csv)) out.append(py::make_tuple(row.setting, report_dict(row.report)));
    return out;
  });
  m.def("display_setting_name", &display_setting_name);

  // targets and masks
  m.def("sample_frame_times", &sample_frame_times, py::arg("duration_s"), py::arg("interval_s") = kFrameIntervalSeconds);
  m.def(
      "render_target",
      [](const std::string& overview, const std::vector<std::pair<double, std::string>>& breakdown, double interval) {
        MvDescription d{overview, {}};
        for (const auto& [t, c] : breakdown) d.breakdown.push_back({t, c});
        return render_target(d, interval);
      },
      py::arg("overview"), py::arg("breakdown"), py::arg("interval_s") = kFrameIntervalSeconds);
  m.def("parse_target", [](const std::string& text) {
    const MvDescription d = parse_target(text);
    std::vector<std::pair<double, std::string>> breakdown;
    for (const auto& f : d.breakdown) breakdown.emplace_back(f.t_s, f.caption);
    return py::make_tuple(d.overview, breakdown);
  });
  m.def("mask_name", [](const std::string& digits) { return AblationMask::parse(digits).name(); });
  m.def("table_masks", [] {
    std::vector<std::string> out;
    for (const auto& mk : table_masks()) out.push_back(mk.name());
    return out;
  });
  m.def("sanity_masks", [] {
    std::vector<std::string> out;
    for (const auto& mk : sanity_masks()) out.push_back(mk.name());
    return out;
  });
  m.def("check_example_line", [](const std::string& line, const std::string& mask) {
    return check_example_line(line, AblationMask::parse(mask));
  });

  // corpus
  m.def(
      "split_ids",
      [](std::vector<std::string> ids, std::size_t train_count, std::uint64_t seed) {
        const CorpusSplit s = split_ids(std::move(ids), train_count, seed);
        return py::make_tuple(s.train_ids, s.test_ids);
      },
      py::arg("ids"), py::arg("train_count"), py::arg("seed"));

  // audio
  m.def(
      "extract_features",
      [](const std::filesystem::path& wav, int meter) {
        LowLevelFeatures f;
        {
          py::gil_scoped_release release;
          f = extract_all(read_wav(wav), meter);
        }
        py::list chords;
        for (const auto& c : f.chords) chords.append(py::make_tuple(c.label, c.start_s, c.end_s));
        py::dict d;
        d["tempo_bpm"] = f.tempo_bpm;
        d["key"] = key_to_string(f.key);
        d["downbeats_s"] = f.downbeats_s;
        d["chords"] = chords;
        return d;
      },
      py::arg("wav_path"), py::arg("meter") = 4);

  // command line
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv_store{"mvforge"};
        argv_store.insert(argv_store.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : argv_store) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the mvforge command line in-process; returns (exit_code, stdout, stderr).");
}
