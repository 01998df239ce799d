#include "captionprobe/cli.hpp"
#include "captionprobe/corpus.hpp"
#include "captionprobe/error.hpp"
#include "captionprobe/mock_encoder.hpp"
#include "captionprobe/report.hpp"
#include "captionprobe/suite.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <sstream>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace captionprobe;

namespace {

py::array_t<float> to_array(const std::vector<float> &values, std::size_t rows, std::size_t cols) {
    py::array_t<float> out({rows, cols});
    std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(float));
    return out;
}

EmbeddingMatrix to_matrix(std::vector<std::string> ids, const py::array_t<float, py::array::c_style | py::array::forcecast> &values) {
    if (values.ndim() != 2) throw py::value_error("embeddings must be a 2-D array");
    if (static_cast<std::size_t>(values.shape(0)) != ids.size()) throw py::value_error("one row per id is required");
    EmbeddingMatrix m;
    m.ids = std::move(ids);
    m.dim = static_cast<std::size_t>(values.shape(1));
    m.values.assign(values.data(), values.data() + values.size());
    return m;
}

py::dict report_dict(const MetricsReport &r) {
    return py::dict("task_id"_a = r.task_id, "direction"_a = std::string(direction_name(r.direction)), "r1"_a = r.r1,
                    "r5"_a = r.r5, "r10"_a = r.r10, "median_rank"_a = r.median_rank, "mean_rank"_a = r.mean_rank,
                    "queries"_a = r.queries);
}

MetricsReport report_from_dict(const py::dict &d) {
    MetricsReport r;
    r.task_id = d["task_id"].cast<std::string>();
    r.direction = parse_direction(d["direction"].cast<std::string>());
    r.r1 = d["r1"].cast<double>();
    if (d.contains("r5")) r.r5 = d["r5"].cast<double>();
    if (d.contains("r10")) r.r10 = d["r10"].cast<double>();
    if (d.contains("median_rank")) r.median_rank = d["median_rank"].cast<double>();
    if (d.contains("mean_rank")) r.mean_rank = d["mean_rank"].cast<double>();
    if (d.contains("queries")) r.queries = d["queries"].cast<std::size_t>();
    return r;
}

std::vector<RunComparison> comparisons_from(const std::map<std::string, std::vector<py::dict>> &runs) {
    std::vector<RunComparison> out;
    for (const auto &[label, reports] : runs) {
        RunComparison c{label, {}};
        for (const auto &d : reports) c.add(report_from_dict(d));
        out.push_back(std::move(c));
    }
    return out;
}

PerturbationKind kind_from(const std::string &id) {
    if (auto k = parse_task_id(id)) return *k;
    throw py::value_error("unknown task id '" + id + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Caption perturbation and retrieval metrics";

    py::register_exception<Error>(m, "CaptionProbeError", PyExc_RuntimeError);

    m.def("tokenize", &tokenize, "text"_a);
    m.def("normalize", &normalize, "text"_a);
    m.def("categorize", [](const std::string &tag) { return std::string(category_name(categorize(tag))); }, "tag"_a);

    py::class_<TaggedCaption>(m, "TaggedCaption")
        .def(py::init([](std::string caption_id, std::string video_id, const std::vector<std::string> &surfaces,
                         const std::vector<std::string> &tags) {
                 std::vector<Upos> upos;
                 for (const auto &t : tags) upos.push_back(upos_from_string(t));
                 return make_tagged_caption(std::move(caption_id), std::move(video_id), surfaces, upos);
             }),
             "caption_id"_a, "video_id"_a, "surfaces"_a, "tags"_a)
        .def_readonly("caption_id", &TaggedCaption::caption_id)
        .def_readonly("video_id", &TaggedCaption::video_id)
        .def_property_readonly("text", &TaggedCaption::text)
        .def_property_readonly("surfaces", [](const TaggedCaption &c) {
            std::vector<std::string> out;
            for (const auto &t : c.tokens) out.push_back(t.surface);
            return out;
        })
        .def_property_readonly("tags", [](const TaggedCaption &c) {
            std::vector<std::string> out;
            for (const auto &t : c.tokens) out.emplace_back(upos_name(t.pos));
            return out;
        })
        .def_property_readonly("categories", [](const TaggedCaption &c) {
            std::vector<std::string> out;
            for (const auto &t : c.tokens) out.emplace_back(category_name(t.category));
            return out;
        });

    m.def("load_external_tags", &load_external_tags, "path"_a);

    py::class_<TaggerModel>(m, "TaggerModel")
        .def("tag", [](const TaggerModel &model, const std::vector<std::string> &tokens) {
            std::vector<std::string> out;
            for (auto t : model.tag(tokens)) out.emplace_back(upos_name(t));
            return out;
        }, "tokens"_a)
        .def("to_json", &TaggerModel::to_json)
        .def_static("from_json", [](const std::string &s) { return TaggerModel::from_json(s); }, "json"_a)
        .def_static("load", &TaggerModel::load, "path"_a)
        .def("save", &TaggerModel::save, "path"_a)
        .def_property_readonly("feature_count", &TaggerModel::feature_count);

    m.def("train_tagger",
          [](const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> &sentences, int iterations,
             std::uint64_t seed) {
              std::vector<TaggedSentence> corpus;
              for (const auto &[words, tags] : sentences) {
                  TaggedSentence s{words, {}};
                  for (const auto &t : tags) s.tags.push_back(upos_from_string(t));
                  corpus.push_back(std::move(s));
              }
              return train_tagger(corpus, iterations, seed);
          },
          "sentences"_a, "iterations"_a = 5, "seed"_a = 0);
    m.def("read_treebank", [](const std::filesystem::path &path) {
        std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> out;
        for (const auto &s : read_treebank(path)) {
            std::vector<std::string> tags;
            for (auto t : s.tags) tags.emplace_back(upos_name(t));
            out.emplace_back(s.words, std::move(tags));
        }
        return out;
    }, "path"_a);

    m.def("task_ids", []() {
        std::vector<std::string> out;
        for (auto k : kAllPerturbations) out.emplace_back(task_id(k));
        return out;
    });

    py::class_<ReplacementVocab>(m, "ReplacementVocab")
        .def(py::init([](std::map<std::string, std::uint64_t> nouns, std::map<std::string, std::uint64_t> verbs) {
                 return ReplacementVocab{std::move(nouns), std::move(verbs), {}};
             }),
             "nouns"_a, "verbs"_a)
        .def_readonly("nouns", &ReplacementVocab::nouns)
        .def_readonly("verbs", &ReplacementVocab::verbs)
        .def_readonly("corpus_digest", &ReplacementVocab::corpus_digest);
    m.def("build_vocab", [](const std::vector<TaggedCaption> &captions) { return build_vocab(captions); }, "captions"_a);

    py::class_<Lexicon>(m, "Lexicon")
        .def(py::init<>())
        .def_static("load", &Lexicon::load, "path"_a)
        .def("add", &Lexicon::add, "lemma"_a, "synonyms"_a, "antonyms"_a);

    m.def("perturb",
          [](const std::string &task, const TaggedCaption &cap, std::uint64_t run_seed, const ReplacementVocab *vocab,
             const Lexicon *lexicon, const std::string &partial_mode, bool per_segment) {
              const auto mode = parse_partial_mode(partial_mode);
              if (!mode) throw py::value_error("unknown partial mode '" + partial_mode + "'");
              auto rng = caption_rng(run_seed, cap.caption_id, task);
              const auto out = apply_perturbation(kind_from(task), cap, {vocab, lexicon, *mode, per_segment}, rng);
              py::list provenance;
              for (const auto &p : out.provenance()) {
                  switch (p.origin) {
                  case Provenance::Origin::Source:
                      provenance.append(py::make_tuple("src", p.source));
                      break;
                  case Provenance::Origin::Replaced:
                      provenance.append(py::make_tuple("rep", p.source));
                      break;
                  case Provenance::Origin::Inserted:
                      provenance.append(py::make_tuple("ins", py::none()));
                      break;
                  }
              }
              return py::make_tuple(out.text(), provenance);
          },
          "task"_a, "caption"_a, "run_seed"_a = 0, "vocab"_a = nullptr, "lexicon"_a = nullptr,
          "partial_mode"_a = "random", "per_segment"_a = false);

    m.def("apply_suite",
          [](const std::vector<TaggedCaption> &captions, const std::vector<std::string> &tasks, std::uint64_t run_seed,
             const ReplacementVocab *vocab, const Lexicon *lexicon) {
              SuiteOptions options;
              options.run_seed = run_seed;
              if (!tasks.empty()) {
                  options.tasks.clear();
                  for (const auto &t : tasks) options.tasks.push_back(kind_from(t));
              }
              std::map<std::string, std::string> out;
              for (const auto &[task, records] : apply_suite(captions, options, vocab, lexicon).manifests) {
                  out[task] = manifest_jsonl(records);
              }
              return out;
          },
          "captions"_a, "tasks"_a = std::vector<std::string>{}, "run_seed"_a = 0, "vocab"_a = nullptr,
          "lexicon"_a = nullptr);

    m.attr("MOCK_DIM") = kMockDim;
    m.def("mock_encode", [](const std::string &text) { return to_array(mock_encode(text), 1, kMockDim).reshape({kMockDim}); },
          "text"_a);

    m.def("write_cevb",
          [](const std::filesystem::path &path, std::vector<std::string> ids,
             const py::array_t<float, py::array::c_style | py::array::forcecast> &values) {
              write_cevb(to_matrix(std::move(ids), values), path);
          },
          "path"_a, "ids"_a, "values"_a);
    m.def("load_embeddings", [](const std::filesystem::path &path) {
        const auto e = load_embeddings(path);
        return py::make_tuple(e.ids, to_array(e.values, e.rows(), e.dim));
    }, "path"_a);

    m.def("cosine_similarity",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast> &queries,
             const py::array_t<float, py::array::c_style | py::array::forcecast> &candidates) {
              std::vector<std::string> qids(static_cast<std::size_t>(queries.shape(0)));
              std::vector<std::string> cids(static_cast<std::size_t>(candidates.shape(0)));
              for (std::size_t i = 0; i < qids.size(); ++i) qids[i] = std::to_string(i);
              for (std::size_t i = 0; i < cids.size(); ++i) cids[i] = std::to_string(i);
              const auto sim = cosine_similarity(to_matrix(qids, queries), to_matrix(cids, candidates));
              return to_array(sim.scores, qids.size(), cids.size());
          },
          "queries"_a, "candidates"_a);

    m.def("recall_at_k", [](const std::vector<std::size_t> &ranks, std::size_t k) { return recall_at_k(ranks, k); },
          "ranks"_a, "k"_a);
    m.def("median_rank", [](const std::vector<std::size_t> &ranks) { return median_rank(ranks); }, "ranks"_a);
    m.def("mean_rank", [](const std::vector<std::size_t> &ranks) { return mean_rank(ranks); }, "ranks"_a);

    m.def("evaluate",
          [](std::vector<std::string> text_ids, const py::array_t<float, py::array::c_style | py::array::forcecast> &texts,
             std::vector<std::string> video_ids,
             const py::array_t<float, py::array::c_style | py::array::forcecast> &videos,
             const std::map<std::string, std::string> &caption_to_video, const std::string &direction,
             const std::string &task) {
              GroundTruth gt;
              for (const auto &[c, v] : caption_to_video) gt[c].insert(v);
              return report_dict(evaluate_run(to_matrix(std::move(text_ids), texts), to_matrix(std::move(video_ids), videos),
                                              gt, parse_direction(direction), task));
          },
          "text_ids"_a, "texts"_a, "video_ids"_a, "videos"_a, "caption_to_video"_a, "direction"_a = "t2v",
          "task"_a = "original");

    m.def("delta_table", [](const std::string &label, const std::vector<py::dict> &reports) {
        RunComparison c{label, {}};
        for (const auto &d : reports) c.add(report_from_dict(d));
        py::list out;
        for (const auto &e : delta_table(c)) {
            out.append(py::dict("task_id"_a = e.task_id, "direction"_a = std::string(direction_name(e.direction)),
                                "baseline_r1"_a = e.baseline_r1, "task_r1"_a = e.task_r1,
                                "absolute_drop"_a = e.absolute_drop,
                                "relative_drop"_a = e.relative_drop ? py::cast(*e.relative_drop) : py::none()));
        }
        return out;
    }, "label"_a, "reports"_a);

    m.def("emit", [](const std::map<std::string, std::vector<py::dict>> &runs, const std::string &format) {
        return emit(comparisons_from(runs), parse_report_format(format));
    }, "runs"_a, "format"_a = "markdown");

    m.def("run_cli", [](const std::vector<std::string> &args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
    }, "args"_a);
}
