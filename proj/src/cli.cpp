#include "captionprobe/cli.hpp"

#include "captionprobe/corpus.hpp"
#include "captionprobe/error.hpp"
#include "captionprobe/mock_encoder.hpp"
#include "captionprobe/report.hpp"
#include "captionprobe/suite.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

namespace captionprobe {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct CorpusSource {
    std::string dataset; // adapter config
    std::string corpus;  // canonical JSONL
    std::string split;
};

struct TagSource {
    std::string sidecar;
    std::string tagger;
};

void add_corpus_options(CLI::App &cmd, CorpusSource &src) {
    auto *dataset = cmd.add_option("--dataset", src.dataset, "Dataset adapter config (key = value file)");
    auto *corpus = cmd.add_option("--corpus", src.corpus, "Canonical corpus JSONL written by `ingest`");
    dataset->excludes(corpus);
    cmd.add_option("--split", src.split, "Split to load (train or test); overrides the adapter");
}

void add_tag_options(CLI::App &cmd, TagSource &tags) {
    auto *sidecar = cmd.add_option("--tags", tags.sidecar, "External tag sidecar (surface<TAB>UPOS)");
    auto *tagger = cmd.add_option("--tagger", tags.tagger, "Internal tagger model from `tag-train`");
    sidecar->excludes(tagger);
}

std::vector<CaptionRecord> load_records(const CorpusSource &src) {
    if (!src.dataset.empty()) return load_dataset(load_adapter_config(src.dataset), src.split);
    if (src.corpus.empty()) throw UsageError("one of --dataset or --corpus is required");
    auto records = read_corpus(src.corpus);
    if (!src.split.empty()) {
        const Split want = parse_split(src.split);
        std::erase_if(records, [want](const CaptionRecord &r) { return r.split != want; });
    }
    if (records.empty()) throw DataError("corpus has no records for the requested split");
    return records;
}

std::vector<TaggedCaption> tag_records(std::span<const CaptionRecord> records, const TagSource &tags) {
    if (!tags.sidecar.empty()) return align_external_tags(records, load_external_tags(tags.sidecar));
    if (!tags.tagger.empty()) return tag_corpus(records, TaggerModel::load(tags.tagger));
    throw UsageError("one of --tags or --tagger is required");
}

std::vector<PerturbationKind> parse_tasks(const std::string &spec) {
    std::vector<PerturbationKind> tasks;
    if (spec.empty() || spec == "all") return {kAllPerturbations.begin(), kAllPerturbations.end()};
    std::string_view rest = spec;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto name = rest.substr(0, comma);
        if (!name.empty()) {
            const auto kind = parse_task_id(name);
            if (!kind) throw UsageError("unknown task '" + std::string(name) + "'");
            tasks.push_back(*kind);
        }
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (tasks.empty()) throw UsageError("no tasks selected");
    return tasks;
}

void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void write_run_json(const fs::path &dir, const std::string &command, const ojson &config, std::uint64_t seed,
                    const std::vector<std::string> &warnings, const ojson &extra) {
    ojson run;
    run["command"] = command;
    run["config"] = config;
    run["config_digest"] = hex64(fnv1a64(config.dump()));
    run["seed"] = seed;
    run["versions"] = {{"captionprobe", kVersion}, {"manifest_format", 1}, {"cevb", 1}};
    run["warnings"] = warnings;
    for (const auto &[key, value] : extra.items()) run[key] = value;
    write_text(dir / "run.json", run.dump(2) + "\n");
}

// --- commands --------------------------------------------------------------

struct IngestArgs {
    CorpusSource src;
    std::string out;
};

int cmd_ingest(const IngestArgs &a, std::ostream &out) {
    const auto records = load_records(a.src);
    const auto manifest = write_corpus(records, a.out);
    out << "wrote " << manifest.record_count << " records (" << manifest.video_count << " videos) to " << a.out
        << '\n';
    return 0;
}

struct TagTrainArgs {
    std::string treebank;
    std::string heldout;
    int iterations = 5;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_tag_train(const TagTrainArgs &a, std::ostream &out) {
    const auto corpus = read_treebank(a.treebank);
    const auto model = train_tagger(corpus, a.iterations, a.seed);
    model.save(a.out);
    out << "trained on " << corpus.size() << " sentences, " << model.feature_count() << " features\n";
    if (!a.heldout.empty()) {
        const auto gold = read_treebank(a.heldout);
        out << "held-out accuracy " << format1(100.0 * tagging_accuracy(model, gold)) << "%\n";
    }
    return 0;
}

struct TagArgs {
    CorpusSource src;
    std::string tagger;
    std::string out;
};

int cmd_tag(const TagArgs &a, std::ostream &out) {
    const auto records = load_records(a.src);
    const auto tagged = tag_corpus(records, TaggerModel::load(a.tagger));
    std::ofstream file(a.out, std::ios::binary);
    if (!file) throw IoError("cannot write " + a.out);
    write_tag_sidecar(file, tagged);
    out << "tagged " << tagged.size() << " captions\n";
    return 0;
}

struct VocabArgs {
    CorpusSource src;
    TagSource tags;
    std::string out;
};

int cmd_vocab(const VocabArgs &a, std::ostream &out) {
    const auto records = load_records(a.src);
    const auto vocab = build_vocab(tag_records(records, a.tags));
    vocab.save(a.out);
    out << "vocabulary: " << vocab.nouns.size() << " nouns, " << vocab.verbs.size() << " verbs\n";
    return 0;
}

struct PerturbArgs {
    CorpusSource src;
    TagSource tags;
    std::string tasks = "all";
    std::uint64_t seed = 0;
    std::string vocab;
    std::string lexicon;
    std::string partial_mode = "random";
    bool per_sentence = false;
    std::string out;
};

int cmd_perturb(const PerturbArgs &a, std::ostream &out, std::ostream &err) {
    SuiteOptions options;
    options.tasks = parse_tasks(a.tasks);
    options.run_seed = a.seed;
    const auto mode = parse_partial_mode(a.partial_mode);
    if (!mode) throw UsageError("unknown --partial-mode '" + a.partial_mode + "'");
    options.partial_mode = *mode;
    options.per_segment = a.per_sentence;

    const auto records = load_records(a.src);
    const auto tagged = tag_records(records, a.tags);

    std::vector<std::string> warnings;
    const bool replacing = std::any_of(options.tasks.begin(), options.tasks.end(), needs_vocab);
    ReplacementVocab vocab;
    if (!a.vocab.empty()) {
        vocab = ReplacementVocab::load(a.vocab);
    } else if (replacing) {
        vocab = build_vocab(tagged);
        warnings.push_back("no --vocab given; replacement pool built from the perturbed corpus itself");
    }
    Lexicon lexicon;
    if (!a.lexicon.empty()) {
        lexicon = Lexicon::load(a.lexicon);
    } else if (replacing) {
        warnings.push_back("no --lexicon given; replacement excludes only the original word");
    }

    const auto result = apply_suite(tagged, options, &vocab, &lexicon);
    ensure_dir(a.out);
    const auto written = write_manifests(result, a.out);

    ojson config;
    config["dataset"] = a.src.dataset;
    config["corpus"] = a.src.corpus;
    config["split"] = a.src.split;
    config["tags"] = a.tags.sidecar;
    config["tagger"] = a.tags.tagger;
    config["tasks"] = ojson::array();
    for (auto k : options.tasks) config["tasks"].push_back(task_id(k));
    config["vocab"] = a.vocab;
    config["lexicon"] = a.lexicon;
    config["partial_mode"] = partial_mode_name(options.partial_mode);
    config["per_sentence"] = a.per_sentence;
    ojson extra;
    extra["captions"] = tagged.size();
    extra["failures"] = result.failure_count();
    extra["vocab_digest"] = vocab.corpus_digest;
    extra["outputs"] = ojson::array();
    for (const auto &p : written) extra["outputs"].push_back(p.filename().string());
    write_run_json(a.out, "perturb", config, a.seed, warnings, extra);

    for (const auto &w : warnings) err << "warning: " << w << '\n';
    out << "wrote " << written.size() << " manifests for " << tagged.size() << " captions to " << a.out;
    if (result.failure_count()) out << " (" << result.failure_count() << " failed records)";
    out << '\n';
    return 0;
}

struct EvalArgs {
    std::string manifests;
    std::string tasks;
    std::string text_emb;
    std::string video_emb;
    std::string sim_csv;
    bool mock = false;
    bool write_emb = false;
    std::string directions = "t2v,v2t";
    std::string out;
};

fs::path resolve_pattern(const std::string &pattern, const std::string &task, std::string_view ext) {
    const auto pos = pattern.find("{task}");
    if (pos != std::string::npos) {
        std::string p = pattern;
        p.replace(pos, 6, task);
        return p;
    }
    if (fs::is_directory(pattern)) return fs::path(pattern) / (task + std::string(ext));
    throw UsageError("'" + pattern + "' is neither a directory nor a pattern containing {task}");
}

std::vector<std::string> manifest_tasks(const fs::path &dir, const std::string &spec) {
    std::vector<std::string> tasks;
    if (spec.empty() || spec == "all") {
        std::error_code ec;
        for (const auto &entry : fs::directory_iterator(dir, ec)) {
            if (entry.path().extension() == ".jsonl") tasks.push_back(entry.path().stem().string());
        }
        if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    } else {
        tasks.emplace_back(kOriginalTaskId);
        for (auto kind : parse_tasks(spec)) tasks.emplace_back(task_id(kind));
    }
    std::sort(tasks.begin(), tasks.end(), [](const std::string &x, const std::string &y) {
        const int ox = task_order(x), oy = task_order(y);
        return ox != oy ? ox < oy : x < y;
    });
    tasks.erase(std::unique(tasks.begin(), tasks.end()), tasks.end());
    return tasks;
}

int cmd_eval(const EvalArgs &a, std::ostream &out) {
    const int sources = (a.mock ? 1 : 0) + (a.sim_csv.empty() ? 0 : 1) + (a.text_emb.empty() ? 0 : 1);
    if (sources != 1) throw UsageError("exactly one of --mock, --sim-csv or --text-emb/--video-emb is required");
    if (!a.text_emb.empty() && a.video_emb.empty()) throw UsageError("--text-emb needs --video-emb");
    if (a.write_emb && !a.mock) throw UsageError("--write-emb applies to --mock runs only");

    std::vector<Direction> directions;
    {
        std::string_view rest = a.directions;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            if (auto name = rest.substr(0, comma); !name.empty()) directions.push_back(parse_direction(name));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (directions.empty()) throw UsageError("no directions selected");
    }

    const fs::path dir = a.manifests;
    const auto original = read_manifest(dir / (std::string(kOriginalTaskId) + ".jsonl"));
    if (original.empty()) throw DataError("original manifest is empty");
    GroundTruth gt;
    std::map<std::string, std::string> video_text;
    for (const auto &r : original) {
        gt[r.caption_id].insert(r.video_id);
        auto &t = video_text[r.video_id];
        if (!t.empty()) t += ' ';
        t += r.text;
    }

    ensure_dir(a.out);
    std::optional<EmbeddingMatrix> videos;
    if (a.mock) {
        std::vector<std::string> ids, texts;
        for (const auto &[video, text] : video_text) {
            ids.push_back(video);
            texts.push_back(text);
        }
        videos = mock_encode_all(ids, texts);
        if (a.write_emb) {
            ensure_dir(fs::path(a.out) / "emb");
            write_cevb(*videos, fs::path(a.out) / "emb" / "videos.cevb");
        }
    } else if (!a.video_emb.empty()) {
        videos = load_embeddings(a.video_emb);
    }

    std::vector<MetricsReport> reports;
    for (const auto &task : manifest_tasks(dir, a.tasks)) {
        const auto records = task == kOriginalTaskId ? original : read_manifest(dir / (task + ".jsonl"));
        std::vector<std::string> mismatched;
        {
            std::set<std::string> ids;
            for (const auto &r : records) {
                ids.insert(r.caption_id);
                if (!gt.contains(r.caption_id)) mismatched.push_back(r.caption_id);
            }
            for (const auto &[caption, v] : gt) {
                if (!ids.contains(caption)) mismatched.push_back(caption);
            }
        }
        if (!mismatched.empty()) {
            std::string list;
            for (std::size_t i = 0; i < mismatched.size() && i < 20; ++i) list += (i ? ", " : "") + mismatched[i];
            throw DataError("manifest '" + task + "' does not match the original captions: " + list);
        }

        for (Direction d : directions) {
            if (a.mock || !a.text_emb.empty()) {
                EmbeddingMatrix texts;
                if (a.mock) {
                    std::vector<std::string> ids, texts_in;
                    for (const auto &r : records) {
                        ids.push_back(r.caption_id);
                        texts_in.push_back(r.text);
                    }
                    texts = mock_encode_all(ids, texts_in);
                    if (a.write_emb && d == directions.front()) {
                        write_cevb(texts, fs::path(a.out) / "emb" / (task + ".cevb"));
                    }
                } else {
                    texts = load_embeddings(resolve_pattern(a.text_emb, task, ".cevb"));
                }
                reports.push_back(evaluate_run(texts, *videos, gt, d, task));
            } else {
                const auto sim = load_similarity_csv(resolve_pattern(a.sim_csv, task, ".csv"));
                reports.push_back(evaluate_similarity(sim, gt, d, task));
            }
        }
    }

    for (const auto &r : reports) {
        write_text(fs::path(a.out) / (r.task_id + "." + std::string(direction_name(r.direction)) + ".json"),
                   metrics_json({&r, 1}));
    }
    write_text(fs::path(a.out) / "metrics.json", metrics_json(reports));

    ojson config;
    config["manifests"] = a.manifests;
    config["tasks"] = a.tasks;
    config["source"] = a.mock ? "mock" : !a.sim_csv.empty() ? "sim-csv" : "embeddings";
    config["text_emb"] = a.text_emb;
    config["video_emb"] = a.video_emb;
    config["sim_csv"] = a.sim_csv;
    config["directions"] = a.directions;
    ojson extra;
    extra["reports"] = reports.size();
    write_run_json(a.out, "eval", config, 0, {}, extra);

    for (const auto &r : reports) {
        out << r.task_id << ' ' << direction_name(r.direction) << " R@1 " << format1(r.r1) << " R@5 "
            << format1(r.r5) << " R@10 " << format1(r.r10) << " MdR " << format1(r.median_rank) << " MnR "
            << format1(r.mean_rank) << '\n';
    }
    return 0;
}

struct ReportArgs {
    std::vector<std::string> runs;
    std::string format = "markdown";
    std::string out;
};

int cmd_report(const ReportArgs &a, std::ostream &out) {
    const auto format = parse_report_format(a.format);
    std::vector<RunComparison> comparisons;
    for (const auto &spec : a.runs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--run expects LABEL=PATH, got '" + spec + "'");
        fs::path path = spec.substr(eq + 1);
        if (fs::is_directory(path)) path /= "metrics.json";
        RunComparison c{spec.substr(0, eq), {}};
        for (auto &r : load_metrics(path)) c.add(std::move(r));
        comparisons.push_back(std::move(c));
    }
    const auto doc = emit(comparisons, format);
    if (a.out.empty()) {
        out << doc;
    } else {
        write_text(a.out, doc);
    }
    return 0;
}

void write_error_summary(const std::string &dir, int code, const std::string &message) {
    if (dir.empty()) return;
    try {
        ensure_dir(dir);
        ojson j;
        j["exit_code"] = code;
        j["error"] = message;
        write_text(fs::path(dir) / "error.json", j.dump(2) + "\n");
    } catch (const Error &) {
    }
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Caption perturbation and retrieval evaluation toolkit", "captionprobe"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    IngestArgs ingest;
    auto *ingest_cmd = app.add_subcommand("ingest", "Load a dataset through its adapter into a canonical corpus");
    add_corpus_options(*ingest_cmd, ingest.src);
    ingest_cmd->add_option("--out", ingest.out, "Output corpus JSONL")->required();

    TagTrainArgs train;
    auto *train_cmd = app.add_subcommand("tag-train", "Train the averaged perceptron tagger");
    train_cmd->add_option("--treebank", train.treebank, "CoNLL-U or two-column UPOS training file")->required();
    train_cmd->add_option("--heldout", train.heldout, "Report accuracy on this file after training");
    train_cmd->add_option("--iterations", train.iterations, "Training epochs")->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "Shuffle seed")->capture_default_str();
    train_cmd->add_option("--out", train.out, "Output model JSON")->required();

    TagArgs tag;
    auto *tag_cmd = app.add_subcommand("tag", "Tag a corpus with the internal tagger and write a sidecar");
    add_corpus_options(*tag_cmd, tag.src);
    tag_cmd->add_option("--tagger", tag.tagger, "Tagger model")->required();
    tag_cmd->add_option("--out", tag.out, "Output tag sidecar")->required();

    VocabArgs vocab;
    auto *vocab_cmd = app.add_subcommand("vocab", "Build noun/verb replacement inventories");
    add_corpus_options(*vocab_cmd, vocab.src);
    add_tag_options(*vocab_cmd, vocab.tags);
    vocab_cmd->add_option("--out", vocab.out, "Output vocabulary JSON")->required();

    PerturbArgs perturb;
    auto *perturb_cmd = app.add_subcommand("perturb", "Write perturbation manifests");
    add_corpus_options(*perturb_cmd, perturb.src);
    add_tag_options(*perturb_cmd, perturb.tags);
    perturb_cmd->add_option("--tasks", perturb.tasks, "Comma-separated task ids or 'all'")->capture_default_str();
    perturb_cmd->add_option("--seed", perturb.seed, "Run seed")->capture_default_str();
    perturb_cmd->add_option("--vocab", perturb.vocab, "Replacement vocabulary JSON");
    perturb_cmd->add_option("--lexicon", perturb.lexicon, "Synonym/antonym TSV");
    perturb_cmd->add_option("--partial-mode", perturb.partial_mode, "random, keep-first or keep-last")
        ->capture_default_str();
    perturb_cmd->add_flag("--per-sentence", perturb.per_sentence, "Perturb paragraph sentences independently");
    perturb_cmd->add_option("--out", perturb.out, "Output directory")->required();

    EvalArgs eval;
    auto *eval_cmd = app.add_subcommand("eval", "Compute retrieval metrics per task and direction");
    eval_cmd->add_option("--manifests", eval.manifests, "Directory of perturbation manifests")->required();
    eval_cmd->add_option("--tasks", eval.tasks, "Comma-separated task ids (default: every manifest)");
    eval_cmd->add_option("--text-emb", eval.text_emb, "CEVB directory or pattern with {task}");
    eval_cmd->add_option("--video-emb", eval.video_emb, "CEVB file of video embeddings");
    eval_cmd->add_option("--sim-csv", eval.sim_csv, "Similarity CSV directory or pattern with {task}");
    eval_cmd->add_flag("--mock", eval.mock, "Use the built-in bag-of-words mock encoder");
    eval_cmd->add_flag("--write-emb", eval.write_emb, "Also write the mock embeddings as CEVB");
    eval_cmd->add_option("--directions", eval.directions, "t2v, v2t or both")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "Output directory")->required();

    ReportArgs report;
    auto *report_cmd = app.add_subcommand("report", "Tabulate metrics and drops versus the original captions");
    report_cmd->add_option("--run", report.runs, "LABEL=metrics.json (or eval output directory)")->required();
    report_cmd->add_option("--format", report.format, "markdown, csv or json")->capture_default_str();
    report_cmd->add_option("--out", report.out, "Output file (default: stdout)");

    std::vector<std::string> argv_storage{"captionprobe"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char *> argv;
    for (auto &s : argv_storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion &) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::Usage);
    }

    std::string error_dir;
    try {
        if (*ingest_cmd) return cmd_ingest(ingest, out);
        if (*train_cmd) return cmd_tag_train(train, out);
        if (*tag_cmd) return cmd_tag(tag, out);
        if (*vocab_cmd) return cmd_vocab(vocab, out);
        if (*perturb_cmd) {
            error_dir = perturb.out;
            return cmd_perturb(perturb, out, err);
        }
        if (*eval_cmd) {
            error_dir = eval.out;
            return cmd_eval(eval, out);
        }
        if (*report_cmd) return cmd_report(report, out);
    } catch (const Error &e) {
        const int code = static_cast<int>(e.kind());
        err << "error: " << e.what() << '\n';
        write_error_summary(error_dir, code, e.what());
        return code;
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        write_error_summary(error_dir, static_cast<int>(ErrorKind::Io), e.what());
        return static_cast<int>(ErrorKind::Io);
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        write_error_summary(error_dir, static_cast<int>(ErrorKind::Data), e.what());
        return static_cast<int>(ErrorKind::Data);
    }
    return static_cast<int>(ErrorKind::Usage);
}

} // namespace captionprobe
