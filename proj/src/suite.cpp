#include "captionprobe/suite.hpp"

#include "captionprobe/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace captionprobe {

namespace {

using ojson = nlohmann::ordered_json;

// {"src": i} copied from token i, {"rep": i} replaces token i, {"ins": true}
// inserted.
ojson provenance_json(const Provenance &p) {
    switch (p.origin) {
    case Provenance::Origin::Source:
        return ojson{{"src", p.source}};
    case Provenance::Origin::Replaced:
        return ojson{{"rep", p.source}};
    case Provenance::Origin::Inserted:
        break;
    }
    return ojson{{"ins", true}};
}

Provenance provenance_from_json(const nlohmann::json &j) {
    if (!j.is_object() || j.size() != 1) throw DataError("malformed provenance entry " + j.dump());
    if (j.contains("src")) return Provenance::copy(j["src"].get<std::size_t>());
    if (j.contains("rep")) return Provenance::replace(j["rep"].get<std::size_t>());
    if (j.contains("ins")) return Provenance::insert();
    throw DataError("malformed provenance entry " + j.dump());
}

ManifestRecord original_record(const TaggedCaption &cap) {
    ManifestRecord record{cap.caption_id, cap.video_id, std::string(kOriginalTaskId), cap.text(), {}, std::nullopt};
    record.provenance.reserve(cap.tokens.size());
    for (const auto &token : cap.tokens) record.provenance.push_back(Provenance::copy(token.index));
    return record;
}

} // namespace

std::size_t PerturbedCorpus::failure_count() const {
    std::size_t n = 0;
    for (const auto &[task, records] : manifests) {
        n += static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                    [](const ManifestRecord &r) { return r.error.has_value(); }));
    }
    return n;
}

PerturbedCorpus apply_suite(std::span<const TaggedCaption> corpus, const SuiteOptions &options,
                            const ReplacementVocab *vocab, const Lexicon *lexicon) {
    std::vector<const TaggedCaption *> ordered;
    ordered.reserve(corpus.size());
    for (const auto &cap : corpus) ordered.push_back(&cap);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto *a, const auto *b) { return a->caption_id < b->caption_id; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->caption_id == ordered[i - 1]->caption_id) {
            throw DataError("duplicate caption_id '" + ordered[i]->caption_id + "'");
        }
    }

    std::set<PerturbationKind> tasks(options.tasks.begin(), options.tasks.end());
    const PerturbContext ctx{vocab, lexicon, options.partial_mode, options.per_segment};

    PerturbedCorpus out;
    auto &original = out.manifests[std::string(kOriginalTaskId)];
    for (const auto *cap : ordered) original.push_back(original_record(*cap));

    for (PerturbationKind kind : tasks) {
        const std::string id(task_id(kind));
        auto &records = out.manifests[id];
        records.reserve(ordered.size());
        for (const auto *cap : ordered) {
            auto rng = caption_rng(options.run_seed, cap->caption_id, id);
            try {
                const auto perturbed = apply_perturbation(kind, *cap, ctx, rng);
                records.push_back({cap->caption_id, cap->video_id, id, perturbed.text(), perturbed.provenance(),
                                   std::nullopt});
            } catch (const DataError &e) {
                auto record = original_record(*cap);
                record.task_id = id;
                record.error = e.what();
                records.push_back(std::move(record));
            }
        }
    }
    return out;
}

std::string manifest_line(const ManifestRecord &record) {
    ojson j;
    j["caption_id"] = record.caption_id;
    j["video_id"] = record.video_id;
    j["task_id"] = record.task_id;
    j["text"] = record.text;
    auto &prov = j["provenance"] = ojson::array();
    for (const auto &p : record.provenance) prov.push_back(provenance_json(p));
    if (record.error) j["error"] = *record.error;
    return j.dump();
}

ManifestRecord parse_manifest_line(std::string_view line) {
    try {
        const auto j = nlohmann::json::parse(line);
        ManifestRecord record;
        record.caption_id = j.at("caption_id").get<std::string>();
        record.video_id = j.at("video_id").get<std::string>();
        record.task_id = j.at("task_id").get<std::string>();
        record.text = j.at("text").get<std::string>();
        for (const auto &p : j.at("provenance")) record.provenance.push_back(provenance_from_json(p));
        if (j.contains("error")) record.error = j["error"].get<std::string>();
        return record;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("malformed manifest record: ") + e.what());
    }
}

std::string manifest_jsonl(std::span<const ManifestRecord> records) {
    std::string out;
    for (const auto &record : records) {
        out += manifest_line(record);
        out += '\n';
    }
    return out;
}

std::vector<std::filesystem::path> write_manifests(const PerturbedCorpus &corpus, const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    for (const auto &[task, records] : corpus.manifests) {
        const auto path = dir / (task + ".jsonl");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << manifest_jsonl(records);
        if (!out) throw IoError("failed writing " + path.string());
        written.push_back(path);
    }
    return written;
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::vector<ManifestRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(parse_manifest_line(line));
        } catch (const DataError &e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

} // namespace captionprobe
