#include "captionprobe/corpus.hpp"

#include "captionprobe/csv.hpp"
#include "captionprobe/error.hpp"
#include "captionprobe/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace captionprobe {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

json parse_json_file(const std::filesystem::path &path) {
    const auto text = read_file(path);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw DataError(path.string() + ": no records");
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string id_string(const json &value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    throw DataError("expected a string or integer id, got " + value.dump());
}

std::string caption_key(std::string_view video_id, std::size_t ordinal) {
    return std::string(video_id) + "#" + std::to_string(ordinal);
}

std::vector<std::string> read_id_list(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        auto id = trim(line);
        if (!id.empty() && id.front() != '#') ids.push_back(std::move(id));
    }
    return ids;
}

// video_id column plus optional sentence column.
std::vector<std::pair<std::string, std::optional<std::string>>> read_split_csv(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const auto rows = csv::read_all(in);
    if (rows.empty()) throw DataError(path.string() + ": empty split file");
    const auto &header = rows.front();
    const auto find = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        return std::nullopt;
    };
    const auto video_col = find("video_id");
    if (!video_col) throw DataError(path.string() + ": missing 'video_id' column");
    const auto sentence_col = find("sentence");
    std::vector<std::pair<std::string, std::optional<std::string>>> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto &row = rows[r];
        if (*video_col >= row.size()) throw DataError(path.string() + ": short row " + std::to_string(r + 1));
        std::optional<std::string> sentence;
        if (sentence_col && *sentence_col < row.size()) sentence = trim(row[*sentence_col]);
        out.emplace_back(trim(row[*video_col]), std::move(sentence));
    }
    return out;
}

std::string file_digest(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

CaptionRecord record_from_json(const json &j) {
    CaptionRecord r;
    r.caption_id = j.at("caption_id").get<std::string>();
    r.video_id = j.at("video_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.split = parse_split(j.at("split").get<std::string>());
    r.dataset = parse_dataset(j.at("dataset").get<std::string>());
    if (j.contains("sentences")) r.sentences = j["sentences"].get<std::vector<std::string>>();
    return r;
}

void check_unique(std::span<const CaptionRecord> records) {
    std::map<std::string_view, std::string_view> owner;
    for (const auto &r : records) {
        const auto [it, inserted] = owner.emplace(r.caption_id, r.video_id);
        if (!inserted) throw DataError("duplicate caption_id '" + r.caption_id + "'");
    }
}

std::vector<std::size_t> segment_lengths(const CaptionRecord &record) {
    std::vector<std::size_t> lengths;
    if (record.sentences.size() < 2) return lengths;
    for (const auto &s : record.sentences) lengths.push_back(tokenize(s).size());
    return lengths;
}

} // namespace

std::string_view dataset_name(Dataset d) noexcept {
    switch (d) {
    case Dataset::Msvd:
        return "msvd";
    case Dataset::Didemo:
        return "didemo";
    case Dataset::Msrvtt:
        break;
    }
    return "msrvtt";
}

std::string_view split_name(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

Dataset parse_dataset(std::string_view name) {
    if (name == "msrvtt") return Dataset::Msrvtt;
    if (name == "msvd") return Dataset::Msvd;
    if (name == "didemo") return Dataset::Didemo;
    throw UsageError("unknown dataset '" + std::string(name) + "'");
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "test") return Split::Test;
    throw UsageError("unknown split '" + std::string(name) + "'");
}

std::vector<CaptionRecord> load_msrvtt(const std::filesystem::path &annotations,
                                       const std::filesystem::path &split_file, std::string_view split,
                                       const MsrvttOptions &options) {
    const Split which = parse_split(split);
    const json doc = parse_json_file(annotations);
    if (!doc.is_object() || !doc.contains(options.sentences_key) || doc[options.sentences_key].empty()) {
        throw DataError(annotations.string() + ": no records");
    }

    std::set<std::string> known_videos;
    const bool has_video_list = doc.contains(options.videos_key);
    if (has_video_list) {
        for (const auto &v : doc[options.videos_key]) known_videos.insert(id_string(v.at(options.video_field)));
    }

    std::map<std::string, std::vector<std::string>> captions_by_video;
    try {
        for (const auto &s : doc[options.sentences_key]) {
            auto video = id_string(s.at(options.video_field));
            if (has_video_list && !known_videos.contains(video)) {
                throw DataError(annotations.string() + ": caption references missing video '" + video + "'");
            }
            captions_by_video[video].push_back(trim(s.at(options.text_field).get<std::string>()));
        }
    } catch (const json::exception &e) {
        throw DataError(annotations.string() + ": " + e.what());
    }

    std::vector<CaptionRecord> records;
    std::set<std::string> seen;
    for (const auto &[video, sentence] : read_split_csv(split_file)) {
        if (!seen.insert(video).second) continue;
        const auto it = captions_by_video.find(video);
        if (it == captions_by_video.end()) {
            throw DataError(split_file.string() + ": split references missing video '" + video + "'");
        }
        const auto &captions = it->second;
        if (which == Split::Test && !options.all_test_captions) {
            const std::string text = sentence && !sentence->empty() ? *sentence : captions.front();
            records.push_back({caption_key(video, 0), video, text, which, Dataset::Msrvtt, {}});
            continue;
        }
        for (std::size_t i = 0; i < captions.size(); ++i) {
            records.push_back({caption_key(video, i), video, captions[i], which, Dataset::Msrvtt, {}});
        }
    }
    if (records.empty()) throw DataError(split_file.string() + ": no records");
    return sorted_by_caption_id(std::move(records));
}

std::vector<CaptionRecord> load_msvd(const std::filesystem::path &captions, const std::filesystem::path &train_list,
                                     const std::filesystem::path &test_list, std::string_view split) {
    const Split which = parse_split(split);
    std::ifstream in(captions);
    if (!in) throw IoError("cannot open " + captions.string());
    std::map<std::string, std::vector<std::string>> by_video;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto space = trimmed.find_first_of(" \t");
        if (space == std::string::npos) {
            throw DataError(captions.string() + ":" + std::to_string(line_no) + ": expected '<video_id> <caption>'");
        }
        by_video[trimmed.substr(0, space)].push_back(trim(trimmed.substr(space + 1)));
    }
    if (by_video.empty()) throw DataError(captions.string() + ": no records");

    const auto &list_path = which == Split::Train ? train_list : test_list;
    std::vector<CaptionRecord> records;
    std::set<std::string> seen;
    for (const auto &video : read_id_list(list_path)) {
        if (!seen.insert(video).second) continue;
        const auto it = by_video.find(video);
        if (it == by_video.end()) {
            throw DataError(list_path.string() + ": split references missing video '" + video + "'");
        }
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            records.push_back({caption_key(video, i), video, it->second[i], which, Dataset::Msvd, {}});
        }
    }
    if (records.empty()) throw DataError(list_path.string() + ": no records");
    return sorted_by_caption_id(std::move(records));
}

std::vector<CaptionRecord> load_didemo(const std::filesystem::path &annotations, std::string_view split,
                                       const DidemoOptions &options) {
    const Split which = parse_split(split);
    const json doc = parse_json_file(annotations);
    if (!doc.is_array() || doc.empty()) throw DataError(annotations.string() + ": no records");

    std::vector<std::string> order;
    std::map<std::string, std::vector<std::string>> sentences;
    try {
        for (const auto &entry : doc) {
            auto video = id_string(entry.at(options.video_field));
            auto [it, inserted] = sentences.try_emplace(video);
            if (inserted) order.push_back(video);
            auto text = trim(entry.at(options.text_field).get<std::string>());
            if (!text.empty()) it->second.push_back(std::move(text));
        }
    } catch (const json::exception &e) {
        throw DataError(annotations.string() + ": " + e.what());
    }

    std::vector<CaptionRecord> records;
    for (const auto &video : order) {
        const auto &parts = sentences[video];
        if (parts.empty()) continue;
        std::string text;
        for (const auto &p : parts) {
            if (!text.empty()) text += ' ';
            text += p;
        }
        records.push_back({caption_key(video, 0), video, std::move(text), which, Dataset::Didemo, parts});
    }
    if (records.empty()) throw DataError(annotations.string() + ": no records");
    return sorted_by_caption_id(std::move(records));
}

std::vector<CaptionRecord> sorted_by_caption_id(std::vector<CaptionRecord> records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const CaptionRecord &a, const CaptionRecord &b) { return a.caption_id < b.caption_id; });
    return records;
}

CorpusManifest summarize(std::span<const CaptionRecord> records, std::string_view digest) {
    CorpusManifest m;
    std::set<std::string_view> datasets, splits, videos;
    for (const auto &r : records) {
        datasets.insert(dataset_name(r.dataset));
        splits.insert(split_name(r.split));
        videos.insert(r.video_id);
    }
    m.dataset = datasets.size() == 1 ? std::string(*datasets.begin()) : datasets.empty() ? "" : "mixed";
    m.split = splits.size() == 1 ? std::string(*splits.begin()) : splits.empty() ? "" : "mixed";
    m.record_count = records.size();
    m.video_count = videos.size();
    m.digest = digest;
    return m;
}

std::string corpus_jsonl(std::span<const CaptionRecord> records) {
    check_unique(records);
    std::vector<const CaptionRecord *> ordered;
    for (const auto &r : records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto *a, const auto *b) { return a->caption_id < b->caption_id; });
    std::string out;
    for (const auto *r : ordered) {
        ojson j;
        j["caption_id"] = r->caption_id;
        j["video_id"] = r->video_id;
        j["text"] = r->text;
        j["split"] = split_name(r->split);
        j["dataset"] = dataset_name(r->dataset);
        if (!r->sentences.empty()) j["sentences"] = r->sentences;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::filesystem::path manifest_path_for(const std::filesystem::path &corpus_path) {
    auto p = corpus_path;
    p += ".manifest.json";
    return p;
}

CorpusManifest write_corpus(std::span<const CaptionRecord> records, const std::filesystem::path &path) {
    const auto body = corpus_jsonl(records);
    auto manifest = summarize(records, file_digest(body));
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << body;
        if (!out) throw IoError("failed writing " + path.string());
    }
    ojson m;
    m["dataset"] = manifest.dataset;
    m["split"] = manifest.split;
    m["record_count"] = manifest.record_count;
    m["video_count"] = manifest.video_count;
    m["digest"] = manifest.digest;
    std::ofstream out(manifest_path_for(path), std::ios::binary);
    if (!out) throw IoError("cannot write " + manifest_path_for(path).string());
    out << m.dump(1) << '\n';
    return manifest;
}

std::vector<CaptionRecord> read_corpus(const std::filesystem::path &path) {
    const auto body = read_file(path);
    const auto manifest_file = manifest_path_for(path);
    if (!std::filesystem::exists(manifest_file)) throw IoError("missing corpus manifest " + manifest_file.string());
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_file));
    } catch (const json::parse_error &e) {
        throw DataError(manifest_file.string() + ": " + e.what());
    }
    const auto expected = manifest.value("digest", std::string{});
    if (expected != file_digest(body)) {
        throw DataError(path.string() + ": digest mismatch (file is corrupt or truncated)");
    }

    std::vector<CaptionRecord> records;
    std::istringstream in(body);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception &e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    check_unique(records);
    const auto summary = summarize(records);
    if (summary.record_count != manifest.value("record_count", std::size_t{0}) ||
        summary.video_count != manifest.value("video_count", std::size_t{0})) {
        throw DataError(path.string() + ": record or video count disagrees with manifest");
    }
    return records;
}

// --- adapter configs -------------------------------------------------------

std::optional<std::string> AdapterConfig::get(std::string_view key) const {
    const auto it = values.find(std::string(key));
    if (it == values.end()) return std::nullopt;
    return it->second;
}

std::string AdapterConfig::require(std::string_view key) const {
    if (auto v = get(key)) return *v;
    throw UsageError("dataset adapter is missing key '" + std::string(key) + "'");
}

std::filesystem::path AdapterConfig::path(std::string_view key) const {
    std::filesystem::path p = require(key);
    return p.is_absolute() ? p : base_dir / p;
}

AdapterConfig parse_adapter_config(std::istream &in, std::filesystem::path base_dir) {
    AdapterConfig config;
    config.base_dir = std::move(base_dir);
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    auto fail = [&](const std::string &what) {
        throw UsageError("adapter config line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        auto key = trim(std::string_view(line).substr(0, eq));
        auto rest = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) fail("empty key");
        std::string value;
        if (!rest.empty() && rest.front() == '"') {
            std::size_t i = 1;
            bool closed = false;
            for (; i < rest.size(); ++i) {
                if (rest[i] == '\\' && i + 1 < rest.size()) {
                    value += rest[++i];
                } else if (rest[i] == '"') {
                    closed = true;
                    break;
                } else {
                    value += rest[i];
                }
            }
            if (!closed) fail("unterminated string");
            const auto tail = trim(std::string_view(rest).substr(i + 1));
            if (!tail.empty() && tail.front() != '#') fail("unexpected text after value");
        } else {
            const auto hash = rest.find('#');
            value = trim(std::string_view(rest).substr(0, hash));
        }
        config.values[section.empty() ? key : section + "." + key] = value;
    }
    return config;
}

AdapterConfig load_adapter_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open adapter config " + path.string());
    return parse_adapter_config(in, path.parent_path());
}

std::vector<CaptionRecord> load_dataset(const AdapterConfig &config, std::string_view split_override) {
    const Dataset dataset = parse_dataset(config.require("dataset"));
    const std::string split = split_override.empty() ? config.get("split").value_or("test") : std::string(split_override);
    const std::string split_key = split + "_split";
    switch (dataset) {
    case Dataset::Msrvtt: {
        MsrvttOptions options;
        const auto per_video = config.get("captions_per_video").value_or("one");
        if (per_video != "one" && per_video != "all") throw UsageError("captions_per_video must be 'one' or 'all'");
        options.all_test_captions = per_video == "all";
        options.sentences_key = config.get("sentences_key").value_or(options.sentences_key);
        options.videos_key = config.get("videos_key").value_or(options.videos_key);
        options.video_field = config.get("video_field").value_or(options.video_field);
        options.text_field = config.get("text_field").value_or(options.text_field);
        parse_split(split);
        return load_msrvtt(config.path("annotations"), config.path(split_key), split, options);
    }
    case Dataset::Msvd:
        return load_msvd(config.path("annotations"), config.path("train_split"), config.path("test_split"), split);
    case Dataset::Didemo: {
        DidemoOptions options;
        options.video_field = config.get("video_field").value_or(options.video_field);
        options.text_field = config.get("text_field").value_or(options.text_field);
        parse_split(split);
        return load_didemo(config.path(split + "_annotations"), split, options);
    }
    }
    throw UsageError("unsupported dataset");
}

std::vector<TaggedCaption> tag_corpus(std::span<const CaptionRecord> records, const TaggerModel &model) {
    std::vector<TaggedCaption> out;
    out.reserve(records.size());
    for (const auto &r : records) {
        auto cap = tag_caption(model, r.caption_id, r.video_id, r.text);
        cap.segments = segment_lengths(r);
        out.push_back(std::move(cap));
    }
    return out;
}

std::vector<TaggedCaption> align_external_tags(std::span<const CaptionRecord> records,
                                               std::span<const TaggedCaption> sidecar) {
    std::map<std::string_view, const TaggedCaption *> by_id;
    for (const auto &cap : sidecar) by_id.emplace(cap.caption_id, &cap);
    std::vector<TaggedCaption> out;
    out.reserve(records.size());
    for (const auto &r : records) {
        const auto it = by_id.find(r.caption_id);
        if (it == by_id.end()) throw DataError("tag sidecar has no entry for caption '" + r.caption_id + "'");
        const auto expected = tokenize(r.text).size();
        if (it->second->tokens.size() != expected) {
            throw DataError("tag sidecar caption '" + r.caption_id + "' has " +
                            std::to_string(it->second->tokens.size()) + " tags but its text has " +
                            std::to_string(expected) + " tokens");
        }
        auto cap = *it->second;
        cap.video_id = r.video_id;
        cap.segments = segment_lengths(r);
        out.push_back(std::move(cap));
    }
    return out;
}

} // namespace captionprobe
