#pragma once

#include "captionprobe/textproc.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace captionprobe {

enum class Dataset : std::uint8_t { Msrvtt, Msvd, Didemo };
enum class Split : std::uint8_t { Train, Test };

std::string_view dataset_name(Dataset d) noexcept;
std::string_view split_name(Split s) noexcept;
// Both throw UsageError on unknown names.
Dataset parse_dataset(std::string_view name);
Split parse_split(std::string_view name);

struct CaptionRecord {
    std::string caption_id;
    std::string video_id;
    std::string text;
    Split split = Split::Test;
    Dataset dataset = Dataset::Msrvtt;
    // Source sentences of a concatenated paragraph (DiDeMo); empty otherwise.
    std::vector<std::string> sentences;

    friend bool operator==(const CaptionRecord &, const CaptionRecord &) = default;
};

struct CorpusManifest {
    std::string dataset;
    std::string split;
    std::size_t record_count = 0;
    std::size_t video_count = 0;
    std::string digest;
};

struct MsrvttOptions {
    // Keep every caption of each test video instead of one per video.
    bool all_test_captions = false;
    std::string sentences_key = "sentences";
    std::string videos_key = "videos";
    std::string video_field = "video_id";
    std::string text_field = "caption";
};

// `annotations` is the MSRVTT_data.json layout; `split_file` is a CSV with a
// `video_id` column and, for the 1k-A test list, an optional `sentence` column
// supplying the single test caption. Caption ids are "<video_id>#<ordinal>".
std::vector<CaptionRecord> load_msrvtt(const std::filesystem::path &annotations,
                                       const std::filesystem::path &split_file, std::string_view split,
                                       const MsrvttOptions &options = {});

// `captions` holds "<video_id> <caption>" lines; the lists hold one video id
// per line.
std::vector<CaptionRecord> load_msvd(const std::filesystem::path &captions, const std::filesystem::path &train_list,
                                     const std::filesystem::path &test_list, std::string_view split);

struct DidemoOptions {
    std::string video_field = "video";
    std::string text_field = "description";
};

// One record per video whose text is all of its descriptions, in annotation
// order, joined by single spaces.
std::vector<CaptionRecord> load_didemo(const std::filesystem::path &annotations, std::string_view split,
                                       const DidemoOptions &options = {});

std::vector<CaptionRecord> sorted_by_caption_id(std::vector<CaptionRecord> records);
CorpusManifest summarize(std::span<const CaptionRecord> records, std::string_view digest = {});

std::string corpus_jsonl(std::span<const CaptionRecord> records);
// Writes `path` (records sorted by caption_id) and `<path>.manifest.json`.
CorpusManifest write_corpus(std::span<const CaptionRecord> records, const std::filesystem::path &path);
// Verifies the manifest digest and counts; throws DataError on mismatch.
std::vector<CaptionRecord> read_corpus(const std::filesystem::path &path);
std::filesystem::path manifest_path_for(const std::filesystem::path &corpus_path);

// Dataset adapter: a TOML-style key/value file, e.g.
//   dataset = "msrvtt"
//   split = "test"
//   annotations = "MSRVTT_data.json"
//   test_split = "MSRVTT_JSFUSION_test.csv"
// Relative paths resolve against the config file's directory.
struct AdapterConfig {
    std::map<std::string, std::string> values;
    std::filesystem::path base_dir;

    std::optional<std::string> get(std::string_view key) const;
    std::string require(std::string_view key) const;
    std::filesystem::path path(std::string_view key) const;
};

AdapterConfig parse_adapter_config(std::istream &in, std::filesystem::path base_dir = {});
AdapterConfig load_adapter_config(const std::filesystem::path &path);
// `split_override`, when non-empty, replaces the config's split.
std::vector<CaptionRecord> load_dataset(const AdapterConfig &config, std::string_view split_override = {});

// Internal tagger route.
std::vector<TaggedCaption> tag_corpus(std::span<const CaptionRecord> records, const TaggerModel &model);
// Sidecar route: every record must have a sidecar caption with the same id and
// as many tokens as tokenize(record.text).
std::vector<TaggedCaption> align_external_tags(std::span<const CaptionRecord> records,
                                               std::span<const TaggedCaption> sidecar);

} // namespace captionprobe
