#pragma once

#include "captionprobe/perturb.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace captionprobe {

// One line of a `<task_id>.jsonl` manifest.
struct ManifestRecord {
    std::string caption_id;
    std::string video_id;
    std::string task_id;
    std::string text;
    std::vector<Provenance> provenance;
    std::optional<std::string> error;

    friend bool operator==(const ManifestRecord &, const ManifestRecord &) = default;
};

struct SuiteOptions {
    std::vector<PerturbationKind> tasks{kAllPerturbations.begin(), kAllPerturbations.end()};
    std::uint64_t run_seed = 0;
    PartialMode partial_mode = PartialMode::Random;
    bool per_segment = false;
};

struct PerturbedCorpus {
    // task_id -> records sorted by caption_id; always holds "original".
    std::map<std::string, std::vector<ManifestRecord>> manifests;

    std::size_t failure_count() const;
};

// Runs every requested task on every caption. A caption that fails a task gets
// a record carrying its unperturbed text and the error message; other tasks
// and captions are unaffected. Throws DataError for duplicate caption ids.
PerturbedCorpus apply_suite(std::span<const TaggedCaption> corpus, const SuiteOptions &options,
                            const ReplacementVocab *vocab, const Lexicon *lexicon);

std::string manifest_line(const ManifestRecord &record);
ManifestRecord parse_manifest_line(std::string_view line);
std::string manifest_jsonl(std::span<const ManifestRecord> records);

// Writes `<dir>/<task_id>.jsonl` for each manifest; returns the paths written.
std::vector<std::filesystem::path> write_manifests(const PerturbedCorpus &corpus, const std::filesystem::path &dir);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path &path);

} // namespace captionprobe
