#pragma once

#include "captionprobe/hash.hpp"
#include "captionprobe/textproc.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace captionprobe::testing {

inline constexpr std::string_view kExampleText = "a guy wearing a red shirt drives a car while talking";

std::filesystem::path data_path(std::string_view relative);
std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag);
    ~TempDir();
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const noexcept { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Builds a caption from "word/TAG word/TAG ..." notation.
TaggedCaption caption(std::string_view id, std::string_view annotated, std::string_view video_id = {});

// The running example with its gold tags.
TaggedCaption example_caption();

// Random caption of 0..max_len tokens over a small vocabulary so surfaces
// repeat; every UPOS tag appears with nonzero probability.
TaggedCaption random_caption(SplitMix64 &rng, std::string id, std::size_t max_len = 18);

// Templated corpus "a ADJ NOUN VERB ADP the NOUN" with unique token bags.
// The first `verb_twins` captions come in pairs that differ only in their
// verb; the next `syntax_twins` in pairs that differ only in their adposition.
struct TemplatedCorpus {
    std::vector<TaggedCaption> captions;
    std::size_t verb_twins = 0;
    std::size_t syntax_twins = 0;
};
TemplatedCorpus templated_corpus(std::size_t size = 200, std::size_t verb_twins = 60, std::size_t syntax_twins = 40);

} // namespace captionprobe::testing
