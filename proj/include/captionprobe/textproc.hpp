#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace captionprobe {

// The 17 universal part-of-speech tags, in alphabetical order.
enum class Upos : std::uint8_t {
    ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X
};

inline constexpr std::size_t kUposCount = 17;

std::string_view upos_name(Upos tag) noexcept;
std::optional<Upos> parse_upos(std::string_view name) noexcept;
// Throws DataError on unknown tag strings.
Upos upos_from_string(std::string_view name);

enum class Category : std::uint8_t { ObjectAttribute, Action, Syntax };

std::string_view category_name(Category category) noexcept;

// NOUN, PROPN, ADJ, ADV -> ObjectAttribute; VERB -> Action; everything else
// (AUX included) -> Syntax.
constexpr Category categorize(Upos tag) noexcept {
    switch (tag) {
    case Upos::NOUN:
    case Upos::PROPN:
    case Upos::ADJ:
    case Upos::ADV:
        return Category::ObjectAttribute;
    case Upos::VERB:
        return Category::Action;
    default:
        return Category::Syntax;
    }
}

Category categorize(std::string_view tag_name);

constexpr bool is_noun(Upos tag) noexcept { return tag == Upos::NOUN || tag == Upos::PROPN; }

struct Token {
    std::string surface;
    std::string lower;
    Upos pos = Upos::X;
    Category category = Category::Syntax;
    std::size_t index = 0;
};

struct TaggedCaption {
    std::string caption_id;
    std::string video_id;
    std::vector<Token> tokens;
    // Token counts of consecutive sentences for paragraph captions. Empty means
    // the caption is a single segment.
    std::vector<std::size_t> segments;

    std::string text() const;
};

// ASCII case folding; bytes outside ASCII are copied unchanged.
std::string fold_case(std::string_view text);

// Maximal runs of letters, digits and apostrophes form words; every other
// printable ASCII character is a one-character token; whitespace and control
// characters separate tokens. Non-ASCII code points count as word characters.
std::vector<std::string> tokenize(std::string_view text);

// tokenize() joined with single spaces.
std::string normalize(std::string_view text);

std::string join_tokens(std::span<const std::string> surfaces);

// Builds a caption from parallel surface and tag sequences. Throws DataError
// when the lengths differ.
TaggedCaption make_tagged_caption(std::string caption_id, std::string video_id,
                                  std::span<const std::string> surfaces, std::span<const Upos> tags);

// Tag sidecar: "# id = <caption_id>" opens a caption, followed by
// "surface<TAB>UPOS" lines; a blank line closes it. Optional "# text = ..." and
// "# video_id = ..." comment lines are honoured; when "# text" is present the
// token count is checked against tokenize(text).
std::vector<TaggedCaption> parse_tag_sidecar(std::istream &in);
std::vector<TaggedCaption> load_external_tags(const std::filesystem::path &path);
void write_tag_sidecar(std::ostream &out, std::span<const TaggedCaption> captions);

// --- averaged perceptron tagger -------------------------------------------

struct TaggedSentence {
    std::vector<std::string> words;
    std::vector<Upos> tags;
};

// Reads CoNLL-U (10 columns, UPOS in column 4; multiword and empty-node lines
// skipped) or the two-column sidecar layout.
std::vector<TaggedSentence> parse_treebank(std::istream &in);
std::vector<TaggedSentence> read_treebank(const std::filesystem::path &path);

class TaggerModel {
public:
    using Weights = std::array<double, kUposCount>;

    TaggerModel() = default;

    bool empty() const noexcept { return tags_.empty(); }
    const std::vector<Upos> &tags() const noexcept { return tags_; }
    int iterations() const noexcept { return iterations_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::string &corpus_digest() const noexcept { return corpus_digest_; }
    std::size_t feature_count() const noexcept { return features_.size(); }

    // Greedy left-to-right decoding. Throws DataError on an untrained model.
    std::vector<Upos> tag(std::span<const std::string> tokens) const;

    std::string to_json() const;
    static TaggerModel from_json(std::string_view json);
    void save(const std::filesystem::path &path) const;
    static TaggerModel load(const std::filesystem::path &path);

private:
    friend class PerceptronTrainer;
    friend TaggerModel train_tagger(std::span<const TaggedSentence> corpus, int iterations, std::uint64_t seed);

    Upos predict(const std::vector<std::string> &features) const;

    std::unordered_map<std::string, Weights> features_;
    std::vector<Upos> tags_;
    int iterations_ = 0;
    std::uint64_t seed_ = 0;
    std::string corpus_digest_;
};

TaggerModel train_tagger(std::span<const TaggedSentence> corpus, int iterations, std::uint64_t seed);

// Fraction of tokens whose predicted tag equals the gold tag.
double tagging_accuracy(const TaggerModel &model, std::span<const TaggedSentence> gold);

TaggedCaption tag_caption(const TaggerModel &model, std::string caption_id, std::string video_id,
                          std::string_view text);

} // namespace captionprobe
