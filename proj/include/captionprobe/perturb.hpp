#pragma once

#include "captionprobe/hash.hpp"
#include "captionprobe/textproc.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace captionprobe {

enum class PerturbationKind : std::uint8_t {
    ObjAttrRemoval,
    ObjShift,
    ObjReplacement,
    ObjPartial,
    ActRemoval,
    ActNegation,
    ActReplacement,
    SynRemoval,
    Shuffle,
    Reverse,
};

// Listing order of the task table; report columns follow it.
inline constexpr std::array<PerturbationKind, 10> kAllPerturbations = {
    PerturbationKind::ObjAttrRemoval, PerturbationKind::ObjShift,     PerturbationKind::ObjReplacement,
    PerturbationKind::ObjPartial,     PerturbationKind::ActRemoval,   PerturbationKind::ActNegation,
    PerturbationKind::ActReplacement, PerturbationKind::SynRemoval,   PerturbationKind::Shuffle,
    PerturbationKind::Reverse,
};

inline constexpr std::string_view kOriginalTaskId = "original";

std::string_view task_id(PerturbationKind kind) noexcept;
std::optional<PerturbationKind> parse_task_id(std::string_view id) noexcept;

// True for the tasks that draw from a SplitMix64 stream.
bool uses_rng(PerturbationKind kind) noexcept;
// True for the tasks that need a ReplacementVocab.
bool needs_vocab(PerturbationKind kind) noexcept;

struct Provenance {
    enum class Origin : std::uint8_t { Source, Inserted, Replaced };

    Origin origin = Origin::Source;
    // Source token index; meaningless for Inserted.
    std::size_t source = 0;

    static Provenance copy(std::size_t i) { return {Origin::Source, i}; }
    static Provenance replace(std::size_t i) { return {Origin::Replaced, i}; }
    static Provenance insert() { return {Origin::Inserted, 0}; }

    friend bool operator==(const Provenance &, const Provenance &) = default;
};

struct OutputToken {
    std::string surface;
    Provenance provenance;
};

struct PerturbedCaption {
    std::string caption_id;
    std::string video_id;
    PerturbationKind kind = PerturbationKind::ObjAttrRemoval;
    std::vector<OutputToken> tokens;

    std::string text() const;
    std::vector<Provenance> provenance() const;
};

struct ReplacementVocab {
    // Lowercased surface -> corpus frequency.
    std::map<std::string, std::uint64_t> nouns;
    std::map<std::string, std::uint64_t> verbs;
    std::string corpus_digest;

    std::string to_json() const;
    static ReplacementVocab from_json(std::string_view json);
    void save(const std::filesystem::path &path) const;
    static ReplacementVocab load(const std::filesystem::path &path);
};

// Nouns are NOUN/PROPN tokens, verbs are Action tokens; counts use the
// lowercased form.
ReplacementVocab build_vocab(std::span<const TaggedCaption> corpus);

class Lexicon {
public:
    // "lemma<TAB>syn:<comma-list><TAB>ant:<comma-list>", one entry per line.
    static Lexicon parse(std::istream &in);
    static Lexicon load(const std::filesystem::path &path);

    void add(std::string lemma, std::set<std::string> synonyms, std::set<std::string> antonyms);

    const std::set<std::string> &synonyms(std::string_view lemma) const;
    const std::set<std::string> &antonyms(std::string_view lemma) const;
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    // True when `candidate` equals `original` or is listed as one of its
    // synonyms or antonyms. Both arguments are expected lowercased.
    bool excludes(std::string_view original, std::string_view candidate) const;

private:
    struct Entry {
        std::set<std::string> synonyms;
        std::set<std::string> antonyms;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

enum class PartialMode : std::uint8_t { Random, KeepFirst, KeepLast };

std::string_view partial_mode_name(PartialMode mode) noexcept;
std::optional<PartialMode> parse_partial_mode(std::string_view name) noexcept;

PerturbedCaption object_attribute_removal(const TaggedCaption &cap);
PerturbedCaption object_shift(const TaggedCaption &cap);
PerturbedCaption object_replacement(const TaggedCaption &cap, const ReplacementVocab &vocab, const Lexicon &lex,
                                    SplitMix64 &rng);
PerturbedCaption object_partial(const TaggedCaption &cap, SplitMix64 &rng, PartialMode mode = PartialMode::Random);
PerturbedCaption action_removal(const TaggedCaption &cap);
PerturbedCaption action_negation(const TaggedCaption &cap);
PerturbedCaption action_replacement(const TaggedCaption &cap, const ReplacementVocab &vocab, const Lexicon &lex,
                                    SplitMix64 &rng);
PerturbedCaption syntax_removal(const TaggedCaption &cap);
PerturbedCaption shuffle(const TaggedCaption &cap, SplitMix64 &rng);
PerturbedCaption reverse(const TaggedCaption &cap);

struct PerturbContext {
    const ReplacementVocab *vocab = nullptr;
    const Lexicon *lexicon = nullptr;
    PartialMode partial_mode = PartialMode::Random;
    // Apply the task to each sentence segment separately and concatenate.
    bool per_segment = false;
};

// Dispatches to the task; throws DataError when a replacement task runs
// without a vocabulary or with an exhausted candidate pool.
PerturbedCaption apply_perturbation(PerturbationKind kind, const TaggedCaption &cap, const PerturbContext &ctx,
                                    SplitMix64 &rng);

} // namespace captionprobe
