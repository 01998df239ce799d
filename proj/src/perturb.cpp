#include "captionprobe/perturb.hpp"

#include "captionprobe/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace captionprobe {

namespace {

constexpr std::array<std::string_view, 10> kTaskIds = {
    "obj_attr_removal", "obj_shift",    "obj_replacement", "obj_partial", "act_removal",
    "act_negation",     "act_replacement", "syn_removal", "shuffle",     "reverse"};

constexpr std::string_view kNegation = "not";

PerturbedCaption start(const TaggedCaption &cap, PerturbationKind kind) {
    PerturbedCaption out;
    out.caption_id = cap.caption_id;
    out.video_id = cap.video_id;
    out.kind = kind;
    return out;
}

template <typename Keep>
PerturbedCaption keep_if(const TaggedCaption &cap, PerturbationKind kind, Keep keep) {
    auto out = start(cap, kind);
    for (const auto &token : cap.tokens) {
        if (keep(token)) out.tokens.push_back({token.surface, Provenance::copy(token.index)});
    }
    return out;
}

template <typename IsTarget>
PerturbedCaption replace_targets(const TaggedCaption &cap, PerturbationKind kind,
                                 const std::map<std::string, std::uint64_t> &inventory, const Lexicon &lex,
                                 SplitMix64 &rng, IsTarget is_target) {
    auto out = start(cap, kind);
    std::vector<const std::string *> pool;
    for (const auto &token : cap.tokens) {
        if (!is_target(token)) {
            out.tokens.push_back({token.surface, Provenance::copy(token.index)});
            continue;
        }
        pool.clear();
        for (const auto &[word, count] : inventory) {
            if (!lex.excludes(token.lower, word)) pool.push_back(&word);
        }
        if (pool.empty()) {
            throw DataError("no replacement candidates for '" + token.surface + "' (token " +
                            std::to_string(token.index) + ")");
        }
        out.tokens.push_back({*pool[rng.uniform(pool.size())], Provenance::replace(token.index)});
    }
    return out;
}

std::vector<std::size_t> noun_positions(const TaggedCaption &cap) {
    std::vector<std::size_t> positions;
    for (const auto &token : cap.tokens) {
        if (is_noun(token.pos)) positions.push_back(token.index);
    }
    return positions;
}

const std::set<std::string> &empty_set() {
    static const std::set<std::string> empty;
    return empty;
}

std::set<std::string> parse_list(std::string_view field, std::string_view prefix, std::size_t line_no) {
    if (field.substr(0, prefix.size()) != prefix) {
        throw DataError("lexicon line " + std::to_string(line_no) + ": expected '" + std::string(prefix) + "' field");
    }
    field.remove_prefix(prefix.size());
    std::set<std::string> items;
    while (!field.empty()) {
        const auto comma = field.find(',');
        auto item = field.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) items.insert(fold_case(item));
        if (comma == std::string_view::npos) break;
        field.remove_prefix(comma + 1);
    }
    return items;
}

TaggedCaption slice(const TaggedCaption &cap, std::size_t begin, std::size_t count) {
    TaggedCaption part{cap.caption_id, cap.video_id, {}, {}};
    part.tokens.assign(cap.tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                       cap.tokens.begin() + static_cast<std::ptrdiff_t>(begin + count));
    for (auto &token : part.tokens) token.index -= begin;
    return part;
}

PerturbedCaption dispatch(PerturbationKind kind, const TaggedCaption &cap, const PerturbContext &ctx,
                          SplitMix64 &rng) {
    static const Lexicon no_lexicon;
    const Lexicon &lex = ctx.lexicon ? *ctx.lexicon : no_lexicon;
    auto vocab = [&]() -> const ReplacementVocab & {
        if (!ctx.vocab) throw DataError(std::string(task_id(kind)) + " requires a replacement vocabulary");
        return *ctx.vocab;
    };
    switch (kind) {
    case PerturbationKind::ObjAttrRemoval:
        return object_attribute_removal(cap);
    case PerturbationKind::ObjShift:
        return object_shift(cap);
    case PerturbationKind::ObjReplacement:
        return object_replacement(cap, vocab(), lex, rng);
    case PerturbationKind::ObjPartial:
        return object_partial(cap, rng, ctx.partial_mode);
    case PerturbationKind::ActRemoval:
        return action_removal(cap);
    case PerturbationKind::ActNegation:
        return action_negation(cap);
    case PerturbationKind::ActReplacement:
        return action_replacement(cap, vocab(), lex, rng);
    case PerturbationKind::SynRemoval:
        return syntax_removal(cap);
    case PerturbationKind::Shuffle:
        return shuffle(cap, rng);
    case PerturbationKind::Reverse:
        return reverse(cap);
    }
    throw DataError("unknown perturbation kind");
}

} // namespace

std::string_view task_id(PerturbationKind kind) noexcept { return kTaskIds[static_cast<std::size_t>(kind)]; }

std::optional<PerturbationKind> parse_task_id(std::string_view id) noexcept {
    for (std::size_t i = 0; i < kTaskIds.size(); ++i) {
        if (kTaskIds[i] == id) return static_cast<PerturbationKind>(i);
    }
    return std::nullopt;
}

bool uses_rng(PerturbationKind kind) noexcept {
    return kind == PerturbationKind::ObjReplacement || kind == PerturbationKind::ObjPartial ||
           kind == PerturbationKind::ActReplacement || kind == PerturbationKind::Shuffle;
}

bool needs_vocab(PerturbationKind kind) noexcept {
    return kind == PerturbationKind::ObjReplacement || kind == PerturbationKind::ActReplacement;
}

std::string PerturbedCaption::text() const {
    std::string out;
    for (const auto &token : tokens) {
        if (!out.empty()) out += ' ';
        out += token.surface;
    }
    return out;
}

std::vector<Provenance> PerturbedCaption::provenance() const {
    std::vector<Provenance> out;
    out.reserve(tokens.size());
    for (const auto &token : tokens) out.push_back(token.provenance);
    return out;
}

// --- vocabulary and lexicon ------------------------------------------------

ReplacementVocab build_vocab(std::span<const TaggedCaption> corpus) {
    ReplacementVocab vocab;
    std::vector<const TaggedCaption *> ordered;
    ordered.reserve(corpus.size());
    for (const auto &cap : corpus) ordered.push_back(&cap);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto *a, const auto *b) { return a->caption_id < b->caption_id; });

    std::uint64_t h = kFnvOffsetBasis;
    for (const auto *cap : ordered) {
        h = fnv1a64(cap->caption_id, h);
        for (const auto &token : cap->tokens) {
            h = fnv1a64("\t", h);
            h = fnv1a64(token.surface, h);
            h = fnv1a64("/", h);
            h = fnv1a64(upos_name(token.pos), h);
            if (is_noun(token.pos)) {
                ++vocab.nouns[token.lower];
            } else if (token.category == Category::Action) {
                ++vocab.verbs[token.lower];
            }
        }
        h = fnv1a64("\n", h);
    }
    vocab.corpus_digest = hex64(h);
    return vocab;
}

std::string ReplacementVocab::to_json() const {
    nlohmann::ordered_json doc;
    doc["format"] = "captionprobe.vocab";
    doc["version"] = 1;
    doc["corpus_digest"] = corpus_digest;
    doc["nouns"] = nouns;
    doc["verbs"] = verbs;
    return doc.dump(1);
}

ReplacementVocab ReplacementVocab::from_json(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        if (doc.at("format").get<std::string>() != "captionprobe.vocab") throw DataError("not a vocabulary file");
        ReplacementVocab vocab;
        vocab.corpus_digest = doc.at("corpus_digest").get<std::string>();
        vocab.nouns = doc.at("nouns").get<std::map<std::string, std::uint64_t>>();
        vocab.verbs = doc.at("verbs").get<std::map<std::string, std::uint64_t>>();
        return vocab;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("malformed vocabulary: ") + e.what());
    }
}

void ReplacementVocab::save(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocabulary " + path.string());
    out << to_json() << '\n';
}

ReplacementVocab ReplacementVocab::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

Lexicon Lexicon::parse(std::istream &in) {
    Lexicon lex;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw.front() == '#') continue;
        std::vector<std::string_view> cols;
        std::string_view rest = raw;
        for (;;) {
            const auto tab = rest.find('\t');
            cols.push_back(rest.substr(0, tab));
            if (tab == std::string_view::npos) break;
            rest.remove_prefix(tab + 1);
        }
        if (cols.size() != 3 || cols[0].empty()) {
            throw DataError("lexicon line " + std::to_string(line_no) + ": expected lemma<TAB>syn:...<TAB>ant:...");
        }
        lex.add(fold_case(cols[0]), parse_list(cols[1], "syn:", line_no), parse_list(cols[2], "ant:", line_no));
    }
    return lex;
}

Lexicon Lexicon::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon " + path.string());
    return parse(in);
}

void Lexicon::add(std::string lemma, std::set<std::string> synonyms, std::set<std::string> antonyms) {
    auto &entry = entries_[std::move(lemma)];
    entry.synonyms.merge(synonyms);
    entry.antonyms.merge(antonyms);
}

const std::set<std::string> &Lexicon::synonyms(std::string_view lemma) const {
    const auto it = entries_.find(lemma);
    return it == entries_.end() ? empty_set() : it->second.synonyms;
}

const std::set<std::string> &Lexicon::antonyms(std::string_view lemma) const {
    const auto it = entries_.find(lemma);
    return it == entries_.end() ? empty_set() : it->second.antonyms;
}

bool Lexicon::excludes(std::string_view original, std::string_view candidate) const {
    if (original == candidate) return true;
    const auto it = entries_.find(original);
    if (it == entries_.end()) return false;
    const std::string key(candidate);
    return it->second.synonyms.contains(key) || it->second.antonyms.contains(key);
}

std::string_view partial_mode_name(PartialMode mode) noexcept {
    switch (mode) {
    case PartialMode::KeepFirst:
        return "keep-first";
    case PartialMode::KeepLast:
        return "keep-last";
    case PartialMode::Random:
        break;
    }
    return "random";
}

std::optional<PartialMode> parse_partial_mode(std::string_view name) noexcept {
    if (name == "random") return PartialMode::Random;
    if (name == "keep-first") return PartialMode::KeepFirst;
    if (name == "keep-last") return PartialMode::KeepLast;
    return std::nullopt;
}

// --- tasks -----------------------------------------------------------------

PerturbedCaption object_attribute_removal(const TaggedCaption &cap) {
    return keep_if(cap, PerturbationKind::ObjAttrRemoval,
                   [](const Token &t) { return t.category != Category::ObjectAttribute; });
}

PerturbedCaption object_shift(const TaggedCaption &cap) {
    auto out = keep_if(cap, PerturbationKind::ObjShift, [](const Token &) { return true; });
    const auto positions = noun_positions(cap);
    if (positions.size() < 2) return out;
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const std::size_t from = positions[(i + 1) % positions.size()];
        out.tokens[positions[i]] = {cap.tokens[from].surface, Provenance::copy(from)};
    }
    return out;
}

PerturbedCaption object_replacement(const TaggedCaption &cap, const ReplacementVocab &vocab, const Lexicon &lex,
                                    SplitMix64 &rng) {
    return replace_targets(cap, PerturbationKind::ObjReplacement, vocab.nouns, lex, rng,
                           [](const Token &t) { return is_noun(t.pos); });
}

PerturbedCaption object_partial(const TaggedCaption &cap, SplitMix64 &rng, PartialMode mode) {
    const auto positions = noun_positions(cap);
    const std::size_t k = positions.size();
    const std::size_t keep = k / 2;
    std::set<std::size_t> kept;
    switch (mode) {
    case PartialMode::KeepFirst:
        kept.insert(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(keep));
        break;
    case PartialMode::KeepLast:
        kept.insert(positions.end() - static_cast<std::ptrdiff_t>(keep), positions.end());
        break;
    case PartialMode::Random: {
        // Partial Fisher-Yates: the first `keep` slots end up a uniform sample.
        auto pick = positions;
        for (std::size_t i = 0; i < keep; ++i) {
            std::swap(pick[i], pick[i + rng.uniform(k - i)]);
        }
        kept.insert(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(keep));
        break;
    }
    }
    return keep_if(cap, PerturbationKind::ObjPartial,
                   [&](const Token &t) { return !is_noun(t.pos) || kept.contains(t.index); });
}

PerturbedCaption action_removal(const TaggedCaption &cap) {
    return keep_if(cap, PerturbationKind::ActRemoval, [](const Token &t) { return t.category != Category::Action; });
}

PerturbedCaption action_negation(const TaggedCaption &cap) {
    auto out = start(cap, PerturbationKind::ActNegation);
    for (const auto &token : cap.tokens) {
        if (token.category == Category::Action) out.tokens.push_back({std::string(kNegation), Provenance::insert()});
        out.tokens.push_back({token.surface, Provenance::copy(token.index)});
    }
    return out;
}

PerturbedCaption action_replacement(const TaggedCaption &cap, const ReplacementVocab &vocab, const Lexicon &lex,
                                    SplitMix64 &rng) {
    return replace_targets(cap, PerturbationKind::ActReplacement, vocab.verbs, lex, rng,
                           [](const Token &t) { return t.category == Category::Action; });
}

PerturbedCaption syntax_removal(const TaggedCaption &cap) {
    return keep_if(cap, PerturbationKind::SynRemoval, [](const Token &t) { return t.category != Category::Syntax; });
}

PerturbedCaption shuffle(const TaggedCaption &cap, SplitMix64 &rng) {
    auto out = keep_if(cap, PerturbationKind::Shuffle, [](const Token &) { return true; });
    for (std::size_t i = out.tokens.size(); i > 1; --i) {
        std::swap(out.tokens[i - 1], out.tokens[rng.uniform(i)]);
    }
    return out;
}

PerturbedCaption reverse(const TaggedCaption &cap) {
    auto out = start(cap, PerturbationKind::Reverse);
    for (auto it = cap.tokens.rbegin(); it != cap.tokens.rend(); ++it) {
        out.tokens.push_back({it->surface, Provenance::copy(it->index)});
    }
    return out;
}

PerturbedCaption apply_perturbation(PerturbationKind kind, const TaggedCaption &cap, const PerturbContext &ctx,
                                    SplitMix64 &rng) {
    if (!ctx.per_segment || cap.segments.size() < 2) return dispatch(kind, cap, ctx, rng);

    auto out = start(cap, kind);
    std::size_t begin = 0;
    for (std::size_t count : cap.segments) {
        auto part = dispatch(kind, slice(cap, begin, count), ctx, rng);
        for (auto &token : part.tokens) {
            if (token.provenance.origin != Provenance::Origin::Inserted) token.provenance.source += begin;
            out.tokens.push_back(std::move(token));
        }
        begin += count;
    }
    if (begin != cap.tokens.size()) {
        throw DataError("caption '" + cap.caption_id + "': segment lengths do not cover its tokens");
    }
    return out;
}

} // namespace captionprobe
