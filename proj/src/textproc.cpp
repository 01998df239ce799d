#include "captionprobe/textproc.hpp"

#include "captionprobe/error.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace captionprobe {

namespace {

constexpr std::array<std::string_view, kUposCount> kUposNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '\'' || c >= 0x80;
}

bool is_separator_byte(unsigned char c) { return c <= 0x20 || c == 0x7f; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Parses "# key = value" comment lines; returns false for other comments.
bool parse_comment(std::string_view line, std::string_view &key, std::string_view &value) {
    line.remove_prefix(1);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) return false;
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    return true;
}

[[noreturn]] void sidecar_error(std::size_t line_no, const std::string &what) {
    throw DataError("tag sidecar line " + std::to_string(line_no) + ": " + what);
}

} // namespace

std::string_view upos_name(Upos tag) noexcept { return kUposNames[static_cast<std::size_t>(tag)]; }

std::optional<Upos> parse_upos(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kUposNames.size(); ++i) {
        if (kUposNames[i] == name) return static_cast<Upos>(i);
    }
    return std::nullopt;
}

Upos upos_from_string(std::string_view name) {
    if (auto tag = parse_upos(name)) return *tag;
    throw DataError("unknown UPOS tag '" + std::string(name) + "'");
}

std::string_view category_name(Category category) noexcept {
    switch (category) {
    case Category::ObjectAttribute:
        return "object_attribute";
    case Category::Action:
        return "action";
    case Category::Syntax:
        return "syntax";
    }
    return "syntax";
}

Category categorize(std::string_view tag_name) { return categorize(upos_from_string(tag_name)); }

std::string TaggedCaption::text() const {
    std::string out;
    for (const auto &token : tokens) {
        if (!out.empty()) out += ' ';
        out += token.surface;
    }
    return out;
}

std::string fold_case(std::string_view text) {
    std::string out(text);
    for (char &c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_separator_byte(c)) {
            ++i;
        } else if (is_word_byte(c)) {
            const std::size_t start = i;
            while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
            tokens.emplace_back(text.substr(start, i - start));
        } else {
            tokens.emplace_back(1, text[i]);
            ++i;
        }
    }
    return tokens;
}

std::string join_tokens(std::span<const std::string> surfaces) {
    std::string out;
    for (const auto &s : surfaces) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

std::string normalize(std::string_view text) {
    const auto tokens = tokenize(text);
    return join_tokens(tokens);
}

TaggedCaption make_tagged_caption(std::string caption_id, std::string video_id,
                                  std::span<const std::string> surfaces, std::span<const Upos> tags) {
    if (surfaces.size() != tags.size()) {
        throw DataError("caption '" + caption_id + "': " + std::to_string(surfaces.size()) + " tokens but " +
                        std::to_string(tags.size()) + " tags");
    }
    TaggedCaption caption{std::move(caption_id), std::move(video_id), {}, {}};
    caption.tokens.reserve(surfaces.size());
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        caption.tokens.push_back(Token{surfaces[i], fold_case(surfaces[i]), tags[i], categorize(tags[i]), i});
    }
    return caption;
}

std::vector<TaggedCaption> parse_tag_sidecar(std::istream &in) {
    struct Pending {
        std::string id;
        std::string video_id;
        std::optional<std::string> text;
        std::vector<std::string> surfaces;
        std::vector<Upos> tags;
        std::size_t opened_at = 0;
    };

    std::vector<TaggedCaption> out;
    std::set<std::string> seen;
    std::optional<Pending> pending;

    auto flush = [&]() {
        if (!pending) return;
        if (pending->surfaces.empty()) {
            sidecar_error(pending->opened_at, "caption '" + pending->id + "' has no tokens");
        }
        if (pending->text) {
            const auto expected = tokenize(*pending->text).size();
            if (expected != pending->surfaces.size()) {
                throw DataError("tag sidecar: caption '" + pending->id + "' has " +
                                std::to_string(pending->surfaces.size()) + " tags but its text has " +
                                std::to_string(expected) + " tokens");
            }
        }
        out.push_back(make_tagged_caption(pending->id, pending->video_id, pending->surfaces, pending->tags));
        pending.reset();
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) {
            flush();
            continue;
        }
        if (line.front() == '#') {
            std::string_view key, value;
            if (!parse_comment(line, key, value)) continue;
            if (key == "id") {
                if (pending && !pending->surfaces.empty()) sidecar_error(line_no, "missing blank line before '# id'");
                flush();
                if (value.empty()) sidecar_error(line_no, "empty caption id");
                if (!seen.insert(std::string(value)).second) {
                    sidecar_error(line_no, "duplicate caption id '" + std::string(value) + "'");
                }
                pending = Pending{std::string(value), {}, std::nullopt, {}, {}, line_no};
            } else if (key == "text") {
                if (!pending) sidecar_error(line_no, "'# text' before '# id'");
                pending->text = std::string(value);
            } else if (key == "video_id") {
                if (!pending) sidecar_error(line_no, "'# video_id' before '# id'");
                pending->video_id = std::string(value);
            }
            continue;
        }
        if (!pending) sidecar_error(line_no, "token line outside a caption");
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            sidecar_error(line_no, "expected 'surface<TAB>UPOS'");
        }
        const auto surface = line.substr(0, tab);
        const auto tag = parse_upos(line.substr(tab + 1));
        if (surface.empty()) sidecar_error(line_no, "empty surface");
        if (!tag) sidecar_error(line_no, "unknown UPOS tag '" + std::string(line.substr(tab + 1)) + "'");
        pending->surfaces.emplace_back(surface);
        pending->tags.push_back(*tag);
    }
    flush();
    return out;
}

std::vector<TaggedCaption> load_external_tags(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tag sidecar " + path.string());
    return parse_tag_sidecar(in);
}

void write_tag_sidecar(std::ostream &out, std::span<const TaggedCaption> captions) {
    bool first = true;
    for (const auto &caption : captions) {
        if (!first) out << '\n';
        first = false;
        out << "# id = " << caption.caption_id << '\n';
        if (!caption.video_id.empty()) out << "# video_id = " << caption.video_id << '\n';
        for (const auto &token : caption.tokens) {
            out << token.surface << '\t' << upos_name(token.pos) << '\n';
        }
    }
}

} // namespace captionprobe
