#include "fixtures.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace captionprobe::testing {

std::filesystem::path data_path(std::string_view relative) {
    return std::filesystem::path(CAPTIONPROBE_TEST_DATA) / relative;
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path &path, std::string_view contents) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

TempDir::TempDir(std::string_view tag) {
    static std::uint64_t counter = 0;
    const auto stamp = fnv1a64(std::to_string(reinterpret_cast<std::uintptr_t>(this)) + std::to_string(++counter),
                               fnv1a64(tag));
    path_ = std::filesystem::temp_directory_path() / ("captionprobe-" + std::string(tag) + "-" + hex64(stamp));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

TaggedCaption caption(std::string_view id, std::string_view annotated, std::string_view video_id) {
    std::vector<std::string> surfaces;
    std::vector<Upos> tags;
    std::istringstream in{std::string(annotated)};
    std::string item;
    while (in >> item) {
        const auto slash = item.rfind('/');
        if (slash == std::string::npos) throw std::invalid_argument("expected word/TAG: " + item);
        surfaces.push_back(item.substr(0, slash));
        tags.push_back(upos_from_string(item.substr(slash + 1)));
    }
    return make_tagged_caption(std::string(id), std::string(video_id.empty() ? id : video_id), surfaces, tags);
}

TaggedCaption example_caption() {
    return caption("example",
                   "a/DET guy/NOUN wearing/VERB a/DET red/ADJ shirt/NOUN drives/VERB a/DET car/NOUN while/SCONJ "
                   "talking/VERB",
                   "video1");
}

namespace {

// A few surfaces per tag; "run" appears under several tags on purpose.
const std::array<std::vector<std::string>, kUposCount> kWords = {{
    /*ADJ*/ {"red", "big", "small", "run"},
    /*ADP*/ {"on", "in", "with"},
    /*ADV*/ {"quickly", "then", "very"},
    /*AUX*/ {"is", "are", "was"},
    /*CCONJ*/ {"and", "or"},
    /*DET*/ {"a", "the", "an"},
    /*INTJ*/ {"oh", "wow"},
    /*NOUN*/ {"dog", "man", "car", "run", "Shirt"},
    /*NUM*/ {"two", "3"},
    /*PART*/ {"to", "not", "'s"},
    /*PRON*/ {"he", "it", "they"},
    /*PROPN*/ {"Paris", "Bob"},
    /*PUNCT*/ {",", ".", "!"},
    /*SCONJ*/ {"while", "because"},
    /*SYM*/ {"$", "%"},
    /*VERB*/ {"runs", "drives", "talking", "run"},
    /*X*/ {"etc", "la"},
}};

} // namespace

TaggedCaption random_caption(SplitMix64 &rng, std::string id, std::size_t max_len) {
    const std::size_t n = rng.uniform(max_len + 1);
    std::vector<std::string> surfaces;
    std::vector<Upos> tags;
    // Bias towards the tags the tasks act on so most captions exercise them.
    constexpr std::array<Upos, 6> kFrequent = {Upos::NOUN, Upos::VERB, Upos::DET, Upos::ADJ, Upos::PROPN, Upos::ADP};
    for (std::size_t i = 0; i < n; ++i) {
        const Upos tag = rng.uniform(2) == 0 ? kFrequent[rng.uniform(kFrequent.size())]
                                              : static_cast<Upos>(rng.uniform(kUposCount));
        const auto &words = kWords[static_cast<std::size_t>(tag)];
        surfaces.push_back(words[rng.uniform(words.size())]);
        tags.push_back(tag);
    }
    const std::string video = "video-" + id;
    return make_tagged_caption(std::move(id), video, surfaces, tags);
}

TemplatedCorpus templated_corpus(std::size_t size, std::size_t verb_twins, std::size_t syntax_twins) {
    static const std::vector<std::string> adjectives = {"red", "tall", "young", "old", "small", "green",
                                                        "happy", "dark", "wet", "loud"};
    static const std::vector<std::string> nouns = {"man",   "woman", "dog",    "cat",   "boy",    "girl",  "car",
                                                   "horse", "chef",  "player", "table", "guitar", "field", "river",
                                                   "road",  "stage", "kitchen", "beach", "ball",  "bike"};
    static const std::vector<std::string> verbs = {"walks", "jumps", "sings", "cooks", "runs", "plays"};
    static const std::vector<std::string> adps = {"on", "near", "under"};
    if (verb_twins % 2 != 0 || syntax_twins % 2 != 0 || verb_twins + syntax_twins > size) {
        throw std::invalid_argument("twin counts must be even and fit the corpus");
    }

    TemplatedCorpus corpus;
    corpus.verb_twins = verb_twins;
    corpus.syntax_twins = syntax_twins;
    // (adjective, subject, object) frames are never reused, so every caption
    // outside a twin pair has a unique content bag.
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> used;
    std::size_t cursor = 0;
    auto next_frame = [&] {
        for (;;) {
            const std::size_t k = cursor++;
            const auto frame = std::make_tuple(k % adjectives.size(), (k * 7 + k / adjectives.size()) % nouns.size(),
                                               (k * 3 + 5 + k / nouns.size()) % nouns.size());
            if (std::get<1>(frame) != std::get<2>(frame) && used.insert(frame).second) return frame;
        }
    };
    auto add = [&](const std::tuple<std::size_t, std::size_t, std::size_t> &frame, std::size_t verb, std::size_t adp) {
        const auto [a, s, o] = frame;
        char id[16], video[16];
        std::snprintf(id, sizeof id, "c%04zu", corpus.captions.size());
        std::snprintf(video, sizeof video, "v%04zu", corpus.captions.size());
        const std::vector<std::string> surfaces = {"a", adjectives[a], nouns[s], verbs[verb], adps[adp], "the", nouns[o]};
        const std::vector<Upos> tags = {Upos::DET, Upos::ADJ, Upos::NOUN, Upos::VERB, Upos::ADP, Upos::DET, Upos::NOUN};
        corpus.captions.push_back(make_tagged_caption(id, video, surfaces, tags));
    };

    std::size_t k = 0;
    for (std::size_t i = 0; i < verb_twins; i += 2, ++k) {
        const auto frame = next_frame();
        add(frame, k % verbs.size(), k % adps.size());
        add(frame, (k + 1) % verbs.size(), k % adps.size());
    }
    for (std::size_t i = 0; i < syntax_twins; i += 2, ++k) {
        const auto frame = next_frame();
        add(frame, k % verbs.size(), k % adps.size());
        add(frame, k % verbs.size(), (k + 1) % adps.size());
    }
    while (corpus.captions.size() < size) {
        add(next_frame(), k % verbs.size(), k % adps.size());
        ++k;
    }
    return corpus;
}

} // namespace captionprobe::testing
