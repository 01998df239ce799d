#include "captionprobe/textproc.hpp"

#include "captionprobe/error.hpp"
#include "captionprobe/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace captionprobe {

namespace {

using json = nlohmann::json;

constexpr std::string_view kStart = "-START-";
constexpr std::string_view kStart2 = "-START2-";
constexpr std::string_view kEnd = "-END-";
constexpr std::string_view kModelFormat = "captionprobe.tagger";
constexpr int kModelVersion = 1;

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        cols.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return cols;
}

// Feature template: word, lowercased word, 1-3 character suffixes and
// prefixes, previous tag, previous two tags, previous and next word.
std::vector<std::string> extract_features(const std::vector<std::string> &words, const std::vector<std::string> &lowers,
                                          std::size_t i, std::string_view prev, std::string_view prev2) {
    std::vector<std::string> f;
    f.reserve(13);
    const std::string &lower = lowers[i];
    f.emplace_back("bias");
    f.push_back("w " + words[i]);
    f.push_back("lw " + lower);
    for (std::size_t n = 1; n <= 3 && n <= lower.size(); ++n) {
        f.push_back("s" + std::to_string(n) + " " + lower.substr(lower.size() - n));
        f.push_back("p" + std::to_string(n) + " " + lower.substr(0, n));
    }
    f.push_back("t-1 " + std::string(prev));
    f.push_back("t-2 " + std::string(prev2) + " " + std::string(prev));
    f.push_back("w-1 " + (i == 0 ? std::string(kStart) : lowers[i - 1]));
    f.push_back("w+1 " + (i + 1 == words.size() ? std::string(kEnd) : lowers[i + 1]));
    return f;
}

std::string corpus_digest(std::span<const TaggedSentence> corpus) {
    std::uint64_t h = kFnvOffsetBasis;
    for (const auto &sentence : corpus) {
        for (std::size_t i = 0; i < sentence.words.size(); ++i) {
            h = fnv1a64(sentence.words[i], h);
            h = fnv1a64("\t", h);
            h = fnv1a64(upos_name(sentence.tags[i]), h);
            h = fnv1a64("\n", h);
        }
        h = fnv1a64("\n", h);
    }
    return hex64(h);
}

} // namespace

Upos TaggerModel::predict(const std::vector<std::string> &features) const {
    Weights scores{};
    for (const auto &feature : features) {
        const auto it = features_.find(feature);
        if (it == features_.end()) continue;
        for (std::size_t t = 0; t < kUposCount; ++t) scores[t] += it->second[t];
    }
    Upos best = tags_.front();
    double best_score = scores[static_cast<std::size_t>(best)];
    for (Upos tag : tags_) {
        const double s = scores[static_cast<std::size_t>(tag)];
        if (s > best_score) {
            best = tag;
            best_score = s;
        }
    }
    return best;
}

std::vector<Upos> TaggerModel::tag(std::span<const std::string> tokens) const {
    if (empty()) throw DataError("tagger model is untrained");
    std::vector<std::string> words(tokens.begin(), tokens.end());
    std::vector<std::string> lowers;
    lowers.reserve(words.size());
    for (const auto &w : words) lowers.push_back(fold_case(w));

    std::vector<Upos> out;
    out.reserve(words.size());
    std::string prev(kStart), prev2(kStart2);
    for (std::size_t i = 0; i < words.size(); ++i) {
        const Upos guess = predict(extract_features(words, lowers, i, prev, prev2));
        out.push_back(guess);
        prev2 = std::move(prev);
        prev = std::string(upos_name(guess));
    }
    return out;
}

class PerceptronTrainer {
public:
    explicit PerceptronTrainer(TaggerModel &model) : model_(model) {}

    void train_sentence(const TaggedSentence &sentence) {
        std::vector<std::string> lowers;
        lowers.reserve(sentence.words.size());
        for (const auto &w : sentence.words) lowers.push_back(fold_case(w));

        std::string prev(kStart), prev2(kStart2);
        for (std::size_t i = 0; i < sentence.words.size(); ++i) {
            const auto features = extract_features(sentence.words, lowers, i, prev, prev2);
            const Upos guess = model_.predict(features);
            const Upos truth = sentence.tags[i];
            ++instances_;
            if (guess != truth) {
                for (const auto &f : features) {
                    bump(f, truth, 1.0);
                    bump(f, guess, -1.0);
                }
            }
            prev2 = std::move(prev);
            prev = std::string(upos_name(guess));
        }
    }

    void average() {
        for (auto &[feature, weights] : model_.features_) {
            auto &total = totals_[feature];
            auto &stamp = stamps_[feature];
            for (std::size_t t = 0; t < kUposCount; ++t) {
                total[t] += static_cast<double>(instances_ - stamp[t]) * weights[t];
                weights[t] = instances_ > 0 ? total[t] / static_cast<double>(instances_) : 0.0;
            }
        }
        std::erase_if(model_.features_, [](const auto &entry) {
            return std::all_of(entry.second.begin(), entry.second.end(), [](double w) { return w == 0.0; });
        });
    }

private:
    void bump(const std::string &feature, Upos tag, double delta) {
        const auto t = static_cast<std::size_t>(tag);
        auto &weights = model_.features_[feature];
        auto &total = totals_[feature];
        auto &stamp = stamps_[feature];
        total[t] += static_cast<double>(instances_ - stamp[t]) * weights[t];
        stamp[t] = instances_;
        weights[t] += delta;
    }

    TaggerModel &model_;
    std::unordered_map<std::string, TaggerModel::Weights> totals_;
    std::unordered_map<std::string, std::array<std::int64_t, kUposCount>> stamps_;
    std::int64_t instances_ = 0;
};

TaggerModel train_tagger(std::span<const TaggedSentence> corpus, int iterations, std::uint64_t seed) {
    std::size_t token_count = 0;
    std::array<bool, kUposCount> seen{};
    for (const auto &sentence : corpus) {
        if (sentence.words.size() != sentence.tags.size()) throw DataError("training sentence has mismatched tags");
        token_count += sentence.words.size();
        for (Upos tag : sentence.tags) seen[static_cast<std::size_t>(tag)] = true;
    }
    if (token_count == 0) throw DataError("empty training corpus");
    if (iterations < 1) throw UsageError("iterations must be at least 1");

    TaggerModel model;
    for (std::size_t t = 0; t < kUposCount; ++t) {
        if (seen[t]) model.tags_.push_back(static_cast<Upos>(t));
    }
    model.iterations_ = iterations;
    model.seed_ = seed;
    model.corpus_digest_ = corpus_digest(corpus);

    PerceptronTrainer trainer(model);
    SplitMix64 rng(seed);
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < iterations; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform(i)]);
        }
        for (std::size_t idx : order) trainer.train_sentence(corpus[idx]);
    }
    trainer.average();
    return model;
}

double tagging_accuracy(const TaggerModel &model, std::span<const TaggedSentence> gold) {
    std::size_t total = 0, correct = 0;
    for (const auto &sentence : gold) {
        const auto predicted = model.tag(sentence.words);
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            correct += predicted[i] == sentence.tags[i] ? 1 : 0;
        }
        total += predicted.size();
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TaggedCaption tag_caption(const TaggerModel &model, std::string caption_id, std::string video_id,
                          std::string_view text) {
    const auto tokens = tokenize(text);
    const auto tags = tokens.empty() ? std::vector<Upos>{} : model.tag(tokens);
    return make_tagged_caption(std::move(caption_id), std::move(video_id), tokens, tags);
}

std::string TaggerModel::to_json() const {
    json weights = json::object();
    for (const auto &[feature, row] : features_) {
        json entry = json::object();
        for (std::size_t t = 0; t < kUposCount; ++t) {
            if (row[t] != 0.0) entry[std::string(upos_name(static_cast<Upos>(t)))] = row[t];
        }
        weights[feature] = std::move(entry);
    }
    json tags = json::array();
    for (Upos tag : tags_) tags.push_back(std::string(upos_name(tag)));
    json doc = {{"format", kModelFormat}, {"version", kModelVersion}, {"iterations", iterations_},
                {"seed", seed_},          {"corpus_digest", corpus_digest_}, {"tags", std::move(tags)},
                {"weights", std::move(weights)}};
    return doc.dump();
}

TaggerModel TaggerModel::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw DataError(std::string("tagger model is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kModelFormat) throw DataError("not a tagger model file");
        if (doc.at("version").get<int>() != kModelVersion) throw DataError("unsupported tagger model version");
        TaggerModel model;
        model.iterations_ = doc.at("iterations").get<int>();
        model.seed_ = doc.at("seed").get<std::uint64_t>();
        model.corpus_digest_ = doc.at("corpus_digest").get<std::string>();
        for (const auto &tag : doc.at("tags")) model.tags_.push_back(upos_from_string(tag.get<std::string>()));
        std::sort(model.tags_.begin(), model.tags_.end());
        for (const auto &[feature, entry] : doc.at("weights").items()) {
            Weights row{};
            for (const auto &[tag, w] : entry.items()) row[static_cast<std::size_t>(upos_from_string(tag))] = w.get<double>();
            model.features_.emplace(feature, row);
        }
        if (model.tags_.empty()) throw DataError("tagger model has an empty tag inventory");
        return model;
    } catch (const json::exception &e) {
        throw DataError(std::string("malformed tagger model: ") + e.what());
    }
}

void TaggerModel::save(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write tagger model " + path.string());
    out << to_json() << '\n';
    if (!out) throw IoError("failed writing tagger model " + path.string());
}

TaggerModel TaggerModel::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open tagger model " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::vector<TaggedSentence> parse_treebank(std::istream &in) {
    std::vector<TaggedSentence> out;
    TaggedSentence current;
    std::string raw;
    std::size_t line_no = 0;
    auto flush = [&]() {
        if (!current.words.empty()) out.push_back(std::move(current));
        current = {};
    };
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.find_first_not_of(" \t") == std::string::npos) {
            flush();
            continue;
        }
        if (raw.front() == '#') continue;
        const auto cols = split_tabs(raw);
        std::string word, tag;
        if (cols.size() == 10) {
            if (cols[0].find_first_of("-.") != std::string::npos) continue;
            word = cols[1];
            tag = cols[3];
        } else if (cols.size() == 2) {
            word = cols[0];
            tag = cols[1];
        } else {
            throw DataError("treebank line " + std::to_string(line_no) + ": expected 2 or 10 tab-separated columns");
        }
        const auto upos = parse_upos(tag);
        if (word.empty() || !upos) {
            throw DataError("treebank line " + std::to_string(line_no) + ": bad token or UPOS tag '" + tag + "'");
        }
        current.words.push_back(std::move(word));
        current.tags.push_back(*upos);
    }
    flush();
    return out;
}

std::vector<TaggedSentence> read_treebank(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open treebank " + path.string());
    return parse_treebank(in);
}

} // namespace captionprobe
