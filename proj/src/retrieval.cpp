#include "captionprobe/retrieval.hpp"

#include "captionprobe/csv.hpp"
#include "captionprobe/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace captionprobe {

namespace {

constexpr char kMagic[4] = {'C', 'E', 'V', 'B'};
constexpr std::uint32_t kCevbVersion = 1;
constexpr std::uint8_t kDtypeF32 = 0;
constexpr std::size_t kHeaderSize = 4 + 4 + 8 + 4 + 1;

template <typename T>
void put_le(std::string &out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out += static_cast<char>(static_cast<std::uint8_t>(value >> (8 * i)));
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T le() {
        need(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return value;
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw DataError("CEVB: truncated file");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::string join_ids(const std::vector<std::string> &ids, std::size_t limit = 20) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
    return out;
}

std::map<std::string_view, std::size_t> index_of(const std::vector<std::string> &ids) {
    std::map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
    return index;
}

std::size_t rank_in_row(std::span<const float> row, const std::vector<bool> &is_truth) {
    float best = -std::numeric_limits<float>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (is_truth[c] && (!any || row[c] > best)) {
            best = row[c];
            any = true;
        }
    }
    if (!any) throw DataError("query has no ground-truth candidate");
    std::size_t ahead = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c] > best || (!is_truth[c] && row[c] == best)) ++ahead;
    }
    return ahead + 1;
}

std::vector<std::size_t> ranks_for(const SimilarityMatrix &sim, const GroundTruth &gt) {
    const auto query_index = index_of(sim.query_ids);
    const auto candidate_index = index_of(sim.candidate_ids);
    std::vector<std::string> missing;
    for (const auto &[query, truths] : gt) {
        if (!query_index.contains(query)) missing.push_back(query);
        for (const auto &t : truths) {
            if (!candidate_index.contains(t)) missing.push_back(t);
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        throw DataError("ids missing from similarity/embeddings: " + join_ids(missing));
    }
    std::vector<std::size_t> ranks;
    ranks.reserve(gt.size());
    std::vector<bool> is_truth(sim.candidate_ids.size());
    for (const auto &[query, truths] : gt) {
        std::fill(is_truth.begin(), is_truth.end(), false);
        if (truths.empty()) throw DataError("query '" + query + "' has no ground truth");
        for (const auto &t : truths) is_truth[candidate_index.at(t)] = true;
        ranks.push_back(rank_in_row(sim.row(query_index.at(query)), is_truth));
    }
    return ranks;
}

float parse_score(const std::string &cell, std::size_t row) {
    const char *begin = cell.data();
    const char *end = begin + cell.size();
    while (begin < end && *begin == ' ') ++begin;
    while (end > begin && end[-1] == ' ') --end;
    float value = 0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw DataError("similarity CSV row " + std::to_string(row) + ": bad score '" + cell + "'");
    }
    return value;
}

} // namespace

void EmbeddingMatrix::validate() const {
    if (dim == 0) throw DataError("embedding dim must be positive");
    if (values.size() != ids.size() * dim) throw DataError("embedding values do not match ids x dim");
    std::set<std::string_view> seen;
    for (const auto &id : ids) {
        if (!seen.insert(id).second) throw DataError("duplicate embedding id '" + id + "'");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DataError("non-finite embedding value for id '" + ids[i / dim] + "'");
        }
    }
}

std::string encode_cevb(const EmbeddingMatrix &m) {
    m.validate();
    std::string out(kMagic, 4);
    put_le<std::uint32_t>(out, kCevbVersion);
    put_le<std::uint64_t>(out, m.ids.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim));
    put_le<std::uint8_t>(out, kDtypeF32);
    for (const auto &id : m.ids) {
        if (id.size() > 0xffff) throw DataError("embedding id longer than 65535 bytes");
        put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out += id;
    }
    for (float v : m.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

EmbeddingMatrix decode_cevb(std::string_view bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("CEVB: bad magic");
    Reader r(bytes.substr(4));
    const auto version = r.le<std::uint32_t>();
    if (version != kCevbVersion) throw DataError("CEVB: unsupported version " + std::to_string(version));
    const auto n = r.le<std::uint64_t>();
    const auto dim = r.le<std::uint32_t>();
    const auto dtype = r.le<std::uint8_t>();
    if (dtype != kDtypeF32) throw DataError("CEVB: unsupported dtype " + std::to_string(dtype));
    if (dim == 0) throw DataError("CEVB: zero dim");
    // Each row needs at least 2 id bytes plus 4*dim value bytes.
    if (n > r.remaining() / (2 + 4ULL * dim)) throw DataError("CEVB: truncated file");

    EmbeddingMatrix m;
    m.dim = dim;
    m.ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto len = r.le<std::uint16_t>();
        m.ids.emplace_back(r.take(len));
    }
    if (r.remaining() != n * dim * 4) {
        throw DataError(r.remaining() < n * dim * 4 ? "CEVB: truncated file" : "CEVB: trailing bytes");
    }
    m.values.resize(n * dim);
    for (auto &v : m.values) v = std::bit_cast<float>(r.le<std::uint32_t>());
    m.validate();
    return m;
}

void write_cevb(const EmbeddingMatrix &m, const std::filesystem::path &path) {
    const auto bytes = encode_cevb(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

EmbeddingMatrix load_embeddings(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return decode_cevb(buffer.str());
    } catch (const DataError &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

SimilarityMatrix SimilarityMatrix::transposed() const {
    SimilarityMatrix t{candidate_ids, query_ids, std::vector<float>(scores.size())};
    const std::size_t rows = query_ids.size(), cols = candidate_ids.size();
    for (std::size_t q = 0; q < rows; ++q) {
        for (std::size_t c = 0; c < cols; ++c) t.scores[c * rows + q] = scores[q * cols + c];
    }
    return t;
}

void SimilarityMatrix::validate() const {
    if (scores.size() != query_ids.size() * candidate_ids.size()) throw DataError("similarity shape mismatch");
    for (float s : scores) {
        if (!std::isfinite(s)) throw DataError("non-finite similarity score");
    }
}

SimilarityMatrix cosine_similarity(const EmbeddingMatrix &queries, const EmbeddingMatrix &candidates) {
    if (queries.dim != candidates.dim) {
        throw DataError("embedding dim mismatch: " + std::to_string(queries.dim) + " vs " +
                        std::to_string(candidates.dim));
    }
    const std::size_t dim = queries.dim;
    auto norms = [dim](const EmbeddingMatrix &m) {
        std::vector<double> out(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double s = 0;
            for (float v : m.row(i)) s += static_cast<double>(v) * v;
            out[i] = std::sqrt(s);
        }
        return out;
    };
    const auto qn = norms(queries);
    const auto cn = norms(candidates);
    SimilarityMatrix sim{queries.ids, candidates.ids, std::vector<float>(queries.rows() * candidates.rows())};
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        const auto q = queries.row(i);
        for (std::size_t j = 0; j < candidates.rows(); ++j) {
            if (qn[i] == 0.0 || cn[j] == 0.0) continue;
            const auto c = candidates.row(j);
            double dot = 0;
            for (std::size_t d = 0; d < dim; ++d) dot += static_cast<double>(q[d]) * c[d];
            sim.scores[i * candidates.rows() + j] = static_cast<float>(dot / (qn[i] * cn[j]));
        }
    }
    return sim;
}

SimilarityMatrix parse_similarity_csv(std::istream &in) {
    const auto rows = csv::read_all(in);
    if (rows.size() < 2) throw DataError("similarity CSV needs a header and at least one row");
    const std::size_t width = rows[1].size();
    if (width < 2) throw DataError("similarity CSV rows need a query id and scores");
    SimilarityMatrix sim;
    const auto &header = rows.front();
    if (header.size() == width) {
        sim.candidate_ids.assign(header.begin() + 1, header.end());
    } else if (header.size() == width - 1) {
        sim.candidate_ids = header;
    } else {
        throw DataError("similarity CSV header has " + std::to_string(header.size()) + " cells for " +
                        std::to_string(width - 1) + " score columns");
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != width) throw DataError("similarity CSV row " + std::to_string(r + 1) + ": wrong width");
        sim.query_ids.push_back(rows[r][0]);
        for (std::size_t c = 1; c < width; ++c) sim.scores.push_back(parse_score(rows[r][c], r + 1));
    }
    for (const auto *ids : {&sim.query_ids, &sim.candidate_ids}) {
        std::set<std::string_view> seen;
        for (const auto &id : *ids) {
            if (!seen.insert(id).second) throw DataError("similarity CSV: duplicate id '" + id + "'");
        }
    }
    return sim;
}

SimilarityMatrix load_similarity_csv(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return parse_similarity_csv(in);
    } catch (const DataError &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string similarity_csv(const SimilarityMatrix &sim) {
    std::vector<std::string> header{""};
    header.insert(header.end(), sim.candidate_ids.begin(), sim.candidate_ids.end());
    std::string out = csv::format_row(header) + "\n";
    for (std::size_t q = 0; q < sim.query_ids.size(); ++q) {
        std::vector<std::string> row{sim.query_ids[q]};
        for (float s : sim.row(q)) {
            char buf[32];
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, s);
            row.emplace_back(buf, ptr);
        }
        out += csv::format_row(row) + "\n";
    }
    return out;
}

GroundTruth invert(const GroundTruth &gt) {
    GroundTruth out;
    for (const auto &[query, truths] : gt) {
        for (const auto &t : truths) out[t].insert(query);
    }
    return out;
}

std::size_t rank_of_truth(const SimilarityMatrix &sim, const GroundTruth &gt, std::string_view query) {
    const auto it = gt.find(std::string(query));
    if (it == gt.end()) throw DataError("query '" + std::string(query) + "' has no ground truth");
    const auto q = std::find(sim.query_ids.begin(), sim.query_ids.end(), query);
    if (q == sim.query_ids.end()) throw DataError("query '" + std::string(query) + "' is not in the similarity matrix");
    std::vector<bool> is_truth(sim.candidate_ids.size());
    for (std::size_t c = 0; c < sim.candidate_ids.size(); ++c) is_truth[c] = it->second.contains(sim.candidate_ids[c]);
    return rank_in_row(sim.row(static_cast<std::size_t>(q - sim.query_ids.begin())), is_truth);
}

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
    if (ranks.empty()) throw DataError("no ranks");
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
    return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double median_rank(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw DataError("no ranks");
    std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
    std::sort(sorted.begin(), sorted.end());
    return static_cast<double>(sorted[(sorted.size() - 1) / 2]);
}

double mean_rank(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw DataError("no ranks");
    const double sum = std::accumulate(ranks.begin(), ranks.end(), 0.0,
                                       [](double acc, std::size_t r) { return acc + static_cast<double>(r); });
    return sum / static_cast<double>(ranks.size());
}

std::string_view direction_name(Direction d) noexcept { return d == Direction::TextToVideo ? "t2v" : "v2t"; }

Direction parse_direction(std::string_view name) {
    if (name == "t2v") return Direction::TextToVideo;
    if (name == "v2t") return Direction::VideoToText;
    throw UsageError("unknown direction '" + std::string(name) + "'");
}

MetricsReport metrics_from_ranks(std::string task_id, Direction direction, std::span<const std::size_t> ranks) {
    MetricsReport report;
    report.task_id = std::move(task_id);
    report.direction = direction;
    report.r1 = recall_at_k(ranks, 1);
    report.r5 = recall_at_k(ranks, 5);
    report.r10 = recall_at_k(ranks, 10);
    report.median_rank = median_rank(ranks);
    report.mean_rank = mean_rank(ranks);
    report.queries = ranks.size();
    return report;
}

MetricsReport evaluate_similarity(const SimilarityMatrix &text_video, const GroundTruth &caption_to_video,
                                  Direction direction, std::string task_id) {
    text_video.validate();
    if (caption_to_video.empty()) throw DataError("empty ground truth");
    const auto ranks = direction == Direction::TextToVideo ? ranks_for(text_video, caption_to_video)
                                                           : ranks_for(text_video.transposed(), invert(caption_to_video));
    return metrics_from_ranks(std::move(task_id), direction, ranks);
}

MetricsReport evaluate_run(const EmbeddingMatrix &texts, const EmbeddingMatrix &videos,
                           const GroundTruth &caption_to_video, Direction direction, std::string task_id) {
    const auto text_index = index_of(texts.ids);
    const auto video_index = index_of(videos.ids);
    std::vector<std::string> missing;
    for (const auto &[caption, truth] : caption_to_video) {
        if (!text_index.contains(caption)) missing.push_back(caption);
        for (const auto &v : truth) {
            if (!video_index.contains(v)) missing.push_back(v);
        }
    }
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        throw DataError("ids missing from embeddings: " + join_ids(missing));
    }
    // Only captions in the truth take part; extra text rows are ignored.
    EmbeddingMatrix queries;
    queries.dim = texts.dim;
    for (const auto &[caption, truth] : caption_to_video) {
        const auto row = texts.row(text_index.at(caption));
        queries.ids.push_back(caption);
        queries.values.insert(queries.values.end(), row.begin(), row.end());
    }
    return evaluate_similarity(cosine_similarity(queries, videos), caption_to_video, direction, std::move(task_id));
}

} // namespace captionprobe
