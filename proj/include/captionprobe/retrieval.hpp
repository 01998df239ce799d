#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace captionprobe {

struct EmbeddingMatrix {
    std::vector<std::string> ids;
    std::size_t dim = 0;
    std::vector<float> values; // row-major, ids.size() x dim

    std::size_t rows() const noexcept { return ids.size(); }
    std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
    // Throws DataError if shapes disagree, ids repeat or a value is not finite.
    void validate() const;
};

// CEVB v1, little-endian: "CEVB", u32 version, u64 n, u32 dim, u8 dtype (0 =
// f32), n x (u16 length + UTF-8 id), n*dim f32 row-major.
std::string encode_cevb(const EmbeddingMatrix &m);
EmbeddingMatrix decode_cevb(std::string_view bytes);
void write_cevb(const EmbeddingMatrix &m, const std::filesystem::path &path);
EmbeddingMatrix load_embeddings(const std::filesystem::path &path);

struct SimilarityMatrix {
    std::vector<std::string> query_ids;     // rows
    std::vector<std::string> candidate_ids; // columns
    std::vector<float> scores;              // row-major

    float at(std::size_t q, std::size_t c) const { return scores[q * candidate_ids.size() + c]; }
    std::span<const float> row(std::size_t q) const {
        return {scores.data() + q * candidate_ids.size(), candidate_ids.size()};
    }
    SimilarityMatrix transposed() const;
    void validate() const;
};

// score(i, j) = <q_i, c_j> / (|q_i| |c_j|), accumulated in double. Rows with
// zero norm score 0 against everything.
SimilarityMatrix cosine_similarity(const EmbeddingMatrix &queries, const EmbeddingMatrix &candidates);

// Header: optional leading label cell, then candidate ids. Rows: query id then
// one score per candidate.
SimilarityMatrix parse_similarity_csv(std::istream &in);
SimilarityMatrix load_similarity_csv(const std::filesystem::path &path);
std::string similarity_csv(const SimilarityMatrix &sim);

// query id -> ids of correct candidates.
using GroundTruth = std::map<std::string, std::set<std::string>>;

// caption -> {video} becomes video -> {captions}.
GroundTruth invert(const GroundTruth &gt);

// 1-based rank of the best-scoring truth. Candidates scoring strictly higher,
// and non-truth candidates tying with it, rank ahead of it.
std::size_t rank_of_truth(const SimilarityMatrix &sim, const GroundTruth &gt, std::string_view query);

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);
// Lower median for even counts.
double median_rank(std::span<const std::size_t> ranks);
double mean_rank(std::span<const std::size_t> ranks);

enum class Direction : std::uint8_t { TextToVideo, VideoToText };

std::string_view direction_name(Direction d) noexcept; // "t2v" / "v2t"
Direction parse_direction(std::string_view name);

struct MetricsReport {
    std::string task_id;
    Direction direction = Direction::TextToVideo;
    double r1 = 0, r5 = 0, r10 = 0; // percentages
    double median_rank = 0;
    double mean_rank = 0;
    std::size_t queries = 0;
};

MetricsReport metrics_from_ranks(std::string task_id, Direction direction, std::span<const std::size_t> ranks);

// `caption_to_video` holds the text-to-video truth. For v2t the sim is
// transposed and the truth inverted; each video ranks by its best caption.
MetricsReport evaluate_similarity(const SimilarityMatrix &text_video, const GroundTruth &caption_to_video,
                                  Direction direction, std::string task_id);

// Throws DataError listing ids in the truth that have no embedding row.
MetricsReport evaluate_run(const EmbeddingMatrix &texts, const EmbeddingMatrix &videos,
                           const GroundTruth &caption_to_video, Direction direction, std::string task_id);

} // namespace captionprobe
