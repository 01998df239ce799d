#include "captionprobe/mock_encoder.hpp"

#include "captionprobe/error.hpp"
#include "captionprobe/hash.hpp"
#include "captionprobe/textproc.hpp"

#include <array>
#include <cmath>

namespace captionprobe {

std::vector<float> mock_encode(std::string_view text) {
    std::array<double, kMockDim> acc{};
    for (const auto &token : tokenize(text)) {
        const std::uint64_t h = fnv1a64(fold_case(token));
        acc[h % kMockDim] += (h >> 63) ? -1.0 : 1.0;
    }
    double sq = 0;
    for (double v : acc) sq += v * v;
    std::vector<float> out(kMockDim, 0.0f);
    if (sq == 0.0) return out;
    const double norm = std::sqrt(sq);
    for (std::size_t i = 0; i < kMockDim; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

EmbeddingMatrix mock_encode_all(std::span<const std::string> ids, std::span<const std::string> texts) {
    if (ids.size() != texts.size()) throw DataError("mock_encode_all: ids and texts differ in length");
    EmbeddingMatrix m;
    m.dim = kMockDim;
    m.ids.assign(ids.begin(), ids.end());
    m.values.reserve(ids.size() * kMockDim);
    for (const auto &text : texts) {
        const auto row = mock_encode(text);
        m.values.insert(m.values.end(), row.begin(), row.end());
    }
    return m;
}

} // namespace captionprobe
