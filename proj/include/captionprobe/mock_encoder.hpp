#pragma once

#include "captionprobe/retrieval.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace captionprobe {

inline constexpr std::size_t kMockDim = 256;

// Deterministic bag-of-words encoder. Each token of tokenize(text) hashes with
// FNV-1a 64 over its lowercased form; the hash mod 256 picks the coordinate and
// bit 63 picks the sign (set = -1). Counts accumulate in double, the vector is
// L2-normalized in double and narrowed to float. Empty input yields zeros.
std::vector<float> mock_encode(std::string_view text);

EmbeddingMatrix mock_encode_all(std::span<const std::string> ids, std::span<const std::string> texts);

} // namespace captionprobe
