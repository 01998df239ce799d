#pragma once

#include "captionprobe/perturb.hpp"
#include "captionprobe/retrieval.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

// Reference implementations written independently of the library code: they
// favour obviousness over speed and are what the tests compare against.
namespace captionprobe::testing {

// Sorts every candidate by descending score, placing non-truth candidates
// ahead of truth candidates on equal scores, and returns the 1-based position
// of the first truth.
std::size_t oracle_rank(std::span<const float> scores, const std::vector<bool> &is_truth);

struct OracleMetrics {
    double r1 = 0, r5 = 0, r10 = 0, median = 0, mean = 0;
};
OracleMetrics oracle_metrics(std::vector<std::size_t> ranks);

std::vector<std::string> surfaces(const TaggedCaption &cap);
std::vector<std::string> surfaces(const PerturbedCaption &out);
std::vector<std::string> sorted(std::vector<std::string> items);

// True when the output tokens are copies of strictly increasing source indices
// whose surfaces match the source.
bool is_ordered_subsequence(const PerturbedCaption &out, const TaggedCaption &cap);

} // namespace captionprobe::testing
