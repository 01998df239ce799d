#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace captionprobe {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a over raw bytes. Pass a previous result as `state` to continue hashing.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffsetBasis) noexcept {
    for (char c : bytes) {
        state ^= static_cast<std::uint8_t>(c);
        state *= kFnvPrime;
    }
    return state;
}

// Lowercase, zero-padded, 16 hex digits.
std::string hex64(std::uint64_t value);

// SplitMix64 (Steele, Lea & Flood). Portable and fully specified, so random
// streams are identical on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound). Rejection sampling on the low end keeps the
    // draw unbiased: values below (2^64 - bound) mod bound are redrawn.
    std::uint64_t uniform(std::uint64_t bound);

    std::uint64_t draws() const noexcept { return draws_; }

private:
    std::uint64_t state_;
    std::uint64_t draws_ = 0;
};

// Seed for the stream owned by one (run, caption, task) triple:
// FNV-1a 64 over "<run_seed decimal>|<caption_id>|<task_id>".
std::uint64_t caption_seed(std::uint64_t run_seed, std::string_view caption_id, std::string_view task_id);

inline SplitMix64 caption_rng(std::uint64_t run_seed, std::string_view caption_id, std::string_view task_id) {
    return SplitMix64(caption_seed(run_seed, caption_id, task_id));
}

} // namespace captionprobe
