#include "captionprobe/hash.hpp"

#include <stdexcept>

namespace captionprobe {

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::uint64_t SplitMix64::uniform(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform: bound must be positive");
    }
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next();
        ++draws_;
        if (x >= threshold) {
            return x % bound;
        }
    }
}

std::uint64_t caption_seed(std::uint64_t run_seed, std::string_view caption_id, std::string_view task_id) {
    std::uint64_t h = fnv1a64(std::to_string(run_seed));
    h = fnv1a64("|", h);
    h = fnv1a64(caption_id, h);
    h = fnv1a64("|", h);
    return fnv1a64(task_id, h);
}

} // namespace captionprobe
