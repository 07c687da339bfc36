#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pdisorder {

// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on 128-bit counters.
inline auto philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
    -> std::array<std::uint32_t, 4> {
    constexpr std::uint32_t M0 = 0xD2511F53U, M1 = 0xCD9E8D57U;
    constexpr std::uint32_t W0 = 0x9E3779B9U, W1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline auto splitmix64(std::uint64_t x) -> std::uint64_t {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream number `stream` of a run seeded with `seed`. Draw i of the stream
// is a pure function of (seed, stream, i), so paths are reproducible no
// matter which thread runs them.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t k = splitmix64(seed);
        key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
        stream_ = stream;
    }

    // Uniform on (0, 1], 53 bits.
    auto uniform() -> double {
        std::uint64_t bits = next64() >> 11;
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    auto exponential(double rate) -> double { return -std::log(uniform()) / rate; }

private:
    auto next64() -> std::uint64_t {
        if (pos_ == 2) {
            block_ = philox4x32({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                key_);
            ++counter_;
            pos_ = 0;
        }
        auto lo = static_cast<std::uint64_t>(block_[2 * pos_]);
        auto hi = static_cast<std::uint64_t>(block_[2 * pos_ + 1]);
        ++pos_;
        return (hi << 32) | lo;
    }

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 2;
};

}  // namespace pdisorder
