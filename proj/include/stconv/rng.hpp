#pragma once

// Counter-based random streams built on Philox4x32-10.
//
//   Salmon, Moraes, Dror, Shaw, "Parallel random numbers: as easy as 1, 2, 3",
//   SC 2011.
//
// A stream is addressed by (seed, replica, mode). The seed forms the Philox
// key and (replica, mode) occupy the two high counter words, so distinct
// stream ids draw from disjoint counter spaces. Streams are plain values:
// the same (seed, replica, mode) always reproduces the same sequence, and
// replicas can be simulated in any order or on any thread without sharing
// state.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stconv {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        philox_round(ctr, key);
    }
    return ctr;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministically derive a sub-experiment seed from a manifest seed.
/// Used to keep e.g. different ladder horizons on unrelated streams while
/// everything still flows from the single run seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return detail::splitmix64(base ^ detail::splitmix64(salt + 1));
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint32_t replica, std::uint32_t mode)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_{replica, mode} {}

    std::uint64_t seed() const {
        return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
    }
    std::uint32_t replica() const { return stream_[0]; }
    std::uint32_t mode() const { return stream_[1]; }

    std::uint32_t next_u32() {
        if (buffer_pos_ == 4) refill();
        return buffer_[buffer_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1); safe under log().
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard exponential.
    double exponential() { return -std::log(uniform_open()); }

    /// One standard normal (Box-Muller, cosine branch). Consumes two uniforms.
    double normal() {
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        return r * std::cos(2.0 * std::numbers::pi * uniform01());
    }

    /// Both Box-Muller branches from one uniform pair.
    std::array<double, 2> normal_pair() {
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double phi = 2.0 * std::numbers::pi * uniform01();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    /// Random sign, +1 or -1 with equal probability.
    int rademacher() { return (next_u32() & 1u) ? 1 : -1; }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            stream_[0], stream_[1]};
        buffer_ = detail::philox4x32_10(ctr, key_);
        ++block_;
        buffer_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffer_pos_ = 4;
};

}  // namespace stconv
