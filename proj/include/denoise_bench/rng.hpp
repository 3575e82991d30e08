#pragma once

// Counter-based random streams.
//
// Every random draw is a pure function of (stream seed, counter), so noise
// realizations do not depend on traversal order or worker count. The
// construction is SplitMix64 evaluated at an arbitrary position:
//
//   bits(stream, i)       = mix64(stream + (i + 1) * 0x9E3779B97F4A7C15)
//   derive_seed(seed, l)  = mix64(seed ^ mix64(fnv1a64(l)))
//
// where mix64 is the SplitMix64 finalizer and fnv1a64 the 64-bit FNV-1a hash
// of the label bytes. Per-image streams use derive_seed(master, image_id);
// mixture noise uses derive_seed(stream, "awgn") and derive_seed(stream, "sp").

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace denoise_bench::rng {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return mix64(seed ^ mix64(fnv1a64(label)));
}

constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) {
    return mix64(stream + (counter + 1) * golden_gamma);
}

/// Uniform in the open interval (0, 1) with 53 random bits.
constexpr double unit_open(std::uint64_t b) { return (double(b >> 11) + 0.5) * 0x1.0p-53; }

/// Standard normal via Box-Muller on counters 2i and 2i+1.
inline double standard_normal(std::uint64_t stream, std::uint64_t index) {
    const double u1 = unit_open(bits(stream, 2 * index));
    const double u2 = unit_open(bits(stream, 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Integer in [0, bound) by multiply-shift. Bias is below bound / 2^64.
constexpr std::uint64_t below(std::uint64_t stream, std::uint64_t counter, std::uint64_t bound) {
    return std::uint64_t((unsigned __int128)bits(stream, counter) * bound >> 64);
}

}  // namespace denoise_bench::rng
