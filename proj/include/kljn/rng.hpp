#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kljn {

/// Engine used for every random stream in the simulator.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based seed split: the child seed for `path` under `parent`.
///
/// derive_seed(s, {a, b}) == derive_seed(derive_seed(s, {a}), {b}), so any
/// substream can be reconstructed from its coordinates alone, independent of
/// which thread or in which order it is requested.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = parent;
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Stream tags used in derive_seed paths.
enum class Stream : std::uint64_t {
    Database = 1,
    Repeat = 2,
    Run = 3,
    AliceNoise = 4,
    BobNoise = 5,
    TieBreak = 6,
    SteadyAlice = 7,
    SteadyBob = 8,
    Pairing = 9,
};

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

}  // namespace kljn
