#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rbissim {

/// SplitMix64 finalizer. Used for seeding and stream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes.
constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Seed of the stream named `key` under `master_seed`.
///
/// Streams are keyed by name ("sta3/rxjitter", "ap1/access", ...) rather than
/// by creation order, so adding a node to a scenario leaves the draws of every
/// other node untouched.
constexpr std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view key)
{
    return splitmix64(master_seed ^ splitmix64(fnv1a64(key)));
}

/// xoshiro256** generator with explicit, copyable state.
///
/// All distribution mappings are implemented here instead of using
/// <random> distributions, whose output is implementation-defined.
class RngState {
public:
    explicit RngState(std::uint64_t seed = 0);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform01();

    /// Uniform integer in [lo, hi] (inclusive); requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal variate (Box-Muller, one value per call).
    double standard_normal();

    /// True with probability p; p <= 0 never, p >= 1 always.
    bool bernoulli(double p);

    bool operator==(const RngState&) const = default;

private:
    std::array<std::uint64_t, 4> s_{};
};

} // namespace rbissim
