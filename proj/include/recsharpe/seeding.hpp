#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace recsharpe {

// Labels for independent random streams derived from one master seed.
enum class StreamPurpose : std::uint64_t {
    permutation = 0x7065726d,
    series = 0x73657269,
    surface = 0x73757266,
    efficiency = 0x65666669,
    rolling = 0x726f6c6c,
    validation = 0x76616c69,
};

// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Child seed for (purpose, index). Distinct pairs give distinct streams; the
// result depends only on its arguments, so parallel and serial runs agree.
constexpr std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                                    std::uint64_t index) noexcept {
    return mix64(mix64(master ^ mix64(static_cast<std::uint64_t>(purpose))) + index);
}

// Counter-based generator: state advances by the golden gamma, output is mix64.
// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound), Lemire's multiply-shift with rejection.
    std::uint64_t bounded(std::uint64_t bound) noexcept {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Fisher-Yates shuffle driven by SplitMix64::bounded.
template <typename T>
void shuffle(std::span<T> values, SplitMix64& rng) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.bounded(i));
        std::swap(values[i - 1], values[j]);
    }
}

} // namespace recsharpe
