#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace syncslam {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for a (seed, tag...) tuple. Streams only depend on the tags,
/// never on the order in which they are requested.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(splitmix64(h)),
                      static_cast<std::uint32_t>(splitmix64(h) >> 32)};
    return Rng(seq);
}

// Stream purposes.
enum class StreamTag : std::uint64_t {
    kTrajectory = 1,
    kMeasurement = 2,
    kEngineInit = 3,
    kEnginePredict = 4,
    kEngineMt = 5,
    kEnginePva = 6,
    kEngineBirth = 7,
    kEngineBias = 8,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

inline double gaussian(Rng& rng, double sigma) {
    if (sigma == 0.0) return 0.0;
    std::normal_distribution<double> n(0.0, sigma);
    return n(rng);
}

inline double uniform(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return lo + u(rng) * (hi - lo);
}

}  // namespace syncslam
