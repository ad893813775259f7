#pragma once

// Deterministic per-sample random streams and the elementary samplers used by
// the Monte-Carlo estimators.

#include <cstdint>
#include <initializer_list>
#include <cmath>
#include <random>
#include <utility>

#include "tracekin/vec3.hpp"

namespace tracekin {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Mixes a root seed with any number of stream coordinates (order, sample
/// index, retry, purpose tag, ...). Distinct coordinates give unrelated streams.
inline std::uint64_t streamSeed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = splitmix64(seed);
    for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
    return h;
}

inline Rng makeRng(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
    return Rng{streamSeed(seed, coords)};
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>{0.0, 1.0}(rng); }

inline Vec3 gaussianVec(Rng& rng, double sd) {
    std::normal_distribution<double> n{0.0, sd};
    const double x = n(rng);
    const double y = n(rng);
    const double z = n(rng);
    return {x, y, z};
}

inline Vec3 uniformOnSphere(Rng& rng) {
    while (true) {
        const Vec3 v = gaussianVec(rng, 1.0);
        const double r = norm(v);
        if (r > 1e-12) return v / r;
    }
}

inline Vec3 uniformInBall(Rng& rng, double radius) {
    return uniformOnSphere(rng) * (radius * std::cbrt(uniform01(rng)));
}

/// Unit vectors completing `axis` (unit) to an orthonormal frame.
inline std::pair<Vec3, Vec3> orthonormalComplement(const Vec3& axis) {
    const Vec3 helper = std::abs(axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 u = cross(axis, helper);
    const Vec3 e1 = u / norm(u);
    return {e1, cross(axis, e1)};
}

}  // namespace tracekin
