#pragma once

// Hand-rolled generators for property tests.

#include <cstdint>
#include <vector>

#include "tracekin/model.hpp"
#include "tracekin/random.hpp"

namespace tracekin::gen {

inline Rng testRng(std::uint64_t seed) { return makeRng(seed, {0xC0FFEE}); }

/// Allowed state with `env` env spheres packed in a cube of side `side`, so that
/// collisions within unit time are common.
inline SystemState randomAllowedState(Rng& rng, int env, const SphereParams& params, double side = 0.6,
                                      double momentumSd = 1.0) {
    std::uniform_real_distribution<double> u{-0.5 * side, 0.5 * side};
    while (true) {
        SystemState s;
        s.trace = {{u(rng), u(rng), u(rng)}, gaussianVec(rng, momentumSd)};
        for (int i = 0; i < env; ++i) s.env.push_back({{u(rng), u(rng), u(rng)}, gaussianVec(rng, momentumSd)});
        if (isAllowedConfiguration(s, params)) return s;
    }
}

inline Vec3 randomUnit(Rng& rng) { return uniformOnSphere(rng); }

inline double maxCoordinateDifference(const SystemState& a, const SystemState& b) {
    double d = 0.0;
    for (int i = 0; i < a.particleCount(); ++i) {
        const auto& x = a.particle(i);
        const auto& y = b.particle(i);
        for (int k = 0; k < 3; ++k) {
            d = std::max(d, std::abs(x.q[k] - y.q[k]));
            d = std::max(d, std::abs(x.p[k] - y.p[k]));
        }
    }
    return d;
}

}  // namespace tracekin::gen
