#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tracekin/estimate.hpp"
#include "tracekin/initial_data.hpp"
#include "tracekin/operators.hpp"
#include "tracekin/parallel.hpp"
#include "tracekin/proposal.hpp"

namespace tracekin::detail {

/// Purpose tags separating the random streams of different estimators.
enum class StreamTag : std::uint64_t {
    SeriesTerm = 1,
    TermNorm,
    Derivative,
    CollisionRhs,
    TraceInner,
    CollisionIntegral,
    Functional,
    Duhamel,
    Oracle,
    Average,
    Configurations,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

struct SampleOutcome {
    double value = 0.0;
    bool discarded = false;
};

/// Calls attempt(retry) until it returns a value, at most limit + 1 times.
template <class Attempt>
SampleOutcome withRetries(int limit, Attempt attempt) {
    for (int retry = 0; retry <= limit; ++retry)
        if (std::optional<double> v = attempt(retry)) return {*v, false};
    return {0.0, true};
}

/// Mean and standard error over the kept samples; adds the discard count.
inline TermEstimate summarizeOutcomes(int order, const std::vector<SampleOutcome>& outcomes, long& discards) {
    std::vector<double> kept;
    kept.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        if (o.discarded)
            ++discards;
        else
            kept.push_back(o.value);
    }
    const auto s = summarize(kept);
    return {order, s.mean, s.stdError};
}

inline void finalizeWarning(MarginalEstimate& e, long totalSamples) {
    e.retryWarning = totalSamples > 0 && static_cast<double>(e.degenerateDiscards) > 0.01 * static_cast<double>(totalSamples);
}

/// Anchor for every particle in `particles` (index 0 = trace, others env).
inline std::vector<AnchorSegment> anchorsFor(std::span<const PhasePoint> particles, const ProposalSettings& settings,
                                             const SphereParams& params) {
    std::vector<AnchorSegment> anchors;
    for (std::size_t i = 0; i < particles.size(); ++i) {
        const double mass = i == 0 ? params.massTrace : params.massEnv;
        anchors.push_back({particles[i].q, particles[i].p / mass, settings.sMin, settings.sMax});
    }
    return anchors;
}

inline double energyOf(std::span<const PhasePoint> particles, const SphereParams& params) {
    double e = 0.0;
    for (std::size_t i = 0; i < particles.size(); ++i)
        e += norm2(particles[i].p) / (2.0 * (i == 0 ? params.massTrace : params.massEnv));
    return e;
}

inline ChainContext chainContext(const InitialData& init, const SphereParams& params) {
    const EnvFamily env = init.env;
    const double sigma = params.sigma;
    return ChainContext{params, [env, sigma](std::span<const PhasePoint> xs) { return env.density(xs, sigma); }, {}};
}

/// Sorts the fixed env particles so that estimates do not depend on their order.
inline std::vector<PhasePoint> canonicalOrder(std::vector<PhasePoint> xs) {
    auto key = [](const PhasePoint& a) { return std::array{a.q.x, a.q.y, a.q.z, a.p.x, a.p.y, a.p.z}; };
    std::sort(xs.begin(), xs.end(), [&](const PhasePoint& a, const PhasePoint& b) { return key(a) < key(b); });
    return xs;
}

}  // namespace tracekin::detail
