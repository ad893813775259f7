#pragma once

// Scattering operators V_{1+n}(t): composition-indexed alternating products of
// cumulants, initial env densities and forward streaming of the trace,
//
//   V_{1+n} = n! sum_{(m_1..m_k)} (-1)^k / (n - |m|)!
//             A_{1+n-|m|}(-t) F0 X S1(t)
//             prod_j [ 1/m_j! A_{1+m_j}(-t) F0_{0+m_j} X S1(t) ].

#include <cstdint>
#include <memory>
#include <optional>

#include "tracekin/estimate.hpp"
#include "tracekin/initial_data.hpp"
#include "tracekin/operators.hpp"

namespace tracekin {

/// Time argument of the leading cumulant of every composition term.
enum class LeadingTime {
    Backward,  ///< A(-t), the default
    Forward,   ///< A(+t)
};

struct ScatteringOperatorSpec {
    int order = 0;            ///< n
    int clusterEnvCount = 0;  ///< s env particles frozen together with the trace
    double t = 0.0;
    LeadingTime leading = LeadingTime::Backward;
};

/// Chains over the particle layout 0 = trace, 1..s cluster env, s+1..s+n free.
/// The leading cumulant keeps the first n - |m| free particles; block j takes
/// the next m_j, so the last block holds the last m_k labels.
OperatorSum buildScatteringOperator(const ScatteringOperatorSpec& spec);

/// Estimator of F_{1+0}(t, x) supplied to the scattering operators.
class TraceFunctionEstimator {
public:
    virtual ~TraceFunctionEstimator() = default;

    /// Unbiased estimate at x from the random stream `seed`; nullopt when the
    /// draw met a degenerate trajectory. Equal seeds give correlated draws at
    /// different points.
    virtual std::optional<double> sample(const PhasePoint& x, std::uint64_t seed) const = 0;
    /// True when sample() ignores the seed.
    virtual bool deterministic() const = 0;

    /// Mean over `samples` inner streams.
    MarginalEstimate estimate(const PhasePoint& x, long samples, std::uint64_t seed) const;
};

class ClosedFormTraceFunction final : public TraceFunctionEstimator {
public:
    explicit ClosedFormTraceFunction(TraceFunction f) : f_(std::move(f)) {}
    std::optional<double> sample(const PhasePoint& x, std::uint64_t) const override { return f_(x); }
    bool deterministic() const override { return true; }

private:
    TraceFunction f_;
};

/// Series for F_{1+0}(t) truncated at maxOrder, one importance draw per order.
class SeriesTraceFunction final : public TraceFunctionEstimator {
public:
    SeriesTraceFunction(double t, InitialData init, int maxOrder, SphereParams params)
        : t_(t), init_(std::move(init)), maxOrder_(maxOrder), params_(params) {}
    std::optional<double> sample(const PhasePoint& x, std::uint64_t seed) const override;
    bool deterministic() const override { return maxOrder_ == 0 || init_.env.vacuum; }

private:
    double t_;
    InitialData init_;
    int maxOrder_;
    SphereParams params_;
};

/// The free-streamed initial trace density F0_{1+0}(q - t p / M, p).
std::shared_ptr<TraceFunctionEstimator> freeStreamedTraceFunction(const InitialData& init, double t,
                                                                  const SphereParams& params);

/// Applies V_{1+n} to traceF at `particles`, drawing traceF from `innerSeed`.
OperatorValue applyScatteringOperator(const ScatteringOperatorSpec& spec, std::span<const PhasePoint> particles,
                                      const InitialData& init, const TraceFunctionEstimator& traceF,
                                      std::uint64_t innerSeed, const SphereParams& params);

/// Same for an already built operator.
OperatorValue applyOperator(const OperatorSum& op, std::span<const PhasePoint> particles, const InitialData& init,
                            const TraceFunctionEstimator& traceF, std::uint64_t innerSeed,
                            const SphereParams& params);

}  // namespace tracekin
