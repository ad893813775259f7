#include "tracekin/scattering.hpp"

#include <stdexcept>

#include "sampling.hpp"
#include "tracekin/series.hpp"

namespace tracekin {

OperatorSum buildScatteringOperator(const ScatteringOperatorSpec& spec) {
    const int n = spec.order;
    const int s = spec.clusterEnvCount;
    if (n < 0 || s < 0) throw std::invalid_argument{"scattering operator order and cluster size must be >= 0"};
    const double leadTime = spec.leading == LeadingTime::Backward ? -spec.t : spec.t;

    OperatorSum sum;
    for (const auto& comp : enumerateCompositions(n)) {
        const int residual = comp.residual(n);
        Chain chain;
        chain.coefficient = factorial(n) * comp.sign() / factorial(residual);

        EnvWeightOp leadWeight;
        for (int i = 1; i <= s + residual; ++i) leadWeight.members.push_back(i);
        chain.ops.emplace_back(CumulantOp{clusterAtoms(LabelSet{s, residual}), leadTime});
        chain.ops.emplace_back(std::move(leadWeight));
        chain.ops.emplace_back(TraceShiftOp{spec.t});

        int next = s + residual + 1;
        for (int m : comp.parts) {
            chain.coefficient /= factorial(m);
            CumulantOp block{{{0}}, -spec.t};
            EnvWeightOp weight;
            for (int i = next; i < next + m; ++i) {
                block.atoms.push_back({i});
                weight.members.push_back(i);
            }
            chain.ops.emplace_back(std::move(block));
            chain.ops.emplace_back(std::move(weight));
            chain.ops.emplace_back(TraceShiftOp{spec.t});
            next += m;
        }
        sum.push_back(std::move(chain));
    }
    return sum;
}

MarginalEstimate TraceFunctionEstimator::estimate(const PhasePoint& x, long samples, std::uint64_t seed) const {
    MarginalEstimate e;
    if (deterministic()) {
        e.add({0, sample(x, seed).value_or(0.0), 0.0});
        return e;
    }
    std::vector<detail::SampleOutcome> outcomes(static_cast<std::size_t>(samples));
    for (long i = 0; i < samples; ++i) {
        const auto v = sample(x, streamSeed(seed, {detail::tag(detail::StreamTag::TraceInner),
                                                   static_cast<std::uint64_t>(i)}));
        outcomes[static_cast<std::size_t>(i)] = v ? detail::SampleOutcome{*v, false} : detail::SampleOutcome{0.0, true};
    }
    e.add(detail::summarizeOutcomes(0, outcomes, e.degenerateDiscards));
    return e;
}

std::optional<double> SeriesTraceFunction::sample(const PhasePoint& x, std::uint64_t seed) const {
    return sampleMarginalSeries(0, t_, SystemState{x, {}}, init_, maxOrder_, seed, params_);
}

std::shared_ptr<TraceFunctionEstimator> freeStreamedTraceFunction(const InitialData& init, double t,
                                                                  const SphereParams& params) {
    const auto trace = init.trace;
    const double mass = params.massTrace;
    return std::make_shared<ClosedFormTraceFunction>(
        [trace, t, mass](const PhasePoint& x) { return trace.freeStreamed(x, t, mass); });
}

OperatorValue applyOperator(const OperatorSum& op, std::span<const PhasePoint> particles, const InitialData& init,
                            const TraceFunctionEstimator& traceF, std::uint64_t innerSeed,
                            const SphereParams& params) {
    const auto ctx = detail::chainContext(init, params);
    bool innerDegenerate = false;
    const auto value = evaluateSum(op, particles, ctx, [&](std::span<const PhasePoint> z) {
        const auto v = traceF.sample(z[0], innerSeed);
        if (!v) {
            innerDegenerate = true;
            return 0.0;
        }
        return *v;
    });
    if (innerDegenerate) return {0.0, true};
    return value;
}

OperatorValue applyScatteringOperator(const ScatteringOperatorSpec& spec, std::span<const PhasePoint> particles,
                                      const InitialData& init, const TraceFunctionEstimator& traceF,
                                      std::uint64_t innerSeed, const SphereParams& params) {
    if (static_cast<int>(particles.size()) != 1 + spec.clusterEnvCount + spec.order)
        throw std::invalid_argument{"applyScatteringOperator: particle count does not match 1 + s + n"};
    return applyOperator(buildScatteringOperator(spec), particles, init, traceF, innerSeed, params);
}

}  // namespace tracekin
