#include "tracekin/series.hpp"

#include <cmath>
#include <stdexcept>

#include "sampling.hpp"
#include "tracekin/contact.hpp"
#include "tracekin/proposal.hpp"

namespace tracekin {

using detail::StreamTag;
using detail::tag;

Chain seriesTermChain(int s, int n, double t) {
    const LabelSet labels{s, n};
    EnvWeightOp weight;
    for (int i = 1; i <= s + n; ++i) weight.members.push_back(i);
    return Chain{1.0 / factorial(n), {CumulantOp{clusterAtoms(labels), -t}, std::move(weight)}};
}

OperatorValue seriesIntegrand(int s, int n, double t, std::span<const PhasePoint> particles,
                              const InitialData& init, const SphereParams& params) {
    if (static_cast<int>(particles.size()) != 1 + s + n)
        throw std::invalid_argument{"seriesIntegrand: particle count does not match 1 + s + n"};
    const auto ctx = detail::chainContext(init, params);
    const auto& trace = init.trace;
    return evaluateChain(seriesTermChain(s, n, t), particles, ctx,
                         [&trace](std::span<const PhasePoint> z) { return trace(z[0]); });
}

namespace {

std::vector<PhasePoint> fixedParticles(const SystemState& args) {
    std::vector<PhasePoint> fixed{args.trace};
    const auto env = detail::canonicalOrder(args.env);
    fixed.insert(fixed.end(), env.begin(), env.end());
    return fixed;
}

std::optional<double> drawTerm(int s, int n, double t, const std::vector<PhasePoint>& fixed,
                               const ClusterProposal& proposal, Rng& rng, const InitialData& init,
                               const SphereParams& params) {
    auto draw = proposal.sample(n, rng);
    auto pts = fixed;
    pts.insert(pts.end(), draw.particles.begin(), draw.particles.end());
    const auto v = seriesIntegrand(s, n, t, pts, init, params);
    if (v.degenerate) return std::nullopt;
    return v.value * draw.weight;
}

ClusterProposal proposalFor(const std::vector<PhasePoint>& fixed, const ProposalSettings& settings,
                            const InitialData& init, const SphereParams& params) {
    return ClusterProposal(init.env, params, settings, detail::anchorsFor(fixed, settings, params),
                           detail::energyOf(fixed, params));
}

}  // namespace

MarginalEstimate evalMarginalSeries(int s, double t, const SystemState& args, const InitialData& init,
                                    const TruncationConfig& cfg, const SphereParams& params) {
    cfg.validate();
    if (s != static_cast<int>(args.env.size()))
        throw std::invalid_argument{"evalMarginalSeries: s does not match the number of fixed env particles"};
    if (!isAllowedConfiguration(args, params))
        throw std::invalid_argument{"evalMarginalSeries: arguments form a forbidden configuration"};

    const auto fixed = fixedParticles(args);
    MarginalEstimate estimate;
    long total = 1;

    const auto leading = seriesIntegrand(s, 0, t, fixed, init, params);
    if (leading.degenerate) ++estimate.degenerateDiscards;
    estimate.add({0, leading.degenerate ? 0.0 : leading.value, 0.0});

    const auto proposal = proposalFor(fixed, ProposalSettings::forTime(t), init, params);
    for (int n = 1; n <= cfg.maxOrder; ++n) {
        if (init.env.vacuum) {
            estimate.add({n, 0.0, 0.0});
            continue;
        }
        const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
            return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) {
                auto rng = makeRng(cfg.seed, {tag(StreamTag::SeriesTerm), static_cast<std::uint64_t>(s),
                                              static_cast<std::uint64_t>(n), i, static_cast<std::uint64_t>(retry)});
                return drawTerm(s, n, t, fixed, proposal, rng, init, params);
            });
        });
        total += cfg.samplesPerOrder;
        estimate.add(detail::summarizeOutcomes(n, outcomes, estimate.degenerateDiscards));
    }
    detail::finalizeWarning(estimate, total);
    return estimate;
}

std::optional<double> sampleMarginalSeries(int s, double t, const SystemState& args, const InitialData& init,
                                           int maxOrder, std::uint64_t seed, const SphereParams& params) {
    if (maxOrder < 0) return 0.0;
    if (!isAllowedConfiguration(args, params)) return 0.0;
    const auto fixed = fixedParticles(args);
    const auto leading = seriesIntegrand(s, 0, t, fixed, init, params);
    if (leading.degenerate) return std::nullopt;
    double value = leading.value;
    if (init.env.vacuum) return value;
    const auto proposal = proposalFor(fixed, ProposalSettings::forTime(t), init, params);
    for (int n = 1; n <= maxOrder; ++n) {
        auto rng = makeRng(seed, {tag(StreamTag::TraceInner), static_cast<std::uint64_t>(n)});
        const auto term = drawTerm(s, n, t, fixed, proposal, rng, init, params);
        if (!term) return std::nullopt;
        value += *term;
    }
    return value;
}

TermEstimate termNormEstimate(int n, double t, const InitialData& init, const TruncationConfig& cfg,
                              const SphereParams& params) {
    cfg.validate();
    if (n < 0) throw std::invalid_argument{"termNormEstimate: negative order"};
    if (n == 0) return {0, 1.0, 0.0};
    if (init.env.vacuum) return {n, 0.0, 0.0};
    const auto settings = ProposalSettings::forTime(t);
    const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
        return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) -> std::optional<double> {
            auto rng = makeRng(cfg.seed, {tag(StreamTag::TermNorm), static_cast<std::uint64_t>(n), i,
                                          static_cast<std::uint64_t>(retry)});
            const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
            const double g = init.trace.freeStreamed(x, t, params.massTrace);
            const std::vector<PhasePoint> fixed{x};
            const auto proposal = proposalFor(fixed, settings, init, params);
            auto draw = proposal.sample(n, rng);
            auto pts = fixed;
            pts.insert(pts.end(), draw.particles.begin(), draw.particles.end());
            const auto v = seriesIntegrand(0, n, t, pts, init, params);
            if (v.degenerate) return std::nullopt;
            return std::abs(v.value) * draw.weight / g;
        });
    });
    long discards = 0;
    return detail::summarizeOutcomes(n, outcomes, discards);
}

double DerivativeCheckResult::residual() const { return std::abs(finiteDifference - collisionTerm); }

double DerivativeCheckResult::zScore() const {
    return combinedZScore(finiteDifference, fdStdError, collisionTerm, collisionStdError);
}

DerivativeCheckResult derivativeCheck(double t, const PhasePoint& x, const InitialData& init,
                                      const TruncationConfig& cfg, const SphereParams& params, double h) {
    cfg.validate();
    if (!(h > 0.0) || !(t > h)) throw std::invalid_argument{"derivativeCheck requires t > h > 0"};
    DerivativeCheckResult result;
    result.t = t;
    result.x = x;
    result.h = h;
    if (init.env.vacuum) return result;

    auto shifted = [&](std::vector<PhasePoint> pts, double dt) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i].q += pts[i].p * (dt / (i == 0 ? params.massTrace : params.massEnv));
        return pts;
    };

    ProposalSettings settings = ProposalSettings::forTime(t);
    settings.sMin -= h;
    settings.sMax += h;
    const std::vector<PhasePoint> fixed{x};
    const auto proposal = proposalFor(fixed, settings, init, params);

    double fdVar = 0.0;
    for (int n = 1; n <= cfg.maxOrder; ++n) {
        const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
            return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) -> std::optional<double> {
                auto rng = makeRng(cfg.seed, {tag(StreamTag::Derivative), static_cast<std::uint64_t>(n), i,
                                              static_cast<std::uint64_t>(retry)});
                auto draw = proposal.sample(n, rng);
                auto pts = fixed;
                pts.insert(pts.end(), draw.particles.begin(), draw.particles.end());
                const auto ahead = seriesIntegrand(0, n, t + h, shifted(pts, h), init, params);
                const auto behind = seriesIntegrand(0, n, t - h, shifted(pts, -h), init, params);
                if (ahead.degenerate || behind.degenerate) return std::nullopt;
                return (ahead.value - behind.value) / (2.0 * h) * draw.weight;
            });
        });
        const auto term = detail::summarizeOutcomes(n, outcomes, result.degenerateDiscards);
        result.finiteDifference += term.value;
        fdVar += term.stdError * term.stdError;
    }
    result.fdStdError = std::sqrt(fdVar);

    if (cfg.maxOrder == 0) return result;
    const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
        return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) -> std::optional<double> {
            auto rng = makeRng(cfg.seed, {tag(StreamTag::CollisionRhs), i, static_cast<std::uint64_t>(retry)});
            const auto contact = sampleContact(x, CollisionBranch::Forward, rng, init.env, params);
            if (!contact.active()) return 0.0;
            const auto inner = streamSeed(cfg.seed, {tag(StreamTag::CollisionRhs), i,
                                                     static_cast<std::uint64_t>(retry), 1});
            const auto gain = sampleMarginalSeries(1, t, contact.gain, init, cfg.maxOrder - 1, inner, params);
            const auto loss = sampleMarginalSeries(1, t, contact.loss, init, cfg.maxOrder - 1, inner, params);
            if (!gain || !loss) return std::nullopt;
            return contact.weight * (*gain - *loss);
        });
    });
    const auto rhs = detail::summarizeOutcomes(1, outcomes, result.degenerateDiscards);
    result.collisionTerm = rhs.value;
    result.collisionStdError = rhs.stdError;
    return result;
}

}  // namespace tracekin
