#include "tracekin/fpe.hpp"

#include <cmath>
#include <stdexcept>

#include "sampling.hpp"
#include "tracekin/proposal.hpp"
#include "tracekin/series.hpp"

namespace tracekin {

using detail::StreamTag;
using detail::tag;

namespace {

/// Anchors for integration particles of a scattering operator: every fixed
/// particle plus the trace advanced by t, where the block cumulants start.
ClusterProposal scatteringProposal(std::span<const PhasePoint> fixed, double t, const InitialData& init,
                                   const SphereParams& params) {
    const auto settings = ProposalSettings::forTime(t);
    auto anchors = detail::anchorsFor(fixed, settings, params);
    const Vec3 v = fixed[0].p / params.massTrace;
    anchors.push_back({fixed[0].q + v * t, v, settings.sMin, settings.sMax});
    return ClusterProposal(init.env, params, settings, std::move(anchors), detail::energyOf(fixed, params));
}

std::vector<PhasePoint> particlesOf(const SystemState& state) {
    std::vector<PhasePoint> pts{state.trace};
    pts.insert(pts.end(), state.env.begin(), state.env.end());
    return pts;
}

/// One importance draw of 1/n! int V_{1+n} F over the integration particles.
std::optional<double> scatteringDraw(const OperatorSum& op, int n, double t, const std::vector<PhasePoint>& fixed,
                                     Rng& rng, std::uint64_t innerSeed, const InitialData& init,
                                     const TraceFunctionEstimator& traceF, const SphereParams& params) {
    auto pts = fixed;
    double weight = 1.0;
    if (n > 0) {
        if (init.env.vacuum) return 0.0;
        auto draw = scatteringProposal(fixed, t, init, params).sample(n, rng);
        pts.insert(pts.end(), draw.particles.begin(), draw.particles.end());
        weight = draw.weight;
    }
    const auto v = applyOperator(op, pts, init, traceF, innerSeed, params);
    if (v.degenerate) return std::nullopt;
    return v.value * weight / factorial(n);
}

struct CollisionSampler {
    double t;
    const InitialData& init;
    const TraceFunctionEstimator& traceF;
    const SphereParams& params;
    CollisionOptions options;

    CollisionBranch branch() const { return t >= 0.0 ? CollisionBranch::Forward : CollisionBranch::Backward; }

    std::optional<double> operator()(int n, const OperatorSum& op, const PhasePoint& x, Rng& rng) const {
        const auto contact = sampleContact(x, branch(), rng, init.env, params);
        if (!contact.active()) return 0.0;
        const std::uint64_t inner = rng();
        const auto& gainPoint = options.swapGainLoss ? contact.loss : contact.gain;
        const auto& lossPoint = options.swapGainLoss ? contact.gain : contact.loss;
        const auto gain = scatteringDraw(op, n, t, particlesOf(gainPoint), rng, inner, init, traceF, params);
        if (!gain) return std::nullopt;
        const auto loss = scatteringDraw(op, n, t, particlesOf(lossPoint), rng, inner, init, traceF, params);
        if (!loss) return std::nullopt;
        return contact.weight * (*gain - *loss);
    }
};

}  // namespace

MarginalEstimate collisionIntegral(double t, const PhasePoint& x, const InitialData& init,
                                   const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                   const SphereParams& params, const CollisionOptions& options) {
    cfg.validate();
    if (!isFinite(x)) throw std::invalid_argument{"collisionIntegral: non-finite trace point"};
    const CollisionSampler sampler{t, init, traceF, params, options};
    MarginalEstimate estimate;
    long total = 0;
    for (int n = 0; n <= cfg.maxOrder; ++n) {
        if (init.env.vacuum) {
            estimate.add({n, 0.0, 0.0});
            continue;
        }
        const auto op = buildScatteringOperator({n, 1, t, options.leading});
        const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
            return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) {
                auto rng = makeRng(cfg.seed, {tag(StreamTag::CollisionIntegral), static_cast<std::uint64_t>(n), i,
                                              static_cast<std::uint64_t>(retry)});
                return sampler(n, op, x, rng);
            });
        });
        total += cfg.samplesPerOrder;
        estimate.add(detail::summarizeOutcomes(n, outcomes, estimate.degenerateDiscards));
    }
    detail::finalizeWarning(estimate, total);
    return estimate;
}

MarginalEstimate fpeRightHandSide(double t, const PhasePoint& x, const InitialData& init,
                                  const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                  const SphereParams& params, double h) {
    if (!(h > 0.0)) throw std::invalid_argument{"fpeRightHandSide: step must be positive"};
    const Vec3 v = x.p / params.massTrace;
    const PhasePoint ahead{x.q + v * h, x.p};
    const PhasePoint behind{x.q - v * h, x.p};
    const long inner = traceF.deterministic() ? 1 : cfg.samplesPerOrder;
    std::vector<detail::SampleOutcome> outcomes(static_cast<std::size_t>(inner));
    for (long i = 0; i < inner; ++i) {
        const auto seed = streamSeed(cfg.seed, {tag(StreamTag::TraceInner), static_cast<std::uint64_t>(i)});
        const auto a = traceF.sample(ahead, seed);
        const auto b = traceF.sample(behind, seed);
        outcomes[static_cast<std::size_t>(i)] =
            (a && b) ? detail::SampleOutcome{-(*a - *b) / (2.0 * h), false} : detail::SampleOutcome{0.0, true};
    }
    MarginalEstimate streaming;
    auto term = detail::summarizeOutcomes(-1, outcomes, streaming.degenerateDiscards);

    auto result = collisionIntegral(t, x, init, traceF, cfg, params);
    MarginalEstimate total;
    total.add(term);
    for (const auto& c : result.perOrderTerms) total.add(c);
    total.degenerateDiscards = result.degenerateDiscards + streaming.degenerateDiscards;
    total.retryWarning = result.retryWarning;
    return total;
}

TermEstimate collisionTermNorm(int n, double t, const InitialData& init, const TraceFunctionEstimator& traceF,
                               const TruncationConfig& cfg, const SphereParams& params) {
    cfg.validate();
    if (n < 0) throw std::invalid_argument{"collisionTermNorm: negative order"};
    if (init.env.vacuum) return {n, 0.0, 0.0};
    const CollisionSampler sampler{t, init, traceF, params, {}};
    const auto op = buildScatteringOperator({n, 1, t, LeadingTime::Backward});
    const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
        return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) -> std::optional<double> {
            auto rng = makeRng(cfg.seed, {tag(StreamTag::TermNorm), 1000 + static_cast<std::uint64_t>(n), i,
                                          static_cast<std::uint64_t>(retry)});
            const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
            const double g = init.trace.freeStreamed(x, t, params.massTrace);
            const auto v = sampler(n, op, x, rng);
            if (!v) return std::nullopt;
            return std::abs(*v) / g;
        });
    });
    long discards = 0;
    return detail::summarizeOutcomes(n, outcomes, discards);
}

double DuhamelComparison::zScore() const {
    return combinedZScore(duhamel.value, duhamel.stdError, collision.value, collision.stdError);
}

namespace {

struct DuhamelSample {
    double duhamel = 0.0;
    double boundary = 0.0;
    double collision = 0.0;
    bool discarded = false;
};

}  // namespace

DuhamelComparison compareDuhamel(double t, const PhasePoint& x, const InitialData& init,
                                 const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                 const SphereParams& params, int nodes) {
    cfg.validate();
    if (t < 0.0) throw std::invalid_argument{"duhamelFirstOrder requires t >= 0"};
    if (nodes < 1 || nodes > 64) throw std::invalid_argument{"duhamelFirstOrder: nodes must be 1..64"};
    const auto v1 = buildScatteringOperator({0, 1, t, LeadingTime::Backward});
    const EnvFamily& env = init.env;
    const double sigma = params.sigma;

    // H(z) = F0(x1) X2(q, q1) F(t, q + t p / M, p)
    auto boundaryFunction = [&](const std::vector<PhasePoint>& z, std::uint64_t inner) -> std::optional<double> {
        if (!pairAllowed(z[0].q, z[1].q, sigma)) return 0.0;
        const double w = env.density(std::span<const PhasePoint>(z).subspan(1, 1), sigma);
        if (w == 0.0) return 0.0;
        const auto f = traceF.sample({z[0].q + z[0].p * (t / params.massTrace), z[0].p}, inner);
        if (!f) return std::nullopt;
        return w * *f;
    };
    auto freeStream = [&](std::vector<PhasePoint> z, double dt) {
        z[0].q += z[0].p * (dt / params.massTrace);
        z[1].q += z[1].p * (dt / params.massEnv);
        return z;
    };
    // Phi(tau) H = H evaluated after free streaming by -(t - tau) and the pair flow by -tau.
    auto phi = [&](const std::vector<PhasePoint>& z, double tau, std::uint64_t inner) -> std::optional<double> {
        auto y = freeStream(z, -(t - tau));
        if (!pairAllowed(y[0].q, y[1].q, sigma)) return 0.0;
        std::vector<Body> bodies{{y[0], 0}, {y[1], 1}};
        if (evolveBodies(bodies, -tau, params).degenerate) return std::nullopt;
        return boundaryFunction({bodies[0].x, bodies[1].x}, inner);
    };

    auto side = [&](const SystemState& point, std::uint64_t inner, double& boundary) -> std::optional<double> {
        const auto z = particlesOf(point);
        const auto b = boundaryFunction(freeStream(z, -t), inner);
        if (!b) return std::nullopt;
        boundary = *b;
        double correction = 0.0;
        auto previous = phi(z, 0.0, inner);
        for (int j = 1; j <= nodes && previous; ++j) {
            const auto current = phi(z, t * j / nodes, inner);
            if (!current) return std::nullopt;
            correction += *current - *previous;
            previous = current;
        }
        if (!previous) return std::nullopt;
        return *b + correction;
    };

    const auto samples = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
        for (int retry = 0; retry <= cfg.degenerateRetryLimit; ++retry) {
            auto rng = makeRng(cfg.seed, {tag(StreamTag::Duhamel), i, static_cast<std::uint64_t>(retry)});
            const auto contact = sampleContact(x, CollisionBranch::Forward, rng, env, params);
            if (!contact.active()) return DuhamelSample{};
            const std::uint64_t inner = rng();
            double gainBoundary = 0.0;
            double lossBoundary = 0.0;
            const auto gain = side(contact.gain, inner, gainBoundary);
            const auto loss = side(contact.loss, inner, lossBoundary);
            const auto gainV = applyOperator(v1, particlesOf(contact.gain), init, traceF, inner, params);
            const auto lossV = applyOperator(v1, particlesOf(contact.loss), init, traceF, inner, params);
            if (!gain || !loss || gainV.degenerate || lossV.degenerate) continue;
            return DuhamelSample{contact.weight * (*gain - *loss), contact.weight * (gainBoundary - lossBoundary),
                                 contact.weight * (gainV.value - lossV.value), false};
        }
        return DuhamelSample{0.0, 0.0, 0.0, true};
    });

    std::vector<double> duhamel;
    std::vector<double> boundary;
    std::vector<double> collision;
    long discards = 0;
    for (const auto& s : samples) {
        if (s.discarded) {
            ++discards;
            continue;
        }
        duhamel.push_back(s.duhamel);
        boundary.push_back(s.boundary);
        collision.push_back(s.collision);
    }
    auto toEstimate = [&](const std::vector<double>& values) {
        const auto s = summarize(values);
        MarginalEstimate e;
        e.add({0, s.mean, s.stdError});
        e.degenerateDiscards = discards;
        detail::finalizeWarning(e, cfg.samplesPerOrder);
        return e;
    };
    DuhamelComparison result;
    result.duhamel = toEstimate(duhamel);
    result.boundary = toEstimate(boundary);
    result.collision = toEstimate(collision);
    result.difference = summarizeDifference(duhamel, collision);
    return result;
}

MarginalEstimate duhamelFirstOrder(double t, const PhasePoint& x, const InitialData& init,
                                   const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                   const SphereParams& params, int nodes) {
    return compareDuhamel(t, x, init, traceF, cfg, params, nodes).duhamel;
}

MarginalEstimate evalFunctional(int s, double t, const SystemState& args, const InitialData& init,
                                const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                const SphereParams& params, LeadingTime leading) {
    cfg.validate();
    if (s != static_cast<int>(args.env.size()))
        throw std::invalid_argument{"evalFunctional: s does not match the number of fixed env particles"};
    if (!isAllowedConfiguration(args, params))
        throw std::invalid_argument{"evalFunctional: arguments form a forbidden configuration"};

    std::vector<PhasePoint> fixed{args.trace};
    const auto env = detail::canonicalOrder(args.env);
    fixed.insert(fixed.end(), env.begin(), env.end());

    MarginalEstimate estimate;
    long total = 0;
    for (int n = 0; n <= cfg.maxOrder; ++n) {
        if (n > 0 && init.env.vacuum) {
            estimate.add({n, 0.0, 0.0});
            continue;
        }
        const auto op = buildScatteringOperator({n, s, t, leading});
        const long samples = (n == 0 && traceF.deterministic()) ? 1 : cfg.samplesPerOrder;
        const auto outcomes = parallelMap(static_cast<std::size_t>(samples), [&](std::size_t i) {
            return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) {
                auto rng = makeRng(cfg.seed, {tag(StreamTag::Functional), static_cast<std::uint64_t>(s),
                                              static_cast<std::uint64_t>(n), i, static_cast<std::uint64_t>(retry)});
                const std::uint64_t inner = rng();
                return scatteringDraw(op, n, t, fixed, rng, inner, init, traceF, params);
            });
        });
        total += samples;
        estimate.add(detail::summarizeOutcomes(n, outcomes, estimate.degenerateDiscards));
    }
    detail::finalizeWarning(estimate, total);
    return estimate;
}

RecurrenceReport verifyRecurrence(int n, int s, double t, std::span<const SystemState> samples,
                                  const InitialData& init, const SphereParams& params, LeadingTime leading) {
    if (n < 0 || n > 3) throw std::invalid_argument{"verifyRecurrence: order must be 0..3"};
    if (init.env.exclusion)
        throw std::invalid_argument{"verifyRecurrence needs factorized env data (exclusion disabled)"};

    Chain lhs = seriesTermChain(s, n, t);
    lhs.coefficient = 1.0;

    OperatorSum rhs;
    for (int k = 0; k <= n; ++k) {
        CumulantOp tail{{{0}}, -t};
        EnvWeightOp tailWeight;
        for (int i = s + n - k + 1; i <= s + n; ++i) {
            tail.atoms.push_back({i});
            tailWeight.members.push_back(i);
        }
        for (auto chain : buildScatteringOperator({n - k, s, t, leading})) {
            chain.coefficient *= binomial(n, k);
            chain.ops.emplace_back(tail);
            chain.ops.emplace_back(tailWeight);
            rhs.push_back(std::move(chain));
        }
    }

    RecurrenceReport report;
    report.order = n;
    report.tolerance = n == 0 ? 1e-12 : 1e-8;
    const auto ctx = detail::chainContext(init, params);
    const auto& trace = init.trace;
    const ChainTerminal terminal = [&trace](std::span<const PhasePoint> z) { return trace(z[0]); };
    for (const auto& state : samples) {
        if (static_cast<int>(state.env.size()) != s + n)
            throw std::invalid_argument{"verifyRecurrence: sample has the wrong particle count"};
        const auto pts = particlesOf(state);
        const auto left = evaluateChain(lhs, pts, ctx, terminal);
        double right = 0.0;
        double scale = std::abs(left.value);
        bool degenerate = left.degenerate;
        for (const auto& chain : rhs) {
            const auto v = evaluateChain(chain, pts, ctx, terminal);
            degenerate = degenerate || v.degenerate;
            right += v.value;
            scale += std::abs(v.value);
        }
        if (degenerate) {
            ++report.degenerate;
            continue;
        }
        ++report.evaluated;
        const double residual = scale > 0.0 ? std::abs(left.value - right) / scale : 0.0;
        report.maxResidual = std::max(report.maxResidual, residual);
    }
    return report;
}

MarginalEstimate averageObservable(int s, double t, const Observable& b, const InitialData& init,
                                   const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                   const SphereParams& params) {
    cfg.validate();
    if (s < 0) throw std::invalid_argument{"averageObservable: negative s"};
    std::vector<OperatorSum> ops;
    for (int n = 0; n <= cfg.maxOrder; ++n) ops.push_back(buildScatteringOperator({n, s, t, LeadingTime::Backward}));
    const double prefactor = 1.0 / factorial(1 + s);

    const auto outcomes = parallelMap(static_cast<std::size_t>(cfg.samplesPerOrder), [&](std::size_t i) {
        return detail::withRetries(cfg.degenerateRetryLimit, [&](int retry) -> std::optional<double> {
            auto rng = makeRng(cfg.seed, {tag(StreamTag::Average), static_cast<std::uint64_t>(s), i,
                                          static_cast<std::uint64_t>(retry)});
            const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
            double weight = 1.0 / init.trace.freeStreamed(x, t, params.massTrace);
            std::vector<PhasePoint> fixed{x};
            if (s > 0) {
                if (init.env.vacuum) return 0.0;
                const auto settings = ProposalSettings::forTime(t);
                const ClusterProposal proposal(init.env, params, settings, detail::anchorsFor(fixed, settings, params),
                                               detail::energyOf(fixed, params));
                auto draw = proposal.sample(s, rng);
                fixed.insert(fixed.end(), draw.particles.begin(), draw.particles.end());
                weight *= draw.weight;
            }
            SystemState state{fixed[0], {fixed.begin() + 1, fixed.end()}};
            const double observable = b(state);
            if (observable == 0.0) return 0.0;
            const std::uint64_t inner = rng();
            double marginal = 0.0;
            for (int n = 0; n <= cfg.maxOrder; ++n) {
                const auto term = scatteringDraw(ops[static_cast<std::size_t>(n)], n, t, fixed, rng, inner, init,
                                                 traceF, params);
                if (!term) return std::nullopt;
                marginal += *term;
            }
            return prefactor * observable * marginal * weight;
        });
    });
    MarginalEstimate estimate;
    estimate.add(detail::summarizeOutcomes(s, outcomes, estimate.degenerateDiscards));
    detail::finalizeWarning(estimate, cfg.samplesPerOrder);
    return estimate;
}

}  // namespace tracekin
