#include "tracekin/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tracekin {

namespace {

struct BlockFlow {
    std::uint64_t mask = 0;
    bool allowed = true;
    bool degenerate = false;
    std::vector<Body> bodies;
};

class ChainEvaluator {
public:
    ChainEvaluator(const Chain& chain, const ChainContext& ctx, const ChainTerminal& terminal)
        : chain_(chain), ctx_(ctx), terminal_(terminal) {}

    double run(std::size_t op, const std::vector<PhasePoint>& pts) {
        if (degenerate_) return 0.0;
        if (op == chain_.ops.size()) return terminal_(pts);
        return std::visit([&](const auto& o) { return apply(o, op, pts); }, chain_.ops[op]);
    }

    bool degenerate() const { return degenerate_; }

private:
    double apply(const EnvWeightOp& o, std::size_t op, const std::vector<PhasePoint>& pts) {
        const double sigma = ctx_.params.sigma;
        std::vector<PhasePoint> members;
        members.reserve(o.members.size());
        for (int i : o.members) {
            const auto& x = pts[static_cast<std::size_t>(i)];
            if (!pairAllowed(pts[0].q, x.q, sigma)) return 0.0;
            members.push_back(x);
        }
        const double w = ctx_.envDensity(members);
        if (w == 0.0) return 0.0;
        return w * run(op + 1, pts);
    }

    double apply(const TraceShiftOp& o, std::size_t op, const std::vector<PhasePoint>& pts) {
        auto next = pts;
        next[0].q += next[0].p * (o.groupTime / ctx_.params.massTrace);
        return run(op + 1, next);
    }

    double apply(const CumulantOp& o, std::size_t op, const std::vector<PhasePoint>& pts) {
        const auto& partitions = partitionsOfSize(static_cast<int>(o.atoms.size()));
        std::vector<BlockFlow> cache;
        double sum = 0.0;
        for (const auto& partition : partitions) {
            auto next = pts;
            bool vanishes = false;
            for (const auto& block : partition.blocks) {
                const BlockFlow& flow = blockFlow(o, block, pts, cache);
                if (flow.degenerate) {
                    degenerate_ = true;
                    return 0.0;
                }
                if (!flow.allowed) {
                    vanishes = true;
                    break;
                }
                for (const auto& b : flow.bodies) next[static_cast<std::size_t>(b.index)] = b.x;
            }
            if (vanishes) continue;
            const double value = run(op + 1, next);
            if (degenerate_) return 0.0;
            sum += partition.cumulantWeight() * value;
        }
        return sum;
    }

    const BlockFlow& blockFlow(const CumulantOp& o, const std::vector<int>& block, const std::vector<PhasePoint>& pts,
                               std::vector<BlockFlow>& cache) {
        std::uint64_t mask = 0;
        for (int atom : block)
            for (int i : o.atoms[static_cast<std::size_t>(atom)]) mask |= std::uint64_t{1} << i;
        for (const auto& c : cache)
            if (c.mask == mask) return c;

        BlockFlow flow;
        flow.mask = mask;
        for (int i = 0; i < 64; ++i)
            if (mask & (std::uint64_t{1} << i)) flow.bodies.push_back(Body{pts[static_cast<std::size_t>(i)], i});
        for (std::size_t a = 0; a < flow.bodies.size() && flow.allowed; ++a)
            for (std::size_t b = a + 1; b < flow.bodies.size(); ++b)
                if (!pairAllowed(flow.bodies[a].x.q, flow.bodies[b].x.q, ctx_.params.sigma)) {
                    flow.allowed = false;
                    break;
                }
        if (flow.allowed)
            flow.degenerate = evolveBodies(flow.bodies, o.groupTime, ctx_.params, ctx_.resolution).degenerate;
        cache.push_back(std::move(flow));
        return cache.back();
    }

    const Chain& chain_;
    const ChainContext& ctx_;
    const ChainTerminal& terminal_;
    bool degenerate_ = false;
};

SystemState toState(std::span<const PhasePoint> pts) {
    SystemState s;
    s.trace = pts[0];
    s.env.assign(pts.begin() + 1, pts.end());
    return s;
}

}  // namespace

OperatorValue evaluateChain(const Chain& chain, std::span<const PhasePoint> particles, const ChainContext& ctx,
                            const ChainTerminal& terminal) {
    if (particles.empty()) throw std::invalid_argument{"operator chain needs the trace particle"};
    if (particles.size() > 64) throw std::invalid_argument{"operator chain supports at most 64 particles"};
    if (chain.coefficient == 0.0) return {};
    ChainEvaluator evaluator(chain, ctx, terminal);
    const std::vector<PhasePoint> pts(particles.begin(), particles.end());
    const double value = evaluator.run(0, pts);
    if (evaluator.degenerate()) return {0.0, true};
    return {chain.coefficient * value, false};
}

OperatorValue evaluateSum(const OperatorSum& sum, std::span<const PhasePoint> particles, const ChainContext& ctx,
                          const ChainTerminal& terminal) {
    OperatorValue total;
    for (const auto& chain : sum) {
        const auto v = evaluateChain(chain, particles, ctx, terminal);
        if (v.degenerate) return {0.0, true};
        total.value += v.value;
    }
    return total;
}

std::vector<std::vector<int>> clusterAtoms(const LabelSet& labels) {
    std::vector<std::vector<int>> atoms;
    for (int label = 0; label < labels.size(); ++label) atoms.push_back(labels.expand(label));
    return atoms;
}

GroupValue cumulantApply(int n, double t, const PhaseFunction& f, const SystemState& traceBlock,
                         std::span<const PhasePoint> freeParticles, const SphereParams& params,
                         const EventResolution& resolution) {
    if (n != static_cast<int>(freeParticles.size()))
        throw std::invalid_argument{"cumulantApply: order does not match the number of free particles"};
    const LabelSet labels{static_cast<int>(traceBlock.env.size()), n};
    std::vector<PhasePoint> pts{traceBlock.trace};
    pts.insert(pts.end(), traceBlock.env.begin(), traceBlock.env.end());
    pts.insert(pts.end(), freeParticles.begin(), freeParticles.end());

    const Chain chain{1.0, {CumulantOp{clusterAtoms(labels), -t}}};
    const ChainContext ctx{params, nullptr, resolution};
    const auto v = evaluateChain(chain, pts, ctx, [&](std::span<const PhasePoint> z) { return f(toState(z)); });
    return {v.value, v.degenerate};
}

InversionReport verifyClusterInversion(int n, double t, const PhaseFunction& f, std::span<const SystemState> samples,
                                       int clusterEnvCount, const SphereParams& params,
                                       const EventResolution& resolution) {
    if (n < 0 || n > 3) throw std::invalid_argument{"verifyClusterInversion: order must be 0..3"};
    const LabelSet labels{clusterEnvCount, n};
    const auto atoms = clusterAtoms(labels);

    OperatorSum inverse;
    for (const auto& partition : partitionsOfSize(labels.size())) {
        Chain chain;
        for (const auto& block : partition.blocks) {
            CumulantOp op{{}, -t};
            for (int label : block) op.atoms.push_back(atoms[static_cast<std::size_t>(label)]);
            chain.ops.emplace_back(std::move(op));
        }
        inverse.push_back(std::move(chain));
    }

    InversionReport report;
    report.order = n;
    const ChainContext ctx{params, nullptr, resolution};
    const ChainTerminal terminal = [&](std::span<const PhasePoint> z) { return f(toState(z)); };
    for (const auto& state : samples) {
        if (static_cast<int>(state.env.size()) != clusterEnvCount + n)
            throw std::invalid_argument{"verifyClusterInversion: sample has the wrong particle count"};
        const auto lhs = applyGroup(f, t, state, params, resolution);
        std::vector<PhasePoint> pts{state.trace};
        pts.insert(pts.end(), state.env.begin(), state.env.end());
        const auto rhs = evaluateSum(inverse, pts, ctx, terminal);
        if (lhs.degenerate || rhs.degenerate) {
            ++report.degenerate;
            continue;
        }
        ++report.evaluated;
        report.maxResidual = std::max(report.maxResidual, std::abs(lhs.value - rhs.value));
    }
    return report;
}

}  // namespace tracekin
