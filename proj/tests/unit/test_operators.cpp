#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "tracekin/operators.hpp"

using namespace tracekin;

namespace {

double smoothFunction(const SystemState& z) {
    double v = std::cos(z.trace.q.x + 0.3 * z.trace.p.y) + 0.2 * z.trace.p.z;
    for (std::size_t i = 0; i < z.env.size(); ++i) {
        const auto& x = z.env[i];
        v *= 1.0 + 0.1 * (static_cast<double>(i) + 1.0) * std::sin(x.q.y - x.p.x);
    }
    return v;
}

SystemState split(const SystemState& full, int s) {
    return SystemState{full.trace, {full.env.begin(), full.env.begin() + s}};
}

std::vector<PhasePoint> freePart(const SystemState& full, int s) { return {full.env.begin() + s, full.env.end()}; }

}  // namespace

TEST(Cumulant, OrderZeroIsTheGroup) {
    const SphereParams params{};
    auto rng = gen::testRng(20);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = gen::randomAllowedState(rng, 2, params, 0.4);
        const auto a = cumulantApply(0, 0.6, smoothFunction, s, {}, params);
        const auto g = applyGroup(smoothFunction, 0.6, s, params);
        if (a.degenerate || g.degenerate) continue;
        EXPECT_EQ(a.value, g.value);
    }
}

TEST(Cumulant, VanishesAtTimeZero) {
    const SphereParams params{};
    auto rng = gen::testRng(21);
    for (int n = 1; n <= 3; ++n) {
        const auto full = gen::randomAllowedState(rng, 1 + n, params, 0.4);
        const auto v = cumulantApply(n, 0.0, smoothFunction, split(full, 1), freePart(full, 1), params);
        EXPECT_EQ(v.value, 0.0) << n;
    }
}

TEST(Cumulant, SecondOrderMatchesGroupDifference) {
    const SphereParams params{};
    auto rng = gen::testRng(22);
    int nonzero = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto full = gen::randomAllowedState(rng, 2, params, 0.4);
        const double t = 0.5;
        const auto a = cumulantApply(1, t, smoothFunction, split(full, 1), freePart(full, 1), params);
        // Oracle: S_{1+s+1}(-t) f - S_{1+s}(-t) S_1(-t) f with independent flows.
        const auto together = flow(full, -t, params);
        const auto cluster = flow(split(full, 1), -t, params);
        if (a.degenerate || together.degenerate || cluster.degenerate) continue;
        auto separate = cluster.finalState;
        const auto& x = full.env[1];
        separate.env.push_back({x.q - x.p * (t / params.massEnv), x.p});
        const double expected = smoothFunction(together.finalState) - smoothFunction(separate);
        EXPECT_NEAR(a.value, expected, 1e-12);
        nonzero += std::abs(expected) > 1e-6;
    }
    EXPECT_GT(nonzero, 10);
}

TEST(Cumulant, SeparatedParticleGivesZero) {
    const SphereParams params{};
    auto rng = gen::testRng(23);
    for (int trial = 0; trial < 100; ++trial) {
        auto full = gen::randomAllowedState(rng, 2, params, 0.4);
        full.env[1].q = full.env[1].q + Vec3{50.0, 0.0, 0.0};
        const auto v = cumulantApply(1, 1.0, smoothFunction, split(full, 1), freePart(full, 1), params);
        if (v.degenerate) continue;
        EXPECT_LE(std::abs(v.value), 1e-12);
    }
}

TEST(Cumulant, Multilinear) {
    const SphereParams params{};
    auto rng = gen::testRng(24);
    auto g = [](const SystemState& z) { return z.trace.p.x * z.env.back().q.z; };
    for (int trial = 0; trial < 50; ++trial) {
        const auto full = gen::randomAllowedState(rng, 3, params, 0.4);
        auto combo = [&](const SystemState& z) { return 2.0 * smoothFunction(z) - 3.0 * g(z); };
        const auto a = cumulantApply(2, 0.7, smoothFunction, split(full, 1), freePart(full, 1), params);
        const auto b = cumulantApply(2, 0.7, g, split(full, 1), freePart(full, 1), params);
        const auto c = cumulantApply(2, 0.7, combo, split(full, 1), freePart(full, 1), params);
        if (a.degenerate || b.degenerate || c.degenerate) continue;
        EXPECT_NEAR(c.value, 2.0 * a.value - 3.0 * b.value, 1e-12);
    }
}

TEST(ClusterInversion, ResidualsSmall) {
    const SphereParams params{};
    auto rng = gen::testRng(25);
    for (int n = 0; n <= 3; ++n) {
        std::vector<SystemState> samples;
        for (int i = 0; i < 200; ++i) samples.push_back(gen::randomAllowedState(rng, 1 + n, params, 0.4));
        const auto report = verifyClusterInversion(n, 0.8, smoothFunction, samples, 1, params);
        EXPECT_GT(report.evaluated, 150);
        if (n == 0) {
            EXPECT_EQ(report.maxResidual, 0.0);
        } else if (n == 1) {
            EXPECT_LE(report.maxResidual, 1e-12);
        } else {
            EXPECT_LE(report.maxResidual, 1e-9);
        }
    }
}

TEST(OperatorChain, TraceShiftAndWeights) {
    const SphereParams params{};
    const std::vector<PhasePoint> pts{{{0, 0, 0}, {1, 0, 0}}, {{5, 0, 0}, {0, 0, 0}}};
    const ChainContext ctx{params, [](std::span<const PhasePoint> xs) { return 2.0 * static_cast<double>(xs.size()); },
                           {}};
    const Chain chain{0.5, {TraceShiftOp{3.0}, EnvWeightOp{{1}}}};
    const auto v = evaluateChain(chain, pts, ctx, [](std::span<const PhasePoint> z) { return z[0].q.x; });
    EXPECT_DOUBLE_EQ(v.value, 0.5 * 2.0 * 3.0);
    // Trace moved onto the env sphere: the allowed-pair factor vanishes.
    const Chain overlap{1.0, {TraceShiftOp{5.0}, EnvWeightOp{{1}}}};
    EXPECT_EQ(evaluateChain(overlap, pts, ctx, [](std::span<const PhasePoint>) { return 1.0; }).value, 0.0);
}
