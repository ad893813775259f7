#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "tracekin/fpe.hpp"

using namespace tracekin;

namespace {

const PhasePoint kTrace{{0.1, 0.2, -0.1}, {0.8, -0.3, 0.2}};

TruncationConfig smallConfig(int order, long samples) {
    TruncationConfig cfg;
    cfg.maxOrder = order;
    cfg.samplesPerOrder = samples;
    cfg.seed = 11;
    return cfg;
}

double wave(const PhasePoint& x) { return std::exp(-0.5 * norm2(x.q)) * (1.2 + std::cos(x.p.x - 0.4 * x.q.y)); }

std::vector<PhasePoint> flatten(const SystemState& s) {
    std::vector<PhasePoint> out{s.trace};
    out.insert(out.end(), s.env.begin(), s.env.end());
    return out;
}

}  // namespace

TEST(ScatteringOperator, CompositionCoefficients) {
    const auto v2 = buildScatteringOperator({1, 0, 0.5, LeadingTime::Backward});
    ASSERT_EQ(v2.size(), 2u);
    EXPECT_EQ(v2[0].coefficient, 1.0);
    EXPECT_EQ(v2[1].coefficient, -1.0);
    EXPECT_EQ(buildScatteringOperator({3, 1, 0.5, LeadingTime::Backward}).size(), 8u);
}

TEST(ScatteringOperator, OrderZeroIsIdentityForLoneTrace) {
    const SphereParams params{};
    const auto init = InitialData::standard(params);
    const ClosedFormTraceFunction f{wave};
    for (double t : {0.0, 0.7, -1.3}) {
        const std::vector<PhasePoint> pts{kTrace};
        const auto v = applyScatteringOperator({0, 0, t, LeadingTime::Backward}, pts, init, f, 1, params);
        EXPECT_NEAR(v.value, wave(kTrace), 1e-14) << t;
    }
}

TEST(ScatteringOperator, HigherOrdersVanishWithoutClusterEnv) {
    const SphereParams params{};
    auto init = InitialData::standard(params, 1.0, 4.0);
    const ClosedFormTraceFunction f{wave};
    auto rng = gen::testRng(31);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 40; ++trial) {
            const auto state = gen::randomAllowedState(rng, n, params, 0.4);
            const auto v = applyScatteringOperator({n, 0, 0.9, LeadingTime::Backward}, flatten(state), init, f, 1,
                                                   params);
            if (v.degenerate) continue;
            EXPECT_NEAR(v.value, 0.0, 1e-12) << n;
        }
    }
}

TEST(ScatteringOperator, LinearInTraceFunction) {
    const SphereParams params{};
    const auto init = InitialData::standard(params, 1.0, 4.0);
    auto g = [](const PhasePoint& x) { return x.q.x * x.p.z + 0.3; };
    const ClosedFormTraceFunction fa{wave};
    const ClosedFormTraceFunction fb{g};
    const ClosedFormTraceFunction fc{[&](const PhasePoint& x) { return 2.0 * wave(x) - 0.5 * g(x); }};
    auto rng = gen::testRng(32);
    int nonzero = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto state = gen::randomAllowedState(rng, 2, params, 0.25);
        const ScatteringOperatorSpec spec{1, 1, 0.8, LeadingTime::Backward};
        const auto a = applyScatteringOperator(spec, flatten(state), init, fa, 1, params);
        const auto b = applyScatteringOperator(spec, flatten(state), init, fb, 1, params);
        const auto c = applyScatteringOperator(spec, flatten(state), init, fc, 1, params);
        if (a.degenerate || b.degenerate || c.degenerate) continue;
        EXPECT_NEAR(c.value, 2.0 * a.value - 0.5 * b.value, 1e-12 * (1.0 + std::abs(c.value)));
        nonzero += std::abs(a.value) > 1e-8;
    }
    EXPECT_GT(nonzero, 5);
}

TEST(Recurrence, HoldsPointwiseForFactorizedData) {
    const SphereParams params{};
    auto init = InitialData::standard(params, 1.0, 4.0);
    init.env.exclusion = false;
    auto rng = gen::testRng(33);
    for (int s = 0; s <= 1; ++s) {
        for (int n = 0; n <= 2; ++n) {
            std::vector<SystemState> samples;
            for (int i = 0; i < 60; ++i) samples.push_back(gen::randomAllowedState(rng, s + n, params, 0.4));
            const auto report = verifyRecurrence(n, s, 0.8, samples, init, params);
            EXPECT_TRUE(report.passed()) << "s=" << s << " n=" << n << " residual " << report.maxResidual;
            EXPECT_GT(report.evaluated, 40);
        }
    }
}

TEST(Recurrence, ForwardLeadingTimeBreaksIt) {
    const SphereParams params{};
    auto init = InitialData::standard(params, 1.0, 4.0);
    init.env.exclusion = false;
    auto rng = gen::testRng(34);
    std::vector<SystemState> samples;
    for (int i = 0; i < 20; ++i) samples.push_back(gen::randomAllowedState(rng, 1, params, 0.4));
    EXPECT_FALSE(verifyRecurrence(0, 1, 0.8, samples, init, params, LeadingTime::Forward).passed());
}

TEST(Recurrence, RejectsExclusionData) {
    const SphereParams params{};
    const auto init = InitialData::standard(params);
    const std::vector<SystemState> samples{SystemState{kTrace, {}}};
    EXPECT_THROW(verifyRecurrence(0, 0, 0.5, samples, init, params), std::invalid_argument);
}

TEST(CollisionIntegral, VacuumIsZero) {
    const SphereParams params{};
    auto init = InitialData::standard(params);
    init.env.vacuum = true;
    const auto f = freeStreamedTraceFunction(init, 0.5, params);
    const auto c = collisionIntegral(0.5, kTrace, init, *f, smallConfig(2, 200), params);
    EXPECT_EQ(c.value, 0.0);
    EXPECT_EQ(c.stdError, 0.0);
}

TEST(CollisionIntegral, SwappingGainAndLossNegates) {
    const SphereParams params{};
    const auto init = InitialData::standard(params, 0.5);
    const auto f = freeStreamedTraceFunction(init, 0.5, params);
    for (double t : {0.5, -0.5}) {
        // Order zero draws no integration particles, so the negation is exact.
        const auto plain = collisionIntegral(t, kTrace, init, *f, smallConfig(0, 2000), params);
        const auto swapped =
            collisionIntegral(t, kTrace, init, *f, smallConfig(0, 2000), params, CollisionOptions{{}, true});
        EXPECT_NE(plain.value, 0.0);
        EXPECT_NEAR(swapped.value, -plain.value, 1e-12 * std::abs(plain.value)) << t;
        const auto plain1 = collisionIntegral(t, kTrace, init, *f, smallConfig(1, 4000), params);
        const auto swapped1 =
            collisionIntegral(t, kTrace, init, *f, smallConfig(1, 4000), params, CollisionOptions{{}, true});
        EXPECT_LT(combinedZScore(swapped1.value, swapped1.stdError, -plain1.value, plain1.stdError), 4.0) << t;
    }
}

TEST(CollisionIntegral, LowestOrderIsStationaryForMaxwellianTrace) {
    // A spatially uniform Maxwellian trace at the env temperature is an equilibrium.
    const SphereParams params{};
    const auto init = InitialData::standard(params, 0.5);
    const ClosedFormTraceFunction maxwell{[](const PhasePoint& x) { return maxwellDensity(x.p, 1.0); }};
    const auto c = collisionIntegral(0.0, kTrace, init, maxwell, smallConfig(0, 20000), params);
    EXPECT_NEAR(c.value, 0.0, 1e-12);
}

TEST(FpeRightHandSide, VacuumIsFreeStreaming) {
    const SphereParams params{};
    auto init = InitialData::standard(params);
    init.env.vacuum = true;
    const double t = 0.7;
    const auto f = freeStreamedTraceFunction(init, t, params);
    const auto rhs = fpeRightHandSide(t, kTrace, init, *f, smallConfig(1, 100), params);
    ASSERT_FALSE(rhs.perOrderTerms.empty());
    EXPECT_EQ(rhs.perOrderTerms.front().order, -1);
    const Vec3 v = kTrace.p / params.massTrace;
    const Vec3 offset = kTrace.q - v * t - init.trace.center;
    const double sd2 = init.trace.positionSd * init.trace.positionSd;
    const double expected = dot(v, offset) / sd2 * init.trace.freeStreamed(kTrace, t, params.massTrace);
    EXPECT_NEAR(rhs.value, expected, 1e-7 * std::abs(expected));
}

TEST(Duhamel, AgreesWithCollisionTermOnSharedSamples) {
    const SphereParams params{};
    const auto init = InitialData::standard(params, 0.5);
    const auto f = freeStreamedTraceFunction(init, 1.0, params);
    const auto cmp = compareDuhamel(1.0, kTrace, init, *f, smallConfig(0, 3000), params, 16);
    EXPECT_NE(cmp.collision.value, 0.0);
    EXPECT_LE(std::abs(cmp.difference.mean), 1e-9 * std::abs(cmp.collision.value));
    EXPECT_LT(cmp.zScore(), 4.0);
}

TEST(Duhamel, RejectsBadArguments) {
    const SphereParams params{};
    const auto init = InitialData::standard(params);
    const auto f = freeStreamedTraceFunction(init, 1.0, params);
    EXPECT_THROW(duhamelFirstOrder(1.0, kTrace, init, *f, smallConfig(0, 10), params, 0), std::invalid_argument);
    EXPECT_THROW(duhamelFirstOrder(-1.0, kTrace, init, *f, smallConfig(0, 10), params), std::invalid_argument);
}

TEST(Functional, TimeZeroIsProductOfInitialFactors) {
    const SphereParams params{};
    const auto init = InitialData::standard(params, 0.3);
    const ClosedFormTraceFunction f{wave};
    const PhasePoint partner{{0.4, 0.2, -0.1}, {0.1, 0.2, 0.3}};
    const auto est = evalFunctional(1, 0.0, SystemState{kTrace, {partner}}, init, f, smallConfig(2, 100), params);
    const double expected = wave(kTrace) * init.env.alpha * init.env.oneBody(partner);
    EXPECT_NEAR(est.value, expected, 1e-15 * expected);
}

TEST(Functional, LoneTraceReturnsTraceFunction) {
    const SphereParams params{};
    const auto init = InitialData::standard(params, 0.3);
    const ClosedFormTraceFunction f{wave};
    const auto est = evalFunctional(0, 0.9, SystemState{kTrace, {}}, init, f, smallConfig(2, 500), params);
    EXPECT_NEAR(est.value, wave(kTrace), 1e-12);
}

TEST(AverageObservable, UnitObservableGivesTraceMass) {
    const SphereParams params{};
    const auto init = InitialData::standard(params);
    const double t = 0.6;
    const auto f = freeStreamedTraceFunction(init, t, params);
    const auto avg = averageObservable(0, t, [](const SystemState&) { return 1.0; }, init, *f, smallConfig(0, 500),
                                       params);
    EXPECT_NEAR(avg.value, 1.0, 1e-14);
}
