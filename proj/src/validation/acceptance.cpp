#include "tracekin/validation/acceptance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "../sampling.hpp"
#include "tracekin/dynamics.hpp"
#include "tracekin/fpe.hpp"
#include "tracekin/operators.hpp"
#include "tracekin/parallel.hpp"
#include "tracekin/series.hpp"
#include "tracekin/validation/oracle.hpp"
#include "tracekin/validation/report.hpp"

namespace tracekin::validation {

using detail::StreamTag;
using detail::tag;

namespace {

constexpr double kZLimit = 3.0;

std::string num(double v) { return formatNumber(v); }
std::string yes(bool b) { return b ? "true" : "false"; }

Rng criterionRng(const RunConfig& c, int id, std::uint64_t part = 0) {
    return makeRng(c.truncation.seed, {tag(StreamTag::Configurations), static_cast<std::uint64_t>(id), part});
}

/// Allowed state with `env` environment particles uniform in a cube of side
/// `side` around the origin, Gaussian momenta.
SystemState randomState(Rng& rng, int env, const SphereParams& params, double side, double momentumSd) {
    std::uniform_real_distribution<double> u{-0.5 * side, 0.5 * side};
    while (true) {
        SystemState s;
        s.trace = {{u(rng), u(rng), u(rng)}, gaussianVec(rng, momentumSd)};
        for (int i = 0; i < env; ++i) {
            const Vec3 q{u(rng), u(rng), u(rng)};
            s.env.push_back({q, gaussianVec(rng, momentumSd)});
        }
        if (isAllowedConfiguration(s, params)) return s;
    }
}

double coordinateDistance(const SystemState& a, const SystemState& b) {
    auto diff = [](const PhasePoint& x, const PhasePoint& y) {
        const Vec3 dq = x.q - y.q;
        const Vec3 dp = x.p - y.p;
        return std::max({std::abs(dq.x), std::abs(dq.y), std::abs(dq.z), std::abs(dp.x), std::abs(dp.y),
                         std::abs(dp.z)});
    };
    double m = diff(a.trace, b.trace);
    for (std::size_t i = 0; i < a.env.size(); ++i) m = std::max(m, diff(a.env[i], b.env[i]));
    return m;
}

double testFunction(const SystemState& z) {
    double v = std::cos(z.trace.q.x - 0.5 * z.trace.p.y) + 0.3 * z.trace.p.z;
    for (std::size_t i = 0; i < z.env.size(); ++i)
        v *= 1.0 + 0.2 * std::sin(z.env[i].q.y + (static_cast<double>(i) + 1.0) * z.env[i].p.x);
    return v;
}

double cube(double x) { return x * x * x; }

/// Partner of the trace placed at a random offset outside the contact distance.
PhasePoint nearbyPartner(Rng& rng, const PhasePoint& trace, const SphereParams& params, const InitialData& init) {
    const double lo = params.sigma;
    const double hi = 4.0 * params.sigma;
    const double r = std::cbrt(cube(lo) + uniform01(rng) * (cube(hi) - cube(lo)));
    return {trace.q + uniformOnSphere(rng) * r, init.env.sampleMomentum(rng)};
}

CriterionResult collisionTransforms(const RunConfig& c) {
    CriterionResult r;
    auto rng = criterionRng(c, 1);
    std::uniform_real_distribution<double> mass{0.1, 10.0};
    double momentum = 0.0;
    double energy = 0.0;
    double involution = 0.0;
    const long count = 100000;
    for (long i = 0; i < count; ++i) {
        const SphereParams params{c.params.sigma, mass(rng), mass(rng)};
        const Vec3 p = gaussianVec(rng, 2.0);
        const Vec3 p1 = gaussianVec(rng, 2.0);
        const Vec3 eta = uniformOnSphere(rng);
        const auto [a, b] = traceEnvTransform(p, p1, eta, params);
        const double scale = norm(p) + norm(p1);
        momentum = std::max(momentum, norm(a + b - p - p1) / scale);
        const double e0 = norm2(p) / (2 * params.massTrace) + norm2(p1) / (2 * params.massEnv);
        const double e1 = norm2(a) / (2 * params.massTrace) + norm2(b) / (2 * params.massEnv);
        energy = std::max(energy, std::abs(e1 - e0) / e0);
        const auto [a2, b2] = traceEnvTransform(a, b, eta, params);
        involution = std::max(involution, (norm(a2 - p) + norm(b2 - p1)) / scale);
    }
    const double momentumTol = 4.0 * std::numeric_limits<double>::epsilon();
    r.passed = momentum <= momentumTol && energy <= 1e-12 && involution <= 1e-12;
    r.summary = fmt::format("{} transforms: max momentum {:.3g}, energy {:.3g}, involution {:.3g}", count, momentum,
                            energy, involution);
    r.table = {{"quantity", "maxRelativeResidual", "tolerance"},
               {{"momentum", num(momentum), num(momentumTol)},
                {"energy", num(energy), num(1e-12)},
                {"involution", num(involution), num(1e-12)}}};
    return r;
}

CriterionResult flowCorrectness(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const double side = 3.0 * params.sigma;
    struct Row {
        int env = 0;
        bool degenerate = false;
        int collisions = 0;
        double reversibility = 0.0;
        double groupLaw = 0.0;
    };
    const long count = 1000;
    const auto rows = parallelMap(static_cast<std::size_t>(count), [&](std::size_t i) {
        auto rng = criterionRng(c, 2, i);
        Row row;
        row.env = 1 + static_cast<int>(i % 4);
        const auto s = randomState(rng, row.env, params, side, 1.0);
        std::uniform_real_distribution<double> time{0.1, 1.0};
        const double t1 = time(rng);
        const double t2 = time(rng);
        const auto a = flow(s, -t1, params);
        const auto back = a.degenerate ? a : flow(a.finalState, t1, params);
        const auto ab = a.degenerate ? a : flow(a.finalState, -t2, params);
        const auto direct = flow(s, -t1 - t2, params);
        if (a.degenerate || back.degenerate || ab.degenerate || direct.degenerate) {
            row.degenerate = true;
            return row;
        }
        row.collisions = static_cast<int>(direct.collisionCount);
        row.reversibility = coordinateDistance(back.finalState, s);
        row.groupLaw = coordinateDistance(ab.finalState, direct.finalState);
        return row;
    });
    double rev = 0.0;
    double group = 0.0;
    long used = 0;
    long collided = 0;
    for (const auto& row : rows) {
        if (row.degenerate) continue;
        ++used;
        collided += row.collisions > 0;
        rev = std::max(rev, row.reversibility);
        group = std::max(group, row.groupLaw);
    }
    r.passed = used > count / 2 && rev <= 1e-9 && group <= 1e-9;
    r.summary = fmt::format("{} non-degenerate states ({} with collisions): reversibility {:.3g}, group law {:.3g}",
                            used, collided, rev, group);
    r.table = {{"quantity", "value", "tolerance"},
               {{"states", std::to_string(used), ""},
                {"statesWithCollisions", std::to_string(collided), ""},
                {"degenerate", std::to_string(count - used), ""},
                {"reversibility", num(rev), num(1e-9)},
                {"groupLaw", num(group), num(1e-9)}}};
    return r;
}

CriterionResult cumulantIdentities(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const double side = 6.0 * params.sigma;
    const double t = std::abs(c.time) > 0.0 ? std::abs(c.time) : 1.0;
    r.table.header = {"check", "order", "evaluated", "maxResidual", "tolerance", "passed"};
    bool ok = true;

    for (int n = 1; n <= 3; ++n) {
        auto rng = criterionRng(c, 3, static_cast<std::uint64_t>(n));
        double worst = 0.0;
        const int count = 200;
        for (int i = 0; i < count; ++i) {
            const auto s = randomState(rng, 1 + n, params, side, 1.0);
            const SystemState block{s.trace, {s.env[0]}};
            const std::vector<PhasePoint> free(s.env.begin() + 1, s.env.end());
            worst = std::max(worst, std::abs(cumulantApply(n, 0.0, testFunction, block, free, params).value));
        }
        const bool pass = worst == 0.0;
        ok = ok && pass;
        r.table.rows.push_back({"timeZero", std::to_string(n), std::to_string(count), num(worst), "0", yes(pass)});
    }

    for (int n = 0; n <= 2; ++n) {
        auto rng = criterionRng(c, 3, 10 + static_cast<std::uint64_t>(n));
        std::vector<SystemState> samples;
        for (int i = 0; i < 1000; ++i) samples.push_back(randomState(rng, 1 + n, params, side, 1.0));
        const auto report = verifyClusterInversion(n, t, testFunction, samples, 1, params);
        const bool pass = report.evaluated > 0 && report.maxResidual <= 1e-9;
        ok = ok && pass;
        r.table.rows.push_back({"inversion", std::to_string(n), std::to_string(report.evaluated),
                                num(report.maxResidual), num(1e-9), yes(pass)});
    }

    {
        auto rng = criterionRng(c, 3, 20);
        double worst = 0.0;
        long evaluated = 0;
        const Vec3 far{50.0, 0.0, 0.0};
        for (int i = 0; i < 1000; ++i) {
            auto s = randomState(rng, 2, params, side, 1.0);
            s.env[1].q += far;
            const SystemState block{s.trace, {s.env[0]}};
            const auto v = cumulantApply(1, t, testFunction, block, std::span(s.env).subspan(1), params);
            if (v.degenerate) continue;
            ++evaluated;
            worst = std::max(worst, std::abs(v.value));
        }
        const bool pass = evaluated > 0 && worst <= 1e-12;
        ok = ok && pass;
        r.table.rows.push_back(
            {"separated", "1", std::to_string(evaluated), num(worst), num(1e-12), yes(pass)});
    }
    r.passed = ok;
    r.summary = "cumulants vanish at t=0, invert to the group for n<=2, vanish for a separated particle";
    return r;
}

CriterionResult kineticRecurrence(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    auto init = c.initialData();
    init.env.exclusion = false;
    const double t = std::abs(c.time) > 0.0 ? std::abs(c.time) : 1.0;
    const double side = 6.0 * params.sigma;
    r.table.header = {"s", "n", "evaluated", "degenerate", "maxResidual", "tolerance", "passed"};
    bool ok = true;
    for (int s = 0; s <= 1; ++s) {
        for (int n = 0; n <= 1; ++n) {
            auto rng = criterionRng(c, 4, static_cast<std::uint64_t>(10 * s + n));
            std::vector<SystemState> samples;
            for (int i = 0; i < 1000; ++i)
                samples.push_back(randomState(rng, s + n, params, side, init.env.momentumSd));
            const auto report = verifyRecurrence(n, s, t, samples, init, params);
            ok = ok && report.passed();
            r.table.rows.push_back({std::to_string(s), std::to_string(n), std::to_string(report.evaluated),
                                    std::to_string(report.degenerate), num(report.maxResidual),
                                    num(report.tolerance), yes(report.passed())});
        }
    }
    r.passed = ok;
    r.summary = "relative pointwise residual of the kinetic cluster recurrence, factorized data";
    return r;
}

CriterionResult initialDataConsistency(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const auto init = c.initialData();
    auto cfg = c.truncation;
    cfg.samplesPerOrder = std::min<long>(cfg.samplesPerOrder, 2000);
    r.table.header = {"s", "point", "estimate", "stdError", "expected", "relativeResidual"};
    bool ok = true;
    double worst = 0.0;
    for (int s = 0; s <= 2; ++s) {
        auto rng = criterionRng(c, 5, static_cast<std::uint64_t>(s));
        for (int k = 0; k < 5; ++k) {
            const auto state = randomState(rng, s, params, 6.0 * params.sigma, 1.0);
            const auto est = evalMarginalSeries(s, 0.0, state, init, cfg, params);
            double expected = init.trace(state.trace) * init.env.density(state.env, params.sigma);
            for (const auto& x : state.env)
                if (!pairAllowed(state.trace.q, x.q, params.sigma)) expected = 0.0;
            const double residual = std::abs(est.value - expected) / std::max(std::abs(expected), 1e-300);
            worst = std::max(worst, residual);
            ok = ok && residual <= 1e-12 && est.stdError == 0.0;
            r.table.rows.push_back({std::to_string(s), std::to_string(k), num(est.value), num(est.stdError),
                                    num(expected), num(residual)});
        }
    }
    r.passed = ok;
    r.summary = fmt::format("series at t=0 against factorized initial data, worst relative residual {:.3g}", worst);
    return r;
}

CriterionResult termDecay(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const auto init = c.initialData();
    auto cfg = c.truncation;
    cfg.maxOrder = 3;
    const double t = c.time;
    const auto traceF = freeStreamedTraceFunction(init, t, params);
    r.table.header = {"family", "order", "norm", "stdError", "ratioToPrevious"};
    bool decays = true;
    for (int family = 0; family < 2; ++family) {
        double previous = 0.0;
        for (int n = 0; n <= 3; ++n) {
            const auto term = family == 0 ? termNormEstimate(n, t, init, cfg, params)
                                          : collisionTermNorm(n, t, init, *traceF, cfg, params);
            const double ratio = n == 0 ? 0.0 : term.value / previous;
            if (n > 0) decays = decays && previous > 0.0 && term.value < previous && ratio < 0.5;
            r.table.rows.push_back({family == 0 ? "series" : "collisionIntegral", std::to_string(n),
                                    num(term.value), num(term.stdError), n == 0 ? "" : num(ratio)});
            previous = term.value;
        }
    }
    r.passed = decays;
    r.diagnostic = c.alpha >= std::exp(-1.0);
    r.summary = fmt::format("per-order L1 norms for n <= 3 {} with every ratio below 0.5{}",
                            decays ? "decrease" : "do not all decrease",
                            r.diagnostic ? "; alpha outside the convergence regime, diagnostic only" : "");
    return r;
}

CriterionResult derivativeIdentity(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const auto init = c.initialData();
    const double base = std::abs(c.time) > 0.0 ? std::abs(c.time) : 1.0;
    auto rng = criterionRng(c, 7);
    r.table.header = {"point", "t", "qx", "qy", "qz", "px", "py", "pz", "finiteDifference", "fdStdError",
                      "collisionTerm", "collisionStdError", "zScore"};
    int within = 0;
    for (int k = 0; k < c.checkPoints; ++k) {
        const double t = base * (0.5 + uniform01(rng));
        const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
        auto cfg = c.truncation;
        cfg.seed = streamSeed(c.truncation.seed, {tag(StreamTag::Derivative), static_cast<std::uint64_t>(k)});
        const auto d = derivativeCheck(t, x, init, cfg, params, c.derivativeStep);
        const double z = d.zScore();
        within += z <= kZLimit;
        r.table.rows.push_back({std::to_string(k), num(t), num(x.q.x), num(x.q.y), num(x.q.z), num(x.p.x),
                                num(x.p.y), num(x.p.z), num(d.finiteDifference), num(d.fdStdError),
                                num(d.collisionTerm), num(d.collisionStdError), num(z)});
    }
    r.passed = within == c.checkPoints;
    r.summary = fmt::format("{}/{} points with |z| <= 3 at N = {}", within, c.checkPoints, c.truncation.maxOrder);
    return r;
}

CriterionResult functionalEquivalence(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const auto init = c.initialData();
    const double t = std::abs(c.time) > 0.0 ? std::abs(c.time) : 1.0;
    auto cfg = c.truncation;
    cfg.maxOrder = std::min(cfg.maxOrder, 1);
    const SeriesTraceFunction traceF(t, init, cfg.maxOrder, params);
    auto rng = criterionRng(c, 8);
    r.table.header = {"point", "functional", "functionalStdError", "series", "seriesStdError", "zScore"};
    int within = 0;
    const int points = 20;
    for (int k = 0; k < points; ++k) {
        const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
        const SystemState args{x, {nearbyPartner(rng, x, params, init)}};
        auto local = cfg;
        local.seed = streamSeed(c.truncation.seed, {tag(StreamTag::Functional), static_cast<std::uint64_t>(k)});
        const auto f = evalFunctional(1, t, args, init, traceF, local, params);
        const auto s = evalMarginalSeries(1, t, args, init, local, params);
        const double z = combinedZScore(f.value, f.stdError, s.value, s.stdError);
        within += z <= kZLimit;
        r.table.rows.push_back(
            {std::to_string(k), num(f.value), num(f.stdError), num(s.value), num(s.stdError), num(z)});
    }
    r.passed = within == points;
    r.summary = fmt::format("{}/{} configurations with |z| <= 3 at N = {}", within, points, cfg.maxOrder);
    return r;
}

CriterionResult duhamelConsistency(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const auto init = c.initialData();
    const double t = std::abs(c.time) > 0.0 ? std::abs(c.time) : 1.0;
    const auto traceF = freeStreamedTraceFunction(init, t, params);
    auto rng = criterionRng(c, 9);
    auto cfg = c.truncation;
    cfg.maxOrder = 0;
    r.table.header = {"point", "duhamel", "duhamelStdError", "collision", "collisionStdError",
                      "pairedDifference", "pairedStdError", "zScore"};
    int within = 0;
    const int points = 5;
    for (int k = 0; k < points; ++k) {
        const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
        const auto cmp = compareDuhamel(t, x, init, *traceF, cfg, params, 64);
        const double z = cmp.zScore();
        within += z <= kZLimit;
        r.table.rows.push_back({std::to_string(k), num(cmp.duhamel.value), num(cmp.duhamel.stdError),
                                num(cmp.collision.value), num(cmp.collision.stdError), num(cmp.difference.mean),
                                num(cmp.difference.stdError), num(z)});
    }
    r.passed = within == points;
    r.summary = fmt::format("{}/{} points with |z| <= 3 on shared samples", within, points);
    return r;
}

CriterionResult oracleCrossValidation(const RunConfig& c) {
    CriterionResult r;
    const SphereParams& params = c.params;
    const auto init = c.initialData();
    const double t = c.time;
    EnsembleConfig ensemble;
    ensemble.maxEnvCount = c.maxEnvCount;
    ensemble.replicas = c.replicas;
    ensemble.grid = c.histogram;
    ensemble.seed = c.truncation.seed;
    const auto hist = mdOracleTraceHistogram(t, ensemble, init, params);
    auto cfg = c.truncation;
    cfg.maxOrder = std::min(cfg.maxOrder, 2);
    const auto series = seriesBinIntegrals(t, c.histogram, init, cfg, c.oracleSeriesSamples, params);
    const auto bins = compareBins(hist, series);

    r.table.header = {"bin", "qCenter", "pCenter", "oracle", "oracleStdError", "series", "seriesStdError", "zScore",
                      "occupied"};
    int occupied = 0;
    int within = 0;
    for (const auto& b : bins) {
        if (b.occupied) {
            ++occupied;
            within += b.zScore <= kZLimit;
        }
        r.table.rows.push_back({std::to_string(b.bin), num(b.qCenter), num(b.pCenter), num(b.oracle),
                                num(b.oracleError), num(b.series), num(b.seriesError), num(b.zScore),
                                yes(b.occupied)});
    }
    const double mass = hist.totalMass();
    const double fraction = occupied > 0 ? static_cast<double>(within) / occupied : 0.0;
    r.passed = occupied > 0 && fraction >= 0.9 && std::abs(mass - 1.0) <= 1e-12;
    r.summary = fmt::format("{}/{} occupied bins with |z| <= 3 ({:.1f}%), oracle mass {:.17g}, {} rejected draws",
                            within, occupied, 100.0 * fraction, mass, hist.rejectedConfigurations);
    return r;
}

struct CriterionInfo {
    int id;
    const char* name;
    double budget;
    CriterionResult (*run)(const RunConfig&);
};

const std::vector<CriterionInfo>& registry() {
    static const std::vector<CriterionInfo> list{
        {1, "collision transforms", 1.0, collisionTransforms},
        {2, "flow correctness", 30.0, flowCorrectness},
        {3, "cumulant identities", 120.0, cumulantIdentities},
        {4, "kinetic cluster recurrence", 300.0, kineticRecurrence},
        {5, "series and initial data", 300.0, initialDataConsistency},
        {6, "term decay", 600.0, termDecay},
        {7, "derivative identity", 1200.0, derivativeIdentity},
        {8, "functional equivalence", 900.0, functionalEquivalence},
        {9, "duhamel first order", 300.0, duhamelConsistency},
        {10, "oracle cross-validation", 1800.0, oracleCrossValidation},
    };
    return list;
}

const CriterionInfo& info(int id) {
    for (const auto& i : registry())
        if (i.id == id) return i;
    throw std::invalid_argument{fmt::format("unknown acceptance criterion {}", id)};
}

}  // namespace

std::vector<int> acceptanceCriteria() {
    std::vector<int> ids;
    for (const auto& i : registry()) ids.push_back(i.id);
    return ids;
}

std::string criterionName(int id) { return info(id).name; }

CriterionResult runCriterion(int id, const RunConfig& config) {
    const auto& entry = info(id);
    const auto start = std::chrono::steady_clock::now();
    auto result = entry.run(config);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.id = id;
    result.name = entry.name;
    result.budgetSeconds = entry.budget;
    return result;
}

RunReport runAcceptanceSuite(const RunConfig& config, const std::string& command, const std::vector<int>& only,
                             const std::function<void(const CriterionResult&)>& onResult) {
    config.validate();
    setWorkerCount(config.workers);
    RunReport report;
    report.command = command;
    report.configHash = config.hash();
    report.canonicalConfig = config.canonical();
    for (int id : only.empty() ? acceptanceCriteria() : only) {
        report.criteria.push_back(runCriterion(id, config));
        if (onResult) onResult(report.criteria.back());
    }
    return report;
}

RunReport runAcceptanceSuite(const std::string& configPath, const std::string& command, const std::vector<int>& only,
                             const std::function<void(const CriterionResult&)>& onResult) {
    return runAcceptanceSuite(loadConfig(configPath), command, only, onResult);
}

}  // namespace tracekin::validation
