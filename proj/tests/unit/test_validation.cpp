#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "quadrature.hpp"
#include "tracekin/parallel.hpp"
#include "tracekin/validation/acceptance.hpp"
#include "tracekin/validation/oracle.hpp"
#include "tracekin/validation/report.hpp"

using namespace tracekin;
using namespace tracekin::validation;

namespace {

std::string configErrorKey(const std::string& text) {
    try {
        parseConfig(text);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "";
}

double normalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Probability that the free-streamed trace lands in the (q_x, p_x) rectangle,
/// integrating the conditional position law over momentum with Gauss-Legendre.
double freeStreamedBinProbability(double qLo, double qHi, double pLo, double pHi, double t, double qSd, double pSd,
                                  double mass) {
    const auto rule = gen::gaussLegendre(48, pLo, pHi);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double p = rule.nodes[i];
        const double shift = p * t / mass;
        const double density = std::exp(-0.5 * p * p / (pSd * pSd)) / (pSd * std::sqrt(2.0 * std::numbers::pi));
        total += rule.weights[i] * density * (normalCdf((qHi - shift) / qSd) - normalCdf((qLo - shift) / qSd));
    }
    return total;
}

RunConfig smallRun() {
    RunConfig c;
    c.truncation.samplesPerOrder = 400;
    c.replicas = 3000;
    c.oracleSeriesSamples = 3000;
    c.checkPoints = 2;
    return c;
}

}  // namespace

TEST(Config, DefaultsValidateAndRoundTrip) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    const auto again = parseConfig(c.canonical());
    EXPECT_EQ(again.canonical(), c.canonical());
    EXPECT_EQ(again.hash(), c.hash());
    EXPECT_EQ(c.hash().size(), 16u);
}

TEST(Config, ParsesValues) {
    const auto c = parseConfig("sigma: 0.2\nalpha: 0.005\nmaxOrder: 1\nseed: 42\nhistogramMomentumBins: 4\n");
    EXPECT_EQ(c.params.sigma, 0.2);
    EXPECT_EQ(c.alpha, 0.005);
    EXPECT_EQ(c.truncation.maxOrder, 1);
    EXPECT_EQ(c.truncation.seed, 42u);
    EXPECT_EQ(c.histogram.momentum.bins, 4);
    EXPECT_NE(c.hash(), RunConfig{}.hash());
}

TEST(Config, ErrorsNameTheOffendingKey) {
    EXPECT_EQ(configErrorKey("sigmaa: 0.1\n"), "sigmaa");
    EXPECT_EQ(configErrorKey("alpha: dense\n"), "alpha");
    EXPECT_EQ(configErrorKey("maxOrder: [1, 2]\n"), "maxOrder");
    EXPECT_EQ(configErrorKey("sigma: -1\n"), "sigma");
    EXPECT_EQ(configErrorKey("histogramPositionBins: 0\n"), "histogramPositionBins");
    EXPECT_EQ(configErrorKey("histogramMomentumMin: 5\nhistogramMomentumMax: 1\n").rfind("histogramMomentum", 0), 0u);
    EXPECT_EQ(configErrorKey("samplesPerOrder: 1.5\n"), "samplesPerOrder");
}

TEST(Config, MissingFileThrows) { EXPECT_ANY_THROW(loadConfig("/nonexistent/run.yaml")); }

TEST(Oracle, NumberLawIsNormalizedTruncatedPoisson) {
    const auto init = RunConfig{}.initialData();
    EnsembleConfig e;
    e.maxEnvCount = 40;
    const auto w = e.numberLaw(init.env);
    ASSERT_EQ(w.size(), 41u);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-14);
    const double mean = init.env.alpha * init.env.boxVolume();
    for (int n = 1; n <= 20; ++n) EXPECT_NEAR(w[n] / w[n - 1], mean / n, 1e-10 * mean / n);
}

TEST(Oracle, VacuumHistogramMatchesFreeStreamedGaussian) {
    auto init = RunConfig{}.initialData();
    init.env.vacuum = true;
    const SphereParams params;
    EnsembleConfig e;
    e.replicas = 40000;
    e.seed = 3;
    for (double t : {0.0, 1.0}) {
        const auto h = mdOracleTraceHistogram(t, e, init, params);
        EXPECT_EQ(h.totalMass(), 1.0);
        EXPECT_EQ(h.rejectedConfigurations, 0);
        int outliers = 0;
        for (int b = 0; b < e.grid.binCount(); ++b) {
            const int i = b / e.grid.momentum.bins;
            const int j = b % e.grid.momentum.bins;
            const double qLo = e.grid.position.min + i * e.grid.position.width();
            const double pLo = e.grid.momentum.min + j * e.grid.momentum.width();
            const double expected =
                freeStreamedBinProbability(qLo, qLo + e.grid.position.width(), pLo, pLo + e.grid.momentum.width(), t,
                                           init.trace.positionSd, init.trace.momentumSd, params.massTrace);
            const double se = std::sqrt(expected * (1.0 - expected) / e.replicas);
            if (std::abs(h.probability(b) - expected) > 4.0 * se + 1e-12) ++outliers;
        }
        EXPECT_EQ(outliers, 0) << "t = " << t;
    }
}

TEST(Oracle, InteractingMassIsExactlyOne) {
    const auto init = RunConfig{}.initialData();
    EnsembleConfig e;
    e.replicas = 2000;
    const auto h = mdOracleTraceHistogram(1.0, e, init, SphereParams{});
    EXPECT_NEAR(h.totalMass(), 1.0, 1e-12);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0L) + h.overflow, e.replicas);
}

TEST(Oracle, OverdenseEnsembleThrows) {
    const auto init = InitialData::standard(SphereParams{0.5, 1.0, 1.0}, 0.5, 3.0, 1.0);
    EnsembleConfig e;
    e.replicas = 50;
    e.maxEnvCount = 40;
    EXPECT_THROW(mdOracleTraceHistogram(0.0, e, init, SphereParams{0.5, 1.0, 1.0}), std::runtime_error);
}

TEST(Oracle, SeriesBinsAtTimeZeroMatchInitialGaussian) {
    auto init = RunConfig{}.initialData();
    init.env.vacuum = true;
    TruncationConfig cfg;
    cfg.maxOrder = 0;
    const HistogramSpec grid;
    const auto bins = seriesBinIntegrals(0.0, grid, init, cfg, 20000, SphereParams{});
    const double mass = std::accumulate(bins.value.begin(), bins.value.end(), 0.0) + bins.outside;
    EXPECT_NEAR(mass, 1.0, 1e-12);
    const double w = grid.position.width();
    const double expected = freeStreamedBinProbability(0.0, w, 0.0, w, 0.0, 1.0, 1.0, 1.0);
    const int b = grid.position.index(0.5 * w) * grid.momentum.bins + grid.momentum.index(0.5 * w);
    EXPECT_NEAR(bins.value[b], expected, 4.0 * bins.stdError[b]);
}

TEST(Report, CsvQuotesAndFormatsNumbers) {
    const Table t{{"a", "b"}, {{"x,y", formatNumber(0.1)}, {"say \"hi\"", formatNumber(1.0)}}};
    EXPECT_EQ(toCsv(t), "a,b\n\"x,y\",0.10000000000000001\n\"say \"\"hi\"\"\",1\n");
}

TEST(Report, JsonHasSchemaAndNoTimings) {
    RunReport r;
    r.command = "validate";
    r.configHash = RunConfig{}.hash();
    CriterionResult c;
    c.id = 1;
    c.name = "x";
    c.passed = true;
    c.seconds = 12.5;
    r.criteria.push_back(c);
    const auto json = reportJson(r);
    EXPECT_NE(json.find("\"schemaVersion\": 1"), std::string::npos);
    EXPECT_EQ(json.find("12.5"), std::string::npos);
    EXPECT_TRUE(r.allPassed());
    r.criteria[0].budgetSeconds = 1.0;
    EXPECT_FALSE(r.allPassed());
}

TEST(Acceptance, CriterionLookup) {
    auto c = smallRun();
    c.truncation.samplesPerOrder = 2;
    CriterionResult r = runCriterion(1, c);
    EXPECT_EQ(r.name, criterionName(1));
    EXPECT_TRUE(r.acceptable());
    EXPECT_THROW(runCriterion(99, c), std::invalid_argument);
}

TEST(Acceptance, HighDensityTermDecayIsDiagnosticOnly) {
    auto c = smallRun();
    c.alpha = 0.5;
    const auto r = runCriterion(6, c);
    EXPECT_TRUE(r.diagnostic);
    EXPECT_TRUE(r.passed || r.diagnostic);
}

TEST(Acceptance, ReportsAreByteIdenticalAcrossWorkerCounts) {
    auto c = smallRun();
    const std::vector<int> ids{1, 2, 5, 8, 10};
    c.workers = 1;
    const auto serial = runAcceptanceSuite(c, "validate", ids);
    c.workers = 3;
    const auto parallel = runAcceptanceSuite(c, "validate", ids);
    setWorkerCount(0);
    EXPECT_EQ(serial.configHash, parallel.configHash);
    ASSERT_EQ(serial.criteria.size(), parallel.criteria.size());
    for (std::size_t i = 0; i < serial.criteria.size(); ++i)
        EXPECT_EQ(toCsv(serial.criteria[i].table), toCsv(parallel.criteria[i].table)) << serial.criteria[i].id;
    EXPECT_EQ(reportJson(serial), reportJson(parallel));
}
