#include "tracekin/validation/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "../sampling.hpp"
#include "tracekin/dynamics.hpp"
#include "tracekin/parallel.hpp"
#include "tracekin/series.hpp"

namespace tracekin::validation {

using detail::StreamTag;
using detail::tag;

namespace {

constexpr int kAttemptsPerReplica = 64;

int binOf(const HistogramSpec& grid, const PhasePoint& x) {
    const int i = grid.position.index(x.q.x);
    const int j = grid.momentum.index(x.p.x);
    if (i < 0 || j < 0) return -1;
    return i * grid.momentum.bins + j;
}

int drawCount(const std::vector<double>& cdf, Rng& rng) {
    const double u = uniform01(rng);
    for (std::size_t n = 0; n < cdf.size(); ++n)
        if (u < cdf[n]) return static_cast<int>(n);
    return static_cast<int>(cdf.size()) - 1;
}

struct ReplicaOutcome {
    int bin = -1;
    int rejected = 0;
    int degenerate = 0;
};

}  // namespace

void EnsembleConfig::validate() const {
    if (maxEnvCount < 0) throw std::invalid_argument{"maxEnvCount must be >= 0"};
    if (replicas < 1) throw std::invalid_argument{"replicas must be >= 1"};
    if (grid.position.bins < 1 || grid.momentum.bins < 1) throw std::invalid_argument{"histogram needs bins"};
}

std::vector<double> EnsembleConfig::numberLaw(const EnvFamily& env) const {
    std::vector<double> w(static_cast<std::size_t>(maxEnvCount) + 1, 0.0);
    if (env.vacuum) {
        w[0] = 1.0;
        return w;
    }
    const double logMean = std::log(env.alpha * env.boxVolume());
    double maxLog = -INFINITY;
    for (int n = 0; n <= maxEnvCount; ++n) maxLog = std::max(maxLog, n * logMean - std::lgamma(n + 1.0));
    double total = 0.0;
    for (int n = 0; n <= maxEnvCount; ++n) {
        w[static_cast<std::size_t>(n)] = std::exp(n * logMean - std::lgamma(n + 1.0) - maxLog);
        total += w[static_cast<std::size_t>(n)];
    }
    for (auto& x : w) x /= total;
    return w;
}

double TraceHistogram::probability(int bin) const {
    return static_cast<double>(counts.at(static_cast<std::size_t>(bin))) / static_cast<double>(replicas);
}

double TraceHistogram::stdError(int bin) const {
    const double p = probability(bin);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(replicas));
}

double TraceHistogram::totalMass() const {
    long total = overflow;
    for (long c : counts) total += c;
    return static_cast<double>(total) / static_cast<double>(replicas);
}

TraceHistogram mdOracleTraceHistogram(double t, const EnsembleConfig& ensemble, const InitialData& init,
                                      const SphereParams& params) {
    ensemble.validate();
    const auto law = ensemble.numberLaw(init.env);
    std::vector<double> cdf(law.size());
    double running = 0.0;
    for (std::size_t n = 0; n < law.size(); ++n) cdf[n] = (running += law[n]);

    const auto outcomes = parallelMap(static_cast<std::size_t>(ensemble.replicas), [&](std::size_t i) {
        ReplicaOutcome out;
        for (int attempt = 0; attempt < kAttemptsPerReplica; ++attempt) {
            auto rng = makeRng(ensemble.seed, {tag(StreamTag::Oracle), i, static_cast<std::uint64_t>(attempt)});
            SystemState state;
            state.trace = init.trace.sample(rng);
            const int n = drawCount(cdf, rng);
            for (int k = 0; k < n; ++k) {
                const Vec3 q = init.env.samplePosition(rng);
                state.env.push_back({q, init.env.sampleMomentum(rng)});
            }
            if (!isAllowedConfiguration(state, params)) {
                ++out.rejected;
                continue;
            }
            const auto evolved = flow(state, t, params);
            if (evolved.degenerate) {
                ++out.degenerate;
                continue;
            }
            out.bin = binOf(ensemble.grid, evolved.finalState.trace);
            return out;
        }
        throw std::runtime_error("oracle: no admissible configuration after repeated draws");
    });

    TraceHistogram h;
    h.grid = ensemble.grid;
    h.counts.assign(static_cast<std::size_t>(ensemble.grid.binCount()), 0);
    h.replicas = ensemble.replicas;
    for (const auto& o : outcomes) {
        if (o.bin < 0)
            ++h.overflow;
        else
            ++h.counts[static_cast<std::size_t>(o.bin)];
        h.rejectedConfigurations += o.rejected;
        h.degenerateReplicas += o.degenerate;
    }
    const double candidates = static_cast<double>(h.rejectedConfigurations + h.replicas);
    if (static_cast<double>(h.rejectedConfigurations) > 0.5 * candidates)
        throw std::runtime_error("oracle: more than half of the initial configurations overlap; "
                                 "density too high for the box");
    return h;
}

BinIntegral seriesBinIntegrals(double t, const HistogramSpec& grid, const InitialData& init,
                               const TruncationConfig& cfg, long outerSamples, const SphereParams& params) {
    cfg.validate();
    if (outerSamples < 2) throw std::invalid_argument{"seriesBinIntegrals needs at least two samples"};
    struct Draw {
        int bin = -1;
        double value = 0.0;
        bool discarded = false;
    };
    const auto draws = parallelMap(static_cast<std::size_t>(outerSamples), [&](std::size_t j) {
        for (int retry = 0; retry <= cfg.degenerateRetryLimit; ++retry) {
            auto rng = makeRng(cfg.seed, {tag(StreamTag::Oracle), 2, j, static_cast<std::uint64_t>(retry)});
            const PhasePoint x = init.trace.sampleFreeStreamed(rng, t, params.massTrace);
            const double g = init.trace.freeStreamed(x, t, params.massTrace);
            const auto f = sampleMarginalSeries(0, t, SystemState{x, {}}, init, cfg.maxOrder, rng(), params);
            if (!f) continue;
            return Draw{binOf(grid, x), *f / g, false};
        }
        return Draw{-1, 0.0, true};
    });

    const auto bins = static_cast<std::size_t>(grid.binCount());
    std::vector<double> sum(bins, 0.0);
    std::vector<double> sumSq(bins, 0.0);
    BinIntegral result;
    double outside = 0.0;
    long kept = 0;
    for (const auto& d : draws) {
        if (d.discarded) {
            ++result.degenerateDiscards;
            continue;
        }
        ++kept;
        if (d.bin < 0) {
            outside += d.value;
            continue;
        }
        sum[static_cast<std::size_t>(d.bin)] += d.value;
        sumSq[static_cast<std::size_t>(d.bin)] += d.value * d.value;
    }
    const double n = static_cast<double>(kept);
    result.value.resize(bins);
    result.stdError.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double mean = sum[b] / n;
        const double var = std::max(0.0, (sumSq[b] / n - mean * mean) * n / (n - 1.0));
        result.value[b] = mean;
        result.stdError[b] = std::sqrt(var / n);
    }
    result.outside = outside / n;
    return result;
}

std::vector<BinComparison> compareBins(const TraceHistogram& oracle, const BinIntegral& series) {
    const int bins = oracle.grid.binCount();
    if (static_cast<int>(series.value.size()) != bins) throw std::invalid_argument{"compareBins: grid mismatch"};
    std::vector<BinComparison> out;
    for (int b = 0; b < bins; ++b) {
        BinComparison c;
        c.bin = b;
        const int i = b / oracle.grid.momentum.bins;
        const int j = b % oracle.grid.momentum.bins;
        c.qCenter = oracle.grid.position.min + (i + 0.5) * oracle.grid.position.width();
        c.pCenter = oracle.grid.momentum.min + (j + 0.5) * oracle.grid.momentum.width();
        c.oracle = oracle.probability(b);
        c.oracleError = oracle.stdError(b);
        c.series = series.value[static_cast<std::size_t>(b)];
        c.seriesError = series.stdError[static_cast<std::size_t>(b)];
        c.occupied = oracle.counts[static_cast<std::size_t>(b)] > 0;
        c.zScore = combinedZScore(c.oracle, c.oracleError, c.series, c.seriesError);
        out.push_back(c);
    }
    return out;
}

}  // namespace tracekin::validation
