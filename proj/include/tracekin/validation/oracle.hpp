#pragma once

// Brute-force molecular dynamics ensemble for the trace marginal, and the
// matching bin integrals of the series.

#include <cstdint>
#include <vector>

#include "tracekin/estimate.hpp"
#include "tracekin/initial_data.hpp"
#include "tracekin/validation/config.hpp"

namespace tracekin::validation {

struct EnsembleConfig {
    int maxEnvCount = 40;
    long replicas = 100000;
    HistogramSpec grid{};
    std::uint64_t seed = 1;

    void validate() const;
    /// Weights proportional to (alpha V)^n / n! for n = 0..maxEnvCount, normalized.
    std::vector<double> numberLaw(const EnvFamily& env) const;
};

/// Histogram of the trace (q_x, p_x) with an overflow count for points
/// outside the grid. Bin values are probabilities, not densities.
struct TraceHistogram {
    HistogramSpec grid;
    std::vector<long> counts;  ///< row-major, position index outer
    long overflow = 0;
    long replicas = 0;
    long rejectedConfigurations = 0;
    long degenerateReplicas = 0;

    double probability(int bin) const;
    double stdError(int bin) const;
    /// Sum of bin counts plus overflow over the replica count.
    double totalMass() const;
};

/// Samples whole initial configurations (trace, env count from the number law,
/// env from f0) and rejects overlapping ones, evolves each for time t and bins
/// the trace. Throws std::runtime_error when more than half of the candidate
/// configurations are rejected. Degenerate trajectories are redrawn.
TraceHistogram mdOracleTraceHistogram(double t, const EnsembleConfig& ensemble, const InitialData& init,
                                      const SphereParams& params);

struct BinIntegral {
    std::vector<double> value;     ///< per bin, integral of F_{1+0}(t) over the bin and the other coordinates
    std::vector<double> stdError;
    double outside = 0.0;          ///< mass outside the grid
    long degenerateDiscards = 0;
};

/// Bin integrals of the series truncated at cfg.maxOrder, by outer Monte Carlo
/// over the trace point drawn from the free-streamed initial density.
BinIntegral seriesBinIntegrals(double t, const HistogramSpec& grid, const InitialData& init,
                               const TruncationConfig& cfg, long outerSamples, const SphereParams& params);

struct BinComparison {
    int bin = 0;
    double qCenter = 0.0;
    double pCenter = 0.0;
    double oracle = 0.0;
    double oracleError = 0.0;
    double series = 0.0;
    double seriesError = 0.0;
    double zScore = 0.0;
    bool occupied = false;
};

std::vector<BinComparison> compareBins(const TraceHistogram& oracle, const BinIntegral& series);

}  // namespace tracekin::validation
