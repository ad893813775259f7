#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tracekin {

struct TruncationConfig {
    int maxOrder = 2;              ///< series truncated at n <= maxOrder
    long samplesPerOrder = 20000;
    std::uint64_t seed = 1;
    int degenerateRetryLimit = 16;

    void validate() const;
};

struct TermEstimate {
    int order = 0;
    double value = 0.0;
    double stdError = 0.0;
};

struct MarginalEstimate {
    double value = 0.0;
    double stdError = 0.0;
    std::vector<TermEstimate> perOrderTerms;
    long degenerateDiscards = 0;
    bool retryWarning = false;  ///< more than 1% of samples were discarded

    /// Appends a term and updates value and stdError (quadrature).
    void add(const TermEstimate& term);
};

struct SampleSummary {
    double mean = 0.0;
    double stdError = 0.0;
    long count = 0;
};

/// Mean and standard error of the mean, summed in index order.
SampleSummary summarize(std::span<const double> values);

/// Standard error of mean(a - b) for paired samples.
SampleSummary summarizeDifference(std::span<const double> a, std::span<const double> b);

/// |a - b| / sqrt(seA^2 + seB^2). With both errors zero the values must agree
/// to 1e-12 relative, otherwise the score is infinite.
double combinedZScore(double a, double seA, double b, double seB);

}  // namespace tracekin
