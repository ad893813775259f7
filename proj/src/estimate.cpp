#include "tracekin/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tracekin/parallel.hpp"

namespace tracekin {

namespace {
std::atomic<unsigned> g_workers{0};
}

void setWorkerCount(unsigned workers) { g_workers.store(workers); }

unsigned workerCount() {
    const unsigned w = g_workers.load();
    if (w != 0) return w;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void TruncationConfig::validate() const {
    if (maxOrder < 0) throw std::invalid_argument{"maxOrder must be >= 0"};
    if (samplesPerOrder < 1) throw std::invalid_argument{"samplesPerOrder must be >= 1"};
    if (degenerateRetryLimit < 0) throw std::invalid_argument{"degenerateRetryLimit must be >= 0"};
}

void MarginalEstimate::add(const TermEstimate& term) {
    perOrderTerms.push_back(term);
    value = 0.0;
    double var = 0.0;
    for (const auto& t : perOrderTerms) {
        value += t.value;
        var += t.stdError * t.stdError;
    }
    stdError = std::sqrt(var);
}

SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.count = static_cast<long>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double n = static_cast<double>(values.size());
    s.stdError = std::sqrt(ss / (n - 1.0) / n);
    return s;
}

SampleSummary summarizeDifference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument{"paired samples differ in length"};
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return summarize(d);
}

double combinedZScore(double a, double seA, double b, double seB) {
    const double diff = std::abs(a - b);
    const double se = std::sqrt(seA * seA + seB * seB);
    if (se == 0.0)
        return diff <= 1e-12 * (std::abs(a) + std::abs(b)) ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / se;
}

}  // namespace tracekin
