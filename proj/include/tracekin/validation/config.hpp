#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "tracekin/estimate.hpp"
#include "tracekin/initial_data.hpp"
#include "tracekin/model.hpp"

namespace tracekin::validation {

/// Thrown for malformed configuration text; the message names the key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct HistogramAxis {
    double min = -4.0;
    double max = 4.0;
    int bins = 8;

    double width() const { return (max - min) / bins; }
    /// Bin index of x, or -1 outside [min, max).
    int index(double x) const;
};

/// Axis-aligned binning of the trace (q_x, p_x) plane.
struct HistogramSpec {
    HistogramAxis position;
    HistogramAxis momentum{-4.0, 4.0, 8};

    int binCount() const { return position.bins * momentum.bins; }
};

struct RunConfig {
    SphereParams params{};
    double alpha = 0.01;
    double boxSide = 10.0;
    double temperature = 1.0;
    TruncationConfig truncation{};
    double time = 1.0;
    double derivativeStep = 0.02;
    int checkPoints = 20;
    HistogramSpec histogram{};
    long replicas = 2000000;
    int maxEnvCount = 40;
    long oracleSeriesSamples = 2000000;
    unsigned workers = 0;

    InitialData initialData() const { return InitialData::standard(params, alpha, boxSide, temperature); }
    /// Throws ConfigError naming the first invalid key.
    void validate() const;
    /// One "key: value" line per key in a fixed order, 17 significant digits.
    /// The worker count is left out since it does not change any result.
    std::string canonical() const;
    /// FNV-1a hash of canonical(), as 16 hex digits.
    std::string hash() const;
};

RunConfig parseConfig(const std::string& text);
RunConfig loadConfig(const std::string& path);

}  // namespace tracekin::validation
