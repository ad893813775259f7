#include "tracekin/validation/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace tracekin::validation {

int HistogramAxis::index(double x) const {
    if (!(x >= min && x < max)) return -1;
    const int i = static_cast<int>((x - min) / width());
    return std::min(i, bins - 1);
}

namespace {

template <class T>
T scalarAs(const std::string& key, const YAML::Node& node) {
    if (!node.IsScalar()) throw ConfigError(key, "expected a scalar value");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(key, "cannot convert '" + node.Scalar() + "'");
    }
}

void requirePositive(const std::string& key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a positive finite number");
}

struct Field {
    std::function<void(const YAML::Node&)> read;
    std::function<std::string()> write;
};

std::string number(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::pair<std::string, Field>> fields(RunConfig& c) {
    auto real = [](const std::string& key, double& target) {
        return std::pair<std::string, Field>{
            key, {[&target, key](const YAML::Node& n) { target = scalarAs<double>(key, n); },
                  [&target] { return number(target); }}};
    };
    auto integer = [](const std::string& key, auto& target) {
        using T = std::remove_reference_t<decltype(target)>;
        return std::pair<std::string, Field>{
            key, {[&target, key](const YAML::Node& n) { target = scalarAs<T>(key, n); },
                  [&target] { return std::to_string(target); }}};
    };
    return {
        real("sigma", c.params.sigma),
        real("massTrace", c.params.massTrace),
        real("massEnv", c.params.massEnv),
        real("alpha", c.alpha),
        real("boxSide", c.boxSide),
        real("temperature", c.temperature),
        integer("maxOrder", c.truncation.maxOrder),
        integer("samplesPerOrder", c.truncation.samplesPerOrder),
        integer("seed", c.truncation.seed),
        integer("degenerateRetryLimit", c.truncation.degenerateRetryLimit),
        real("time", c.time),
        real("derivativeStep", c.derivativeStep),
        integer("checkPoints", c.checkPoints),
        real("histogramPositionMin", c.histogram.position.min),
        real("histogramPositionMax", c.histogram.position.max),
        integer("histogramPositionBins", c.histogram.position.bins),
        real("histogramMomentumMin", c.histogram.momentum.min),
        real("histogramMomentumMax", c.histogram.momentum.max),
        integer("histogramMomentumBins", c.histogram.momentum.bins),
        integer("replicas", c.replicas),
        integer("maxEnvCount", c.maxEnvCount),
        integer("oracleSeriesSamples", c.oracleSeriesSamples),
        integer("workers", c.workers),
    };
}

void checkAxis(const std::string& prefix, const HistogramAxis& a) {
    if (!(a.max > a.min)) throw ConfigError(prefix + "Max", "must exceed " + prefix + "Min");
    if (a.bins < 1) throw ConfigError(prefix + "Bins", "must be >= 1");
}

}  // namespace

void RunConfig::validate() const {
    requirePositive("sigma", params.sigma);
    requirePositive("massTrace", params.massTrace);
    requirePositive("massEnv", params.massEnv);
    requirePositive("alpha", alpha);
    requirePositive("boxSide", boxSide);
    requirePositive("temperature", temperature);
    if (truncation.maxOrder < 0 || truncation.maxOrder > 8) throw ConfigError("maxOrder", "must be in 0..8");
    if (truncation.samplesPerOrder < 1) throw ConfigError("samplesPerOrder", "must be >= 1");
    if (truncation.degenerateRetryLimit < 0) throw ConfigError("degenerateRetryLimit", "must be >= 0");
    if (!std::isfinite(time)) throw ConfigError("time", "must be finite");
    requirePositive("derivativeStep", derivativeStep);
    if (checkPoints < 1) throw ConfigError("checkPoints", "must be >= 1");
    checkAxis("histogramPosition", histogram.position);
    checkAxis("histogramMomentum", histogram.momentum);
    if (replicas < 1) throw ConfigError("replicas", "must be >= 1");
    if (maxEnvCount < 0) throw ConfigError("maxEnvCount", "must be >= 0");
    if (oracleSeriesSamples < 1) throw ConfigError("oracleSeriesSamples", "must be >= 1");
}

std::string RunConfig::canonical() const {
    auto copy = *this;
    std::string out;
    for (const auto& [key, field] : fields(copy))
        if (key != "workers") out += key + ": " + field.write() + "\n";
    return out;
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

RunConfig parseConfig(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("<document>", std::string("parse error: ") + e.what());
    }
    RunConfig config;
    if (root.IsNull()) return config;
    if (!root.IsMap()) throw ConfigError("<document>", "expected a flat mapping of keys to values");

    auto table = fields(config);
    std::map<std::string, Field*> byKey;
    for (auto& [key, field] : table) byKey[key] = &field;
    for (const auto& entry : root) {
        const auto key = entry.first.as<std::string>();
        const auto it = byKey.find(key);
        if (it == byKey.end()) throw ConfigError(key, "unknown key");
        it->second->read(entry.second);
    }
    config.validate();
    return config;
}

RunConfig loadConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parseConfig(buffer.str());
}

}  // namespace tracekin::validation
