#include "tracekin/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tracekin {

double maxwellDensity(const Vec3& p, double sd) {
    const double var = sd * sd;
    return std::exp(-norm2(p) / (2.0 * var)) / std::pow(2.0 * std::numbers::pi * var, 1.5);
}

double GaussianTraceDensity::operator()(const PhasePoint& x) const {
    return maxwellDensity(x.q - center, positionSd) * maxwellDensity(x.p, momentumSd);
}

PhasePoint GaussianTraceDensity::sample(Rng& rng) const {
    const Vec3 q = center + gaussianVec(rng, positionSd);
    return {q, gaussianVec(rng, momentumSd)};
}

double GaussianTraceDensity::freeStreamed(const PhasePoint& x, double t, double massTrace) const {
    return (*this)({x.q - x.p * (t / massTrace), x.p});
}

PhasePoint GaussianTraceDensity::sampleFreeStreamed(Rng& rng, double t, double massTrace) const {
    auto x = sample(rng);
    x.q += x.p * (t / massTrace);
    return x;
}

bool EnvFamily::inBox(const Vec3& q) const {
    const double h = 0.5 * boxSide;
    const Vec3 d = q - boxCenter;
    return std::abs(d.x) <= h && std::abs(d.y) <= h && std::abs(d.z) <= h;
}

double EnvFamily::oneBody(const PhasePoint& x) const {
    if (vacuum || !inBox(x.q)) return 0.0;
    return momentumDensity(x.p);
}

double EnvFamily::density(std::span<const PhasePoint> xs, double sigma) const {
    if (xs.empty()) return 1.0;
    if (vacuum) return 0.0;
    double value = 1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        value *= alpha * oneBody(xs[i]);
        if (value == 0.0) return 0.0;
        if (exclusion)
            for (std::size_t j = i + 1; j < xs.size(); ++j)
                if (!pairAllowed(xs[i].q, xs[j].q, sigma)) return 0.0;
    }
    return value;
}

Vec3 EnvFamily::samplePosition(Rng& rng) const {
    const double h = 0.5 * boxSide;
    std::uniform_real_distribution<double> u{-h, h};
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    return boxCenter + Vec3{x, y, z};
}

double EnvFamily::normConstant(int maxOrder) const {
    if (vacuum) return 0.0;
    return std::pow(std::max(1.0, boxVolume()), std::max(0, maxOrder));
}

InitialData InitialData::standard(const SphereParams& params, double alpha, double boxSide, double temperature) {
    params.validate();
    if (!(temperature > 0.0)) throw std::invalid_argument{"temperature must be positive"};
    InitialData data;
    data.trace.momentumSd = std::sqrt(params.massTrace * temperature);
    data.env.alpha = alpha;
    data.env.boxSide = boxSide;
    data.env.momentumSd = std::sqrt(params.massEnv * temperature);
    data.validate();
    return data;
}

void InitialData::validate() const {
    if (!(trace.positionSd > 0.0) || !(trace.momentumSd > 0.0))
        throw std::invalid_argument{"trace density widths must be positive"};
    if (!(env.alpha > 0.0) || !std::isfinite(env.alpha)) throw std::invalid_argument{"alpha must be positive"};
    if (!(env.boxSide > 0.0)) throw std::invalid_argument{"boxSide must be positive"};
    if (!(env.momentumSd > 0.0)) throw std::invalid_argument{"env momentum spread must be positive"};
}

}  // namespace tracekin
