#include "tracekin/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tracekin {

void SphereParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(sigma)) throw std::invalid_argument{"sigma must be positive"};
    if (!positive(massTrace)) throw std::invalid_argument{"massTrace must be positive"};
    if (!positive(massEnv)) throw std::invalid_argument{"massEnv must be positive"};
}

bool isFinite(const PhasePoint& x) { return isFinite(x.q) && isFinite(x.p); }

double particleMass(int index, const SphereParams& params) {
    return index == 0 ? params.massTrace : params.massEnv;
}

ImpactDirection ImpactDirection::fromUnit(const Vec3& eta) {
    if (!isFinite(eta) || std::abs(norm(eta) - 1.0) > kUnitTolerance)
        throw std::invalid_argument{"impact direction is not a unit vector"};
    return ImpactDirection(eta);
}

ImpactDirection ImpactDirection::along(const Vec3& direction) {
    const double len = norm(direction);
    if (!std::isfinite(len) || len == 0.0) throw std::invalid_argument{"cannot normalise a zero direction"};
    return ImpactDirection(direction / len);
}

bool pairAllowed(const Vec3& a, const Vec3& b, double sigma) {
    return norm2(a - b) >= sigma * sigma * (1.0 - kContactTolerance);
}

bool isAllowedConfiguration(std::span<const Vec3> positions, double sigma) {
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (!pairAllowed(positions[i], positions[j], sigma)) return false;
    return true;
}

bool isAllowedConfiguration(const SystemState& state, const SphereParams& params) {
    const double sigma = params.sigma;
    for (std::size_t i = 0; i < state.env.size(); ++i) {
        if (!pairAllowed(state.trace.q, state.env[i].q, sigma)) return false;
        for (std::size_t j = i + 1; j < state.env.size(); ++j)
            if (!pairAllowed(state.env[i].q, state.env[j].q, sigma)) return false;
    }
    return true;
}

std::pair<Vec3, Vec3> envEnvTransform(const Vec3& pI, const Vec3& pJ, const Vec3& eta) {
    const Vec3 kick = eta * dot(eta, pI - pJ);
    return {pI - kick, pJ + kick};
}

std::pair<Vec3, Vec3> traceEnvTransform(const Vec3& p, const Vec3& p1, const Vec3& eta,
                                        const SphereParams& params) {
    const double normal = dot(eta, p / params.massTrace - p1 / params.massEnv);
    const Vec3 kick = eta * (params.reducedTransferFactor() * normal);
    return {p - kick, p1 + kick};
}

std::pair<Vec3, Vec3> collideEnvEnv(const Vec3& pI, const Vec3& pJ, const ImpactDirection& eta) {
    if (!(dot(eta.vec(), pI - pJ) > 0.0))
        throw std::invalid_argument{"env-env impact direction is not incoming"};
    return envEnvTransform(pI, pJ, eta.vec());
}

std::pair<Vec3, Vec3> collideTraceEnv(const Vec3& p, const Vec3& p1, const ImpactDirection& eta,
                                      const SphereParams& params) {
    if (!(dot(eta.vec(), p / params.massTrace - p1 / params.massEnv) > 0.0))
        throw std::invalid_argument{"trace-env impact direction is not incoming"};
    return traceEnvTransform(p, p1, eta.vec(), params);
}

double kineticEnergy(const SystemState& state, const SphereParams& params) {
    double e = norm2(state.trace.p) / (2.0 * params.massTrace);
    for (const auto& x : state.env) e += norm2(x.p) / (2.0 * params.massEnv);
    return e;
}

Vec3 totalMomentum(const SystemState& state) {
    Vec3 total = state.trace.p;
    for (const auto& x : state.env) total += x.p;
    return total;
}

}  // namespace tracekin
