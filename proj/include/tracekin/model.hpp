#pragma once

// Phase-space data model for a trace hard sphere (mass M) in an environment of
// identical hard spheres (mass m), all of diameter sigma.

#include <span>
#include <utility>
#include <vector>

#include "tracekin/vec3.hpp"

namespace tracekin {

/// Relative tolerance on sigma^2 below which a pair counts as overlapping.
/// Points built as q +/- sigma*eta land on the contact sphere only up to
/// rounding, and they must stay allowed.
inline constexpr double kContactTolerance = 1e-12;

/// Accepted deviation of |eta| from 1.
inline constexpr double kUnitTolerance = 1e-12;

struct SphereParams {
    double sigma = 0.1;
    double massTrace = 1.0;
    double massEnv = 1.0;

    /// Throws std::invalid_argument unless all three are positive and finite.
    void validate() const;
    /// 2 M m / (M + m), the momentum-transfer prefactor of a trace-env collision.
    double reducedTransferFactor() const { return 2.0 * massTrace * massEnv / (massTrace + massEnv); }
};

struct PhasePoint {
    Vec3 q;
    Vec3 p;

    bool operator==(const PhasePoint&) const = default;
};

bool isFinite(const PhasePoint& x);

/// Trace phase point plus an ordered list of environment phase points.
/// Particle index 0 is the trace and index i >= 1 is env[i - 1].
struct SystemState {
    PhasePoint trace;
    std::vector<PhasePoint> env;

    int particleCount() const { return 1 + static_cast<int>(env.size()); }
    const PhasePoint& particle(int index) const { return index == 0 ? trace : env[static_cast<std::size_t>(index - 1)]; }
    PhasePoint& particle(int index) { return index == 0 ? trace : env[static_cast<std::size_t>(index - 1)]; }

    bool operator==(const SystemState&) const = default;
};

double particleMass(int index, const SphereParams& params);

/// Unit vector along the line of centres at impact.
class ImpactDirection {
public:
    /// Rejects vectors whose length differs from 1 by more than kUnitTolerance.
    static ImpactDirection fromUnit(const Vec3& eta);
    /// Normalises any nonzero finite vector.
    static ImpactDirection along(const Vec3& direction);

    const Vec3& vec() const { return eta_; }
    ImpactDirection flipped() const { return ImpactDirection(-eta_); }

private:
    explicit ImpactDirection(const Vec3& eta) : eta_(eta) {}
    Vec3 eta_;
};

/// Heaviside factor X2(q, q') of allowed pair configurations.
bool pairAllowed(const Vec3& a, const Vec3& b, double sigma);

/// True iff no pair (trace-env or env-env) has centre distance below sigma.
bool isAllowedConfiguration(const SystemState& state, const SphereParams& params);
bool isAllowedConfiguration(std::span<const Vec3> positions, double sigma);

/// Equal-mass env-env collision. Requires <eta, pI - pJ> > 0.
std::pair<Vec3, Vec3> collideEnvEnv(const Vec3& pI, const Vec3& pJ, const ImpactDirection& eta);

/// Trace-env collision with masses M (trace) and m (env). Requires
/// <eta, p/M - p1/m> > 0 with eta pointing from the trace to the env sphere.
std::pair<Vec3, Vec3> collideTraceEnv(const Vec3& p, const Vec3& p1, const ImpactDirection& eta,
                                      const SphereParams& params);

/// Same transform without the incoming-collision check; momenta are returned
/// unchanged when the normal relative velocity vanishes.
std::pair<Vec3, Vec3> traceEnvTransform(const Vec3& p, const Vec3& p1, const Vec3& eta,
                                        const SphereParams& params);
std::pair<Vec3, Vec3> envEnvTransform(const Vec3& pI, const Vec3& pJ, const Vec3& eta);

double kineticEnergy(const SystemState& state, const SphereParams& params);
Vec3 totalMomentum(const SystemState& state);

}  // namespace tracekin
