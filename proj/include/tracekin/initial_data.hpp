#pragma once

// Factorized initial data: a trace density times an environment family
// F0_{0+n} = alpha^n prod f0(x_i) prod_{i<j} X2(q_i, q_j).

#include <functional>
#include <span>

#include "tracekin/model.hpp"
#include "tracekin/random.hpp"

namespace tracekin {

/// Function of the trace phase point only.
using TraceFunction = std::function<double(const PhasePoint&)>;

double maxwellDensity(const Vec3& p, double sd);

/// Isotropic Gaussian in position and momentum, normalized on R^6.
struct GaussianTraceDensity {
    Vec3 center{};
    double positionSd = 1.0;
    double momentumSd = 1.0;

    double operator()(const PhasePoint& x) const;
    PhasePoint sample(Rng& rng) const;
    /// Density of the free-streamed data F0(q - t p / M, p).
    double freeStreamed(const PhasePoint& x, double t, double massTrace) const;
    /// Sample of the free-streamed data.
    PhasePoint sampleFreeStreamed(Rng& rng, double t, double massTrace) const;
};

/// One-body density f0(x) = 1_box(q) * Maxwell(p): uniform spatial value 1
/// on a cube, so alpha is a number density.
struct EnvFamily {
    double alpha = 0.01;
    double boxSide = 10.0;
    Vec3 boxCenter{};
    double momentumSd = 1.0;
    bool vacuum = false;     ///< f0 identically zero
    bool exclusion = true;   ///< include the env-env allowed-pair factors

    double boxVolume() const { return boxSide * boxSide * boxSide; }
    bool inBox(const Vec3& q) const;
    double oneBody(const PhasePoint& x) const;
    /// F0_{0+n}(xs); sigma sets the env-env exclusion.
    double density(std::span<const PhasePoint> xs, double sigma) const;

    Vec3 sampleMomentum(Rng& rng) const { return gaussianVec(rng, momentumSd); }
    Vec3 samplePosition(Rng& rng) const;
    double momentumDensity(const Vec3& p) const { return maxwellDensity(p, momentumSd); }

    /// max over n <= maxOrder of alpha^-n ||F0_{0+n}||, with the exclusion
    /// factors bounded by 1.
    double normConstant(int maxOrder) const;
};

struct InitialData {
    GaussianTraceDensity trace;
    EnvFamily env;

    /// Default desk-scale data: unit-variance positions for the trace, Maxwellian
    /// momenta at `temperature` for both species, env box of side `boxSide`.
    static InitialData standard(const SphereParams& params, double alpha = 0.01, double boxSide = 10.0,
                                double temperature = 1.0);

    void validate() const;
};

}  // namespace tracekin
