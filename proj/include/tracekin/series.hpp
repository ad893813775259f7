#pragma once

// Monte-Carlo evaluation of the cumulant series for the marginals
//   F_{1+s}(t) = sum_n 1/n! int dx_{s+1..s+n} A_{1+n}(-t) F0_{1+0} F0_{0+s+n} prod X2.

#include <cstdint>

#include "tracekin/estimate.hpp"
#include "tracekin/initial_data.hpp"
#include "tracekin/model.hpp"
#include "tracekin/operators.hpp"

namespace tracekin {

/// Chain of the n-th term (coefficient 1/n!) acting on the trace density.
/// Particle layout: 0 trace, 1..s fixed env, s+1..s+n integration particles.
Chain seriesTermChain(int s, int n, double t);

/// Integrand of the n-th term at the full particle list.
OperatorValue seriesIntegrand(int s, int n, double t, std::span<const PhasePoint> particles,
                              const InitialData& init, const SphereParams& params);

MarginalEstimate evalMarginalSeries(int s, double t, const SystemState& args, const InitialData& init,
                                    const TruncationConfig& cfg, const SphereParams& params);

/// Unbiased single-draw estimate of the series truncated at maxOrder: the n = 0
/// term is exact and each higher term uses one importance draw from `seed`.
/// Returns nullopt if a draw hit a degenerate trajectory.
std::optional<double> sampleMarginalSeries(int s, double t, const SystemState& args, const InitialData& init,
                                           int maxOrder, std::uint64_t seed, const SphereParams& params);

/// L1 norm of the n-th term of F_{1+0}(t) over x and the integration particles.
TermEstimate termNormEstimate(int n, double t, const InitialData& init, const TruncationConfig& cfg,
                              const SphereParams& params);

struct DerivativeCheckResult {
    double t = 0.0;
    PhasePoint x;
    double h = 0.0;
    double finiteDifference = 0.0;  ///< (d/dt + v . grad) of F_{1+0} by central differences
    double fdStdError = 0.0;
    double collisionTerm = 0.0;     ///< int dx1 L_int F_{1+1}
    double collisionStdError = 0.0;
    long degenerateDiscards = 0;

    double residual() const;
    double zScore() const;
};

/// Compares the time derivative of F_{1+0} truncated at N = cfg.maxOrder with the
/// free streaming plus collision term of F_{1+1} truncated at N - 1.
/// The difference is taken along the free characteristic of every particle,
/// so the n = 0 term drops out exactly.
DerivativeCheckResult derivativeCheck(double t, const PhasePoint& x, const InitialData& init,
                                      const TruncationConfig& cfg, const SphereParams& params, double h);

}  // namespace tracekin
