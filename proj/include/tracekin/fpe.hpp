#pragma once

// Generalized Fokker-Planck collision integral, its first-order Duhamel form,
// marginal functionals of the trace state, the kinetic cluster recurrence and
// observable averages.

#include <functional>
#include <span>

#include "tracekin/contact.hpp"
#include "tracekin/estimate.hpp"
#include "tracekin/initial_data.hpp"
#include "tracekin/scattering.hpp"

namespace tracekin {

struct CollisionOptions {
    LeadingTime leading = LeadingTime::Backward;
    bool swapGainLoss = false;  ///< exchange the gain and loss evaluation rules
};

/// sigma^2 sum_{n <= N} 1/n! int dp1 deta dx_2..dx_{n+1} <eta, v - v1>
///   [V_{1+n} F(gain point) - V_{1+n} F(loss point)].
/// t >= 0 uses the forward branch, t < 0 the mirrored one.
MarginalEstimate collisionIntegral(double t, const PhasePoint& x, const InitialData& init,
                                   const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                   const SphereParams& params, const CollisionOptions& options = {});

/// -<p/M, grad_q> F_{1+0}(t, x) + collision integral, with the gradient taken by
/// central differences of width h on the trace function. The streaming part is
/// the first entry of perOrderTerms, with order -1.
MarginalEstimate fpeRightHandSide(double t, const PhasePoint& x, const InitialData& init,
                                  const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                  const SphereParams& params, double h = 1e-4);

/// L1 norm of the n-th collision-integral term, x drawn from the free-streamed
/// trace density.
TermEstimate collisionTermNorm(int n, double t, const InitialData& init, const TraceFunctionEstimator& traceF,
                               const TruncationConfig& cfg, const SphereParams& params);

struct DuhamelComparison {
    MarginalEstimate duhamel;      ///< boundary plus time-integral form
    MarginalEstimate boundary;     ///< free-streamed boundary part alone
    MarginalEstimate collision;    ///< N = 0 collision-integral term
    SampleSummary difference;      ///< paired duhamel - collision
    double zScore() const;
};

/// First-order term in Duhamel form: the boundary contribution with the
/// partner free-streamed back by t, plus the integral over tau in [0, t] of the
/// derivative of S1 S1(-(t - tau)) S2(-tau), telescoped over `nodes` intervals.
MarginalEstimate duhamelFirstOrder(double t, const PhasePoint& x, const InitialData& init,
                                   const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                   const SphereParams& params, int nodes = 64);

/// Duhamel form and N = 0 collision term on shared samples.
DuhamelComparison compareDuhamel(double t, const PhasePoint& x, const InitialData& init,
                                 const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                 const SphereParams& params, int nodes = 64);

/// F_{1+s}(t | F_{1+0}(t)) = sum_{n <= N} 1/n! int dx_{s+1..s+n} V_{1+n}(t) F_{1+0}(t).
MarginalEstimate evalFunctional(int s, double t, const SystemState& args, const InitialData& init,
                                const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                const SphereParams& params, LeadingTime leading = LeadingTime::Backward);

struct RecurrenceReport {
    int order = 0;
    double maxResidual = 0.0;
    long evaluated = 0;
    long degenerate = 0;
    double tolerance = 0.0;
    bool passed() const { return evaluated > 0 && maxResidual <= tolerance; }
};

/// Pointwise residual of
///   A_{1+n}(-t) F0_{0+s+n} X F0_{1+0}
///     = sum_k C(n, k) V_{1+n-k}(t) A_{1+k}(-t) F0_{0+k} X F0_{1+0}
/// on the given states (trace, s cluster env, n free env). The env family must
/// factorize, so `init.env.exclusion` must be false.
RecurrenceReport verifyRecurrence(int n, int s, double t, std::span<const SystemState> samples,
                                  const InitialData& init, const SphereParams& params,
                                  LeadingTime leading = LeadingTime::Backward);

/// Symmetric observable of the trace and s env particles.
using Observable = std::function<double(const SystemState&)>;

/// 1/(1+s)! int dx dx_1..dx_s b F_{1+s}(t | F_{1+0}(t)).
MarginalEstimate averageObservable(int s, double t, const Observable& b, const InitialData& init,
                                   const TraceFunctionEstimator& traceF, const TruncationConfig& cfg,
                                   const SphereParams& params);

}  // namespace tracekin
