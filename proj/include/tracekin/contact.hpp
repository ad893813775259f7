#pragma once

// Monte-Carlo rule for integrals over the trace collision sphere:
//   sigma^2 int dp1 int_{<eta, v - v1> > 0} deta <eta, v - v1> [G(gain) - G(loss)]
// with eta uniform on the full sphere and p1 drawn from the env Maxwellian.

#include "tracekin/initial_data.hpp"
#include "tracekin/model.hpp"
#include "tracekin/random.hpp"

namespace tracekin {

enum class CollisionBranch {
    Forward,   ///< gain at (q, p*, q - sigma eta, p1*), loss at (q, p, q + sigma eta, p1)
    Backward,  ///< gain at (q, p, q - sigma eta, p1), loss at (q, p*, q + sigma eta, p1*)
};

struct ContactSample {
    Vec3 eta;
    Vec3 p1;
    double normalSpeed = 0.0;  ///< <eta, p/M - p1/m>
    /// sigma^2 * 4 pi * normalSpeed / Maxwell(p1) on the incoming hemisphere, else 0.
    double weight = 0.0;
    SystemState gain;
    SystemState loss;

    bool active() const { return weight > 0.0; }
};

ContactSample sampleContact(const PhasePoint& x, CollisionBranch branch, Rng& rng, const EnvFamily& env,
                            const SphereParams& params);

/// Contact sample for a given impact direction and partner momentum.
ContactSample makeContact(const PhasePoint& x, const Vec3& eta, const Vec3& p1, CollisionBranch branch,
                          const EnvFamily& env, const SphereParams& params);

}  // namespace tracekin
