#include "tracekin/contact.hpp"

#include <numbers>

namespace tracekin {

ContactSample makeContact(const PhasePoint& x, const Vec3& eta, const Vec3& p1, CollisionBranch branch,
                          const EnvFamily& env, const SphereParams& params) {
    ContactSample c;
    c.eta = eta;
    c.p1 = p1;
    c.normalSpeed = dot(eta, x.p / params.massTrace - p1 / params.massEnv);
    if (!(c.normalSpeed > 0.0)) return c;
    c.weight = params.sigma * params.sigma * 4.0 * std::numbers::pi * c.normalSpeed / env.momentumDensity(p1);

    const auto [pStar, p1Star] = traceEnvTransform(x.p, p1, eta, params);
    const Vec3 minus = x.q - eta * params.sigma;
    const Vec3 plus = x.q + eta * params.sigma;
    if (branch == CollisionBranch::Forward) {
        c.gain = SystemState{{x.q, pStar}, {{minus, p1Star}}};
        c.loss = SystemState{{x.q, x.p}, {{plus, p1}}};
    } else {
        c.gain = SystemState{{x.q, x.p}, {{minus, p1}}};
        c.loss = SystemState{{x.q, pStar}, {{plus, p1Star}}};
    }
    return c;
}

ContactSample sampleContact(const PhasePoint& x, CollisionBranch branch, Rng& rng, const EnvFamily& env,
                            const SphereParams& params) {
    const Vec3 eta = uniformOnSphere(rng);
    const Vec3 p1 = env.sampleMomentum(rng);
    return makeContact(x, eta, p1, branch, env, params);
}

}  // namespace tracekin
