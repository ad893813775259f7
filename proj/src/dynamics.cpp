#include "tracekin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace tracekin {

namespace {

Vec3 velocity(const Body& b, const SphereParams& params) {
    return b.x.p / particleMass(b.index, params);
}

void advance(std::span<Body> bodies, double dt, const SphereParams& params) {
    if (dt == 0.0) return;
    for (auto& b : bodies) b.x.q += velocity(b, params) * dt;
}

void reverseMomenta(std::span<Body> bodies) {
    for (auto& b : bodies) b.x.p = -b.x.p;
}

// Applies the collision law to bodies a and b at contact. Returns the normal
// relative speed before the kick, used for the grazing test.
double collide(Body& a, Body& b, const SphereParams& params) {
    const Vec3 eta = (b.x.q - a.x.q) / norm(b.x.q - a.x.q);
    const double normalSpeed = dot(eta, velocity(a, params) - velocity(b, params));
    if (a.index == 0) {
        std::tie(a.x.p, b.x.p) = traceEnvTransform(a.x.p, b.x.p, eta, params);
    } else if (b.index == 0) {
        std::tie(b.x.p, a.x.p) = traceEnvTransform(b.x.p, a.x.p, -eta, params);
    } else {
        std::tie(a.x.p, b.x.p) = envEnvTransform(a.x.p, b.x.p, eta);
    }
    return normalSpeed;
}

FlowOutcome evolveForward(std::span<Body> bodies, double duration, const SphereParams& params,
                          const EventResolution& resolution) {
    FlowOutcome outcome;
    double fastest = 0.0;
    for (const auto& b : bodies) fastest = std::max(fastest, norm(velocity(b, params)));
    const double grazing = resolution.speedTolerance * (fastest > 0.0 ? fastest : 1.0);

    double remaining = duration;
    while (true) {
        auto schedule = EventSchedule::build(bodies, params);
        if (schedule.empty() || schedule.top().time > remaining) {
            advance(bodies, remaining, params);
            return outcome;
        }
        const Event next = schedule.top();
        schedule.pop();
        while (!schedule.empty() && schedule.top().time - next.time < resolution.timeTolerance) {
            if (schedule.top().sharesBody(next)) {
                outcome.degenerate = true;
                return outcome;
            }
            schedule.pop();
        }
        advance(bodies, next.time, params);
        remaining -= next.time;
        const double normalSpeed = collide(bodies[static_cast<std::size_t>(next.first)],
                                           bodies[static_cast<std::size_t>(next.second)], params);
        ++outcome.collisions;
        if (std::abs(normalSpeed) < grazing || outcome.collisions > resolution.maxCollisions) {
            outcome.degenerate = true;
            return outcome;
        }
    }
}

}  // namespace

std::optional<double> contactTime(const Body& a, const Body& b, const SphereParams& params) {
    const Vec3 dq = b.x.q - a.x.q;
    const Vec3 dv = velocity(b, params) - velocity(a, params);
    const double approach = dot(dq, dv);
    if (!(approach < 0.0)) return std::nullopt;
    const double speed2 = norm2(dv);
    const double gap = norm2(dq) - params.sigma * params.sigma;
    if (gap <= 0.0) return 0.0;
    const double disc = approach * approach - speed2 * gap;
    if (disc < 0.0) return std::nullopt;
    // Smaller root of speed2 t^2 + 2 approach t + gap = 0 without cancellation.
    const double t = gap / (-approach + std::sqrt(disc));
    if (!std::isfinite(t)) return std::nullopt;
    return std::max(t, 0.0);
}

EventSchedule EventSchedule::build(std::span<const Body> bodies, const SphereParams& params) {
    EventSchedule schedule;
    const int n = static_cast<int>(bodies.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (auto t = contactTime(bodies[static_cast<std::size_t>(i)], bodies[static_cast<std::size_t>(j)], params))
                schedule.queue_.push(Event{*t, i, j});
    return schedule;
}

FlowOutcome evolveBodies(std::span<Body> bodies, double duration, const SphereParams& params,
                         const EventResolution& resolution) {
    if (duration == 0.0 || bodies.empty()) return {};
    if (bodies.size() == 1) {
        advance(bodies, duration, params);
        return {};
    }
    if (duration > 0.0) return evolveForward(bodies, duration, params, resolution);
    reverseMomenta(bodies);
    auto outcome = evolveForward(bodies, -duration, params, resolution);
    reverseMomenta(bodies);
    return outcome;
}

namespace {

std::vector<Body> toBodies(const SystemState& state) {
    std::vector<Body> bodies;
    bodies.reserve(static_cast<std::size_t>(state.particleCount()));
    for (int i = 0; i < state.particleCount(); ++i) bodies.push_back(Body{state.particle(i), i});
    return bodies;
}

}  // namespace

std::optional<Event> nextEvent(const SystemState& state, const SphereParams& params) {
    const auto bodies = toBodies(state);
    auto schedule = EventSchedule::build(bodies, params);
    if (schedule.empty()) return std::nullopt;
    return schedule.top();
}

TrajectoryResult flow(const SystemState& state, double t, const SphereParams& params,
                      const EventResolution& resolution) {
    if (!isAllowedConfiguration(state, params)) throw std::invalid_argument{"flow: forbidden configuration"};
    auto bodies = toBodies(state);
    const auto outcome = evolveBodies(bodies, t, params, resolution);
    TrajectoryResult result{state, outcome.collisions, outcome.degenerate};
    for (const auto& b : bodies) result.finalState.particle(b.index) = b.x;
    return result;
}

GroupValue applyGroup(const PhaseFunction& f, double t, const SystemState& state, const SphereParams& params,
                      const EventResolution& resolution) {
    if (!isAllowedConfiguration(state, params)) return {0.0, false};
    const auto result = flow(state, -t, params, resolution);
    if (result.degenerate) return {std::numeric_limits<double>::quiet_NaN(), true};
    return {f(result.finalState), false};
}

double liouvilleFree(const PhaseFunction& f, const SystemState& state, const SphereParams& params, double h) {
    if (!(h > 0.0)) throw std::invalid_argument{"liouvilleFree: step must be positive"};
    const int n = state.particleCount();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto& a = state.particle(i);
            const auto& b = state.particle(j);
            const double gap = norm(a.q - b.q) - params.sigma;
            const double relSpeed = norm(a.p / particleMass(i, params) - b.p / particleMass(j, params));
            if (!(gap > h * relSpeed))
                throw std::domain_error{"liouvilleFree: stencil reaches the collision manifold"};
        }
    }
    SystemState ahead = state;
    SystemState behind = state;
    for (int i = 0; i < n; ++i) {
        const Vec3 v = state.particle(i).p / particleMass(i, params);
        ahead.particle(i).q += v * h;
        behind.particle(i).q -= v * h;
    }
    return (f(behind) - f(ahead)) / (2.0 * h);
}

}  // namespace tracekin
