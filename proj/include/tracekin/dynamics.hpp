#pragma once

// Event-driven hard-sphere dynamics: exact piecewise free flight between
// elastic collisions, in either time direction.

#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "tracekin/model.hpp"

namespace tracekin {

/// A particle taking part in a flow. `index` is the global particle index
/// (0 = trace), used for the mass and for choosing the collision law.
struct Body {
    PhasePoint x;
    int index = 0;
};

struct EventResolution {
    double timeTolerance = 1e-12;   ///< simultaneity window
    double speedTolerance = 1e-12;  ///< grazing threshold, relative to the fastest body
    long maxCollisions = 1'000'000;
};

/// Contact of the bodies at positions `first` and `second` of a flow after `time`.
struct Event {
    double time = 0.0;
    int first = 0;
    int second = 0;

    bool sharesBody(const Event& o) const {
        return first == o.first || first == o.second || second == o.first || second == o.second;
    }
    friend bool operator>(const Event& a, const Event& b) { return a.time > b.time; }
};

/// Earliest positive root of |dq + t dv|^2 = sigma^2 for an approaching pair.
std::optional<double> contactTime(const Body& a, const Body& b, const SphereParams& params);

/// Pending contacts of every approaching pair, earliest first. Times are >= 0
/// and finite; a pair sitting at contact and approaching has time 0.
class EventSchedule {
public:
    static EventSchedule build(std::span<const Body> bodies, const SphereParams& params);

    bool empty() const { return queue_.empty(); }
    std::size_t size() const { return queue_.size(); }
    const Event& top() const { return queue_.top(); }
    void pop() { queue_.pop(); }

private:
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
};

struct FlowOutcome {
    long collisions = 0;
    bool degenerate = false;
};

/// Evolves `bodies` in place by the signed time `duration`. Negative durations
/// run the same loop on reversed momenta. Stops at the first grazing or
/// triple contact and reports it as degenerate.
FlowOutcome evolveBodies(std::span<Body> bodies, double duration, const SphereParams& params,
                         const EventResolution& resolution = {});

struct TrajectoryResult {
    SystemState finalState;
    long collisionCount = 0;
    bool degenerate = false;
};

/// Earliest collision of the full state; pair indices are global particle indices.
std::optional<Event> nextEvent(const SystemState& state, const SphereParams& params);

/// Phase point of the system after signed time `t`. Throws std::invalid_argument
/// on a forbidden starting configuration.
TrajectoryResult flow(const SystemState& state, double t, const SphereParams& params,
                      const EventResolution& resolution = {});

using PhaseFunction = std::function<double(const SystemState&)>;

struct GroupValue {
    double value = 0.0;
    bool degenerate = false;
};

/// (S(-t) f)(state) = f(flow(state, -t)); zero on forbidden configurations.
GroupValue applyGroup(const PhaseFunction& f, double t, const SystemState& state, const SphereParams& params,
                      const EventResolution& resolution = {});

/// Central-difference estimate of the free Liouville operator
/// -<p/M, df/dq> - sum_i <p_i/m, df/dq_i> with step `h` along the free flow.
/// Throws std::domain_error when the stencil could reach a contact.
double liouvilleFree(const PhaseFunction& f, const SystemState& state, const SphereParams& params, double h);

}  // namespace tracekin
