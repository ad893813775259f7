#pragma once

// Importance proposal for the integration particles of cluster integrals.
// Cumulant integrands vanish unless every integration particle meets the
// cluster within the time window, so positions are drawn near the relative
// free paths of the particles already present.

#include <span>
#include <vector>

#include "tracekin/initial_data.hpp"
#include "tracekin/model.hpp"
#include "tracekin/random.hpp"

namespace tracekin {

/// Straight path of a possible collision partner: a new particle with velocity v
/// meets it within the window when q lies within sigma of
/// point + s (v - velocity) for some s in [sMin, sMax].
struct AnchorSegment {
    Vec3 point;
    Vec3 velocity;
    double sMin = 0.0;
    double sMax = 0.0;
};

struct ProposalSettings {
    double capsuleWeight = 0.8;
    double ballWeight = 0.1;
    double broadWeight = 0.1;
    double sMin = 0.0;        ///< window used for anchors built from drawn particles
    double sMax = 0.0;
    double broadShift = 0.0;  ///< broad component draws q = u + broadShift * v, u uniform in the box

    /// Window [min(0, t), max(0, t)] and broad shift t.
    static ProposalSettings forTime(double t);
};

/// Volume of the set of points within `radius` of the segment [a, b].
double capsuleVolume(const Vec3& a, const Vec3& b, double radius);
/// Squared distance from q to the segment [a, b].
double segmentDistance2(const Vec3& q, const Vec3& a, const Vec3& b);

class ClusterProposal {
public:
    /// `fixedAnchors` are the particles present before any draw; `fixedEnergy`
    /// is their total kinetic energy.
    ClusterProposal(const EnvFamily& env, const SphereParams& params, ProposalSettings settings,
                    std::vector<AnchorSegment> fixedAnchors, double fixedEnergy);

    struct Draw {
        std::vector<PhasePoint> particles;
        double weight = 0.0;  ///< 1 / proposal density of the ordered draw
    };

    Draw sample(int count, Rng& rng) const;
    /// Proposal density of an ordered draw.
    double density(std::span<const PhasePoint> particles) const;

    const ProposalSettings& settings() const { return settings_; }

private:
    double positionDensity(const Vec3& q, const Vec3& v, std::span<const AnchorSegment> anchors,
                           double energy) const;
    double ballRadius(const AnchorSegment& a, const Vec3& v, double energy) const;

    EnvFamily env_;
    SphereParams params_;
    ProposalSettings settings_;
    std::vector<AnchorSegment> fixedAnchors_;
    double fixedEnergy_;
};

}  // namespace tracekin
