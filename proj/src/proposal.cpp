#include "tracekin/proposal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tracekin {

namespace {

constexpr double kPi = std::numbers::pi;

double ballVolume(double r) { return 4.0 / 3.0 * kPi * r * r * r; }

Vec3 segmentStart(const AnchorSegment& a, const Vec3& v) { return a.point + (v - a.velocity) * a.sMin; }
Vec3 segmentEnd(const AnchorSegment& a, const Vec3& v) { return a.point + (v - a.velocity) * a.sMax; }

Vec3 sampleCapsule(const Vec3& a, const Vec3& b, double r, Rng& rng) {
    const Vec3 axis = b - a;
    const double len = norm(axis);
    const double cylinder = kPi * r * r * len;
    const double total = cylinder + ballVolume(r);
    if (len > 0.0 && uniform01(rng) * total < cylinder) {
        const Vec3 dir = axis / len;
        const auto [e1, e2] = orthonormalComplement(dir);
        const double rho = r * std::sqrt(uniform01(rng));
        const double phi = 2.0 * kPi * uniform01(rng);
        const double s = uniform01(rng);
        return a + axis * s + e1 * (rho * std::cos(phi)) + e2 * (rho * std::sin(phi));
    }
    // The two end caps together form one ball split by the plane normal to the axis.
    const Vec3 u = uniformInBall(rng, r);
    if (len > 0.0 && dot(u, axis) > 0.0) return b + u;
    return a + u;
}

}  // namespace

ProposalSettings ProposalSettings::forTime(double t) {
    ProposalSettings s;
    s.sMin = std::min(0.0, t);
    s.sMax = std::max(0.0, t);
    s.broadShift = t;
    return s;
}

double capsuleVolume(const Vec3& a, const Vec3& b, double radius) {
    return kPi * radius * radius * norm(b - a) + ballVolume(radius);
}

double segmentDistance2(const Vec3& q, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = norm2(ab);
    double s = len2 > 0.0 ? dot(q - a, ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return norm2(q - (a + ab * s));
}

ClusterProposal::ClusterProposal(const EnvFamily& env, const SphereParams& params, ProposalSettings settings,
                                 std::vector<AnchorSegment> fixedAnchors, double fixedEnergy)
    : env_(env), params_(params), settings_(settings), fixedAnchors_(std::move(fixedAnchors)),
      fixedEnergy_(fixedEnergy) {
    const double w = settings_.capsuleWeight + settings_.ballWeight + settings_.broadWeight;
    if (!(settings_.broadWeight > 0.0) || settings_.capsuleWeight < 0.0 || settings_.ballWeight < 0.0 ||
        std::abs(w - 1.0) > 1e-12)
        throw std::invalid_argument{"proposal mixture weights must be nonnegative, sum to 1, with a broad part"};
    if (settings_.sMin > settings_.sMax) throw std::invalid_argument{"proposal window is empty"};
}

double ClusterProposal::ballRadius(const AnchorSegment& a, const Vec3& v, double energy) const {
    const double window = std::max(std::abs(a.sMin), std::abs(a.sMax));
    const double lightest = std::min(params_.massTrace, params_.massEnv);
    const double fastest = std::sqrt(2.0 * energy / lightest);
    return params_.sigma + window * (norm(v - a.velocity) + 2.0 * fastest);
}

double ClusterProposal::positionDensity(const Vec3& q, const Vec3& v, std::span<const AnchorSegment> anchors,
                                        double energy) const {
    double capsule = 0.0;
    double ball = 0.0;
    const double r = params_.sigma;
    for (const auto& a : anchors) {
        const Vec3 s0 = segmentStart(a, v);
        const Vec3 s1 = segmentEnd(a, v);
        if (segmentDistance2(q, s0, s1) <= r * r) capsule += 1.0 / capsuleVolume(s0, s1, r);
        const double R = ballRadius(a, v, energy);
        if (norm2(q - a.point) <= R * R) ball += 1.0 / ballVolume(R);
    }
    const double count = static_cast<double>(anchors.size());
    double density = 0.0;
    if (count > 0.0) density += (settings_.capsuleWeight * capsule + settings_.ballWeight * ball) / count;
    const double broadNorm = count > 0.0 ? settings_.broadWeight : 1.0;
    if (env_.inBox(q - v * settings_.broadShift)) density += broadNorm / env_.boxVolume();
    return density;
}

ClusterProposal::Draw ClusterProposal::sample(int count, Rng& rng) const {
    Draw draw;
    std::vector<AnchorSegment> anchors = fixedAnchors_;
    double energy = fixedEnergy_;
    double density = 1.0;
    for (int i = 0; i < count; ++i) {
        const Vec3 p = env_.sampleMomentum(rng);
        const Vec3 v = p / params_.massEnv;
        const double e = energy + norm2(p) / (2.0 * params_.massEnv);
        Vec3 q;
        const double u = uniform01(rng);
        if (anchors.empty() || u < settings_.broadWeight) {
            q = env_.samplePosition(rng) + v * settings_.broadShift;
        } else {
            const auto k = std::min(anchors.size() - 1,
                                    static_cast<std::size_t>(uniform01(rng) * static_cast<double>(anchors.size())));
            const auto& a = anchors[k];
            if (u < settings_.broadWeight + settings_.ballWeight)
                q = a.point + uniformInBall(rng, ballRadius(a, v, e));
            else
                q = sampleCapsule(segmentStart(a, v), segmentEnd(a, v), params_.sigma, rng);
        }
        density *= env_.momentumDensity(p) * positionDensity(q, v, anchors, e);
        draw.particles.push_back({q, p});
        anchors.push_back({q, v, settings_.sMin, settings_.sMax});
        energy = e;
    }
    draw.weight = 1.0 / density;
    return draw;
}

double ClusterProposal::density(std::span<const PhasePoint> particles) const {
    std::vector<AnchorSegment> anchors = fixedAnchors_;
    double energy = fixedEnergy_;
    double density = 1.0;
    for (const auto& x : particles) {
        const Vec3 v = x.p / params_.massEnv;
        energy += norm2(x.p) / (2.0 * params_.massEnv);
        density *= env_.momentumDensity(x.p) * positionDensity(x.q, v, anchors, energy);
        anchors.push_back({x.q, v, settings_.sMin, settings_.sMax});
    }
    return density;
}

}  // namespace tracekin
