#pragma once

// Products of groups, cumulants of groups, multiplication by initial env
// densities and free streaming of the trace, evaluated on phase points.
//
// An operator chain O_1 O_2 ... O_k applied to a terminal function g at a
// point z is evaluated left to right: each group moves the point, each weight
// multiplies the running product, and each cumulant branches over the
// partitions of its atoms.

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "tracekin/combinatorics.hpp"
#include "tracekin/dynamics.hpp"
#include "tracekin/model.hpp"

namespace tracekin {

/// Cumulant of groups over `atoms`. Each atom is a list of global particle
/// indices that always move together (the frozen cluster is one atom). A group
/// S(tau) evaluates its argument at the hard-sphere flow of its block by tau,
/// so S(-t) is `groupTime = -t`.
struct CumulantOp {
    std::vector<std::vector<int>> atoms;
    double groupTime = 0.0;
};

/// Multiplication by the initial env density of `members` times the allowed-pair
/// factors between the trace and each member.
struct EnvWeightOp {
    std::vector<int> members;
};

/// Free streaming of the trace alone: q <- q + groupTime * p / M.
struct TraceShiftOp {
    double groupTime = 0.0;
};

using ChainOp = std::variant<CumulantOp, EnvWeightOp, TraceShiftOp>;

struct Chain {
    double coefficient = 1.0;
    std::vector<ChainOp> ops;
};

using OperatorSum = std::vector<Chain>;

/// Density of m env particles, including their mutual allowed-pair factors.
using EnvDensity = std::function<double(std::span<const PhasePoint>)>;
/// Function of all particles (index 0 = trace) at the end of a chain.
using ChainTerminal = std::function<double(std::span<const PhasePoint>)>;

struct ChainContext {
    SphereParams params;
    EnvDensity envDensity;
    EventResolution resolution;
};

struct OperatorValue {
    double value = 0.0;
    bool degenerate = false;
};

OperatorValue evaluateChain(const Chain& chain, std::span<const PhasePoint> particles, const ChainContext& ctx,
                            const ChainTerminal& terminal);
OperatorValue evaluateSum(const OperatorSum& sum, std::span<const PhasePoint> particles, const ChainContext& ctx,
                          const ChainTerminal& terminal);

/// Atoms of the label set: the cluster {0, 1..s} followed by singletons s+1..s+n.
std::vector<std::vector<int>> clusterAtoms(const LabelSet& labels);

/// Applies the cumulant of order 1+n built from S(-t) to `f`. `traceBlock`
/// holds the trace and the s fixed env particles; `freeParticles` the n others.
GroupValue cumulantApply(int n, double t, const PhaseFunction& f, const SystemState& traceBlock,
                         std::span<const PhasePoint> freeParticles, const SphereParams& params,
                         const EventResolution& resolution = {});

struct InversionReport {
    int order = 0;
    double maxResidual = 0.0;
    long evaluated = 0;
    long degenerate = 0;
    double tolerance = 1e-9;
    bool passed() const { return evaluated > 0 && maxResidual <= tolerance; }
};

/// Residual of S(-t) f = sum_P prod_{blocks} A_block(-t) f over the given
/// states, each holding s = clusterEnvCount fixed env particles and n free ones.
InversionReport verifyClusterInversion(int n, double t, const PhaseFunction& f, std::span<const SystemState> samples,
                                       int clusterEnvCount, const SphereParams& params,
                                       const EventResolution& resolution = {});

}  // namespace tracekin
