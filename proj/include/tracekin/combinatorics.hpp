#pragma once

// Index sets of the cumulant and scattering-operator sums.

#include <cstdint>
#include <vector>

namespace tracekin {

inline constexpr int kMaxPartitionSize = 8;
inline constexpr int kMaxCompositionOrder = 8;

/// Labels of a cumulant of order 1+n: label 0 is the frozen cluster (the trace
/// together with the s fixed env particles), labels 1..n are the free env
/// particles s+1..s+n. The cluster counts as a single label.
struct LabelSet {
    int clusterEnvCount = 0;  ///< s
    int freeCount = 0;        ///< n

    int size() const { return 1 + freeCount; }
    /// Global particle indices (0 = trace) carried by `label`.
    std::vector<int> expand(int label) const;
};

struct Partition {
    /// Blocks of labels, each sorted ascending; blocks ordered by smallest label.
    std::vector<std::vector<int>> blocks;

    int blockCount() const { return static_cast<int>(blocks.size()); }
    /// (-1)^{|P|-1} (|P|-1)!
    double cumulantWeight() const;
};

/// All set partitions of {0, ..., size-1} in restricted-growth-string order.
/// Cached; throws std::invalid_argument unless 1 <= size <= kMaxPartitionSize.
const std::vector<Partition>& partitionsOfSize(int size);

/// Partitions of `set`, one per set partition of its labels.
const std::vector<Partition>& enumeratePartitions(const LabelSet& set);

std::uint64_t bellNumber(int size);

struct Composition {
    std::vector<int> parts;  ///< (m_1, ..., m_k), each >= 1

    int length() const { return static_cast<int>(parts.size()); }
    int total() const;
    double sign() const { return parts.size() % 2 == 0 ? 1.0 : -1.0; }
    /// n - sum of parts for the ambient order n.
    int residual(int order) const { return order - total(); }

    bool operator==(const Composition&) const = default;
};

/// Every ordered tuple of positive parts with sum <= order, the empty tuple
/// included, grouped by length and lexicographic within a length.
/// Throws std::invalid_argument unless 0 <= order <= kMaxCompositionOrder.
std::vector<Composition> enumerateCompositions(int order);

double factorial(int n);
double binomial(int n, int k);

}  // namespace tracekin
