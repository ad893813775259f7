#include "tracekin/combinatorics.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace tracekin {

std::vector<int> LabelSet::expand(int label) const {
    if (label < 0 || label > freeCount) throw std::out_of_range{"label outside the label set"};
    if (label > 0) return {clusterEnvCount + label};
    std::vector<int> particles(static_cast<std::size_t>(clusterEnvCount + 1));
    std::iota(particles.begin(), particles.end(), 0);
    return particles;
}

double Partition::cumulantWeight() const {
    const int k = blockCount();
    return (k % 2 == 1 ? 1.0 : -1.0) * factorial(k - 1);
}

namespace {

std::vector<Partition> buildPartitions(int size) {
    std::vector<Partition> out;
    // Restricted growth string: code[0] = 0, code[i] <= 1 + max(code[0..i-1]).
    std::vector<int> code(static_cast<std::size_t>(size), 0);
    while (true) {
        Partition p;
        for (int i = 0; i < size; ++i) {
            const auto block = static_cast<std::size_t>(code[static_cast<std::size_t>(i)]);
            if (block == p.blocks.size()) p.blocks.emplace_back();
            p.blocks[block].push_back(i);
        }
        out.push_back(std::move(p));

        int i = size - 1;
        for (; i > 0; --i) {
            int prefixMax = 0;
            for (int j = 0; j < i; ++j) prefixMax = std::max(prefixMax, code[static_cast<std::size_t>(j)]);
            if (code[static_cast<std::size_t>(i)] <= prefixMax) {
                ++code[static_cast<std::size_t>(i)];
                for (int j = i + 1; j < size; ++j) code[static_cast<std::size_t>(j)] = 0;
                break;
            }
        }
        if (i == 0) break;
    }
    return out;
}

}  // namespace

const std::vector<Partition>& partitionsOfSize(int size) {
    if (size < 1 || size > kMaxPartitionSize)
        throw std::invalid_argument{"partition enumeration supports 1 to 8 labels"};
    static const auto table = [] {
        std::array<std::vector<Partition>, kMaxPartitionSize + 1> t;
        for (int k = 1; k <= kMaxPartitionSize; ++k) t[static_cast<std::size_t>(k)] = buildPartitions(k);
        return t;
    }();
    return table[static_cast<std::size_t>(size)];
}

const std::vector<Partition>& enumeratePartitions(const LabelSet& set) { return partitionsOfSize(set.size()); }

std::uint64_t bellNumber(int size) {
    // Bell triangle.
    std::vector<std::uint64_t> row{1};
    for (int i = 1; i < size; ++i) {
        std::vector<std::uint64_t> next{row.back()};
        for (auto v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return size <= 0 ? 1 : row.back();
}

int Composition::total() const { return std::accumulate(parts.begin(), parts.end(), 0); }

std::vector<Composition> enumerateCompositions(int order) {
    if (order < 0 || order > kMaxCompositionOrder)
        throw std::invalid_argument{"composition enumeration supports orders 0 to 8"};
    std::vector<Composition> out{Composition{}};
    std::vector<Composition> previous{Composition{}};
    for (int k = 1; k <= order; ++k) {
        std::vector<Composition> current;
        for (const auto& c : previous) {
            const int room = order - c.total();
            for (int m = 1; m <= room; ++m) {
                Composition next = c;
                next.parts.push_back(m);
                current.push_back(std::move(next));
            }
        }
        out.insert(out.end(), current.begin(), current.end());
        previous = std::move(current);
    }
    return out;
}

double factorial(int n) {
    if (n < 0) throw std::invalid_argument{"factorial of a negative number"};
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace tracekin
