#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "tracekin/combinatorics.hpp"

using namespace tracekin;

namespace {

using Blocks = std::vector<std::vector<int>>;

// Independent enumeration: place element i into each existing block or a new one.
void bruteForcePartitions(int i, int size, Blocks& current, std::set<Blocks>& out) {
    if (i == size) {
        Blocks sorted = current;
        for (auto& b : sorted) std::sort(b.begin(), b.end());
        std::sort(sorted.begin(), sorted.end());
        out.insert(sorted);
        return;
    }
    for (std::size_t b = 0; b < current.size(); ++b) {
        current[b].push_back(i);
        bruteForcePartitions(i + 1, size, current, out);
        current[b].pop_back();
    }
    current.push_back({i});
    bruteForcePartitions(i + 1, size, current, out);
    current.pop_back();
}

std::set<Blocks> canonical(const std::vector<Partition>& ps) {
    std::set<Blocks> out;
    for (const auto& p : ps) {
        Blocks b = p.blocks;
        std::sort(b.begin(), b.end());
        out.insert(b);
    }
    return out;
}

}  // namespace

TEST(Partitions, SmallCounts) {
    EXPECT_EQ(enumeratePartitions(LabelSet{2, 0}).size(), 1u);
    EXPECT_EQ(enumeratePartitions(LabelSet{0, 2}).size(), 5u);
    EXPECT_EQ(enumeratePartitions(LabelSet{1, 3}).size(), 15u);
}

TEST(Partitions, BellNumbersUpToEight) {
    const std::uint64_t bell[] = {1, 2, 5, 15, 52, 203, 877, 4140};
    for (int k = 1; k <= 8; ++k) {
        EXPECT_EQ(partitionsOfSize(k).size(), bell[k - 1]);
        EXPECT_EQ(bellNumber(k), bell[k - 1]);
    }
}

TEST(Partitions, MatchBruteForceExactlyOnce) {
    for (int k = 1; k <= 6; ++k) {
        std::set<Blocks> expected;
        Blocks current;
        bruteForcePartitions(0, k, current, expected);
        const auto& ps = partitionsOfSize(k);
        EXPECT_EQ(canonical(ps), expected);
        EXPECT_EQ(canonical(ps).size(), ps.size());
    }
}

TEST(Partitions, BlocksCoverTheSet) {
    for (const auto& p : partitionsOfSize(5)) {
        std::vector<int> all;
        for (const auto& b : p.blocks) {
            EXPECT_FALSE(b.empty());
            all.insert(all.end(), b.begin(), b.end());
        }
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, (std::vector<int>{0, 1, 2, 3, 4}));
    }
}

TEST(Partitions, SizeCap) {
    EXPECT_THROW(partitionsOfSize(9), std::invalid_argument);
    EXPECT_THROW(partitionsOfSize(0), std::invalid_argument);
}

TEST(Partitions, CumulantWeightsSumToZero) {
    for (int k = 2; k <= 8; ++k) {
        double sum = 0.0;
        for (const auto& p : partitionsOfSize(k)) sum += p.cumulantWeight();
        EXPECT_EQ(sum, 0.0) << k;
    }
    EXPECT_EQ(partitionsOfSize(1)[0].cumulantWeight(), 1.0);
}

TEST(LabelSet, ClusterExpandsToTraceAndFixedParticles) {
    const LabelSet labels{2, 3};
    EXPECT_EQ(labels.size(), 4);
    EXPECT_EQ(labels.expand(0), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(labels.expand(1), (std::vector<int>{3}));
    EXPECT_EQ(labels.expand(3), (std::vector<int>{5}));
    EXPECT_THROW(labels.expand(4), std::out_of_range);
}

TEST(Compositions, Examples) {
    EXPECT_EQ(enumerateCompositions(0), (std::vector<Composition>{{}}));
    const std::vector<Composition> two{{}, {{1}}, {{2}}, {{1, 1}}};
    EXPECT_EQ(enumerateCompositions(2), two);
    EXPECT_EQ(enumerateCompositions(3).size(), 8u);
}

TEST(Compositions, MatchBruteForceCounts) {
    for (int n = 0; n <= 8; ++n) {
        // Count tuples with parts in 1..n, length <= n and sum <= n by odometer.
        std::size_t count = 0;
        for (int k = 0; k <= n; ++k) {
            std::vector<int> parts(static_cast<std::size_t>(k), 1);
            while (true) {
                int sum = 0;
                for (int m : parts) sum += m;
                if (sum <= n) ++count;
                int i = k - 1;
                while (i >= 0 && parts[static_cast<std::size_t>(i)] == n) parts[static_cast<std::size_t>(i--)] = 1;
                if (i < 0) break;
                ++parts[static_cast<std::size_t>(i)];
            }
        }
        const auto comps = enumerateCompositions(n);
        EXPECT_EQ(comps.size(), count) << n;
        EXPECT_EQ(comps.size(), std::size_t{1} << n) << n;
        for (const auto& c : comps) {
            EXPECT_GE(c.residual(n), 0);
            EXPECT_EQ(c.sign(), c.length() % 2 == 0 ? 1.0 : -1.0);
        }
    }
    EXPECT_THROW(enumerateCompositions(9), std::invalid_argument);
}

TEST(Factorials, Values) {
    EXPECT_EQ(factorial(0), 1.0);
    EXPECT_EQ(factorial(5), 120.0);
    EXPECT_EQ(binomial(4, 2), 6.0);
    EXPECT_EQ(binomial(3, 5), 0.0);
}
