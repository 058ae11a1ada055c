#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shopeval/catalog.hpp"

namespace shopeval {

using ItemPair = std::pair<std::string, std::string>;  // stored with first < second

inline ItemPair make_item_pair(const std::string& a, const std::string& b) {
    return a < b ? ItemPair{a, b} : ItemPair{b, a};
}

struct CoPurchaseCounts {
    std::map<ItemPair, int64_t> pairs;       // unordered pair -> count
    std::map<std::string, int64_t> marginals;  // M(a) = sum_j C(a, j)
    int64_t total = 0;                         // N = sum_a M(a)

    int64_t count(const std::string& a, const std::string& b) const;
    int64_t marginal(const std::string& a) const;
};

struct PpmiEdge {
    std::string a;  // a < b
    std::string b;
    double weight = 0.0;
};

struct PpmiGraph {
    std::vector<PpmiEdge> edges;  // sorted by (a, b)
    double threshold = 0.0;

    double weight(const std::string& a, const std::string& b) const;  // 0 if absent
    bool has_edge(const std::string& a, const std::string& b) const;
    // Neighbor lists for both endpoints, sorted by id.
    std::map<std::string, std::vector<std::string>> adjacency() const;
};

// Count distinct users who positively interacted with both items of a pair
// within the window: |t_a - t_b| < (window_days + 1) * 86400 seconds, i.e.
// window_days = 0 means "less than one full day".
CoPurchaseCounts extract_copurchase_pairs(const InteractionTable& positives, int64_t window_days = 0);

// PMI(a,b) = log2(C(a,b) * N / (M(a) * M(b))); edges with weight < threshold
// are dropped (weight == threshold is kept).
PpmiGraph build_ppmi_graph(const CoPurchaseCounts& counts, double threshold = 0.0);

void write_ppmi_graph(const PpmiGraph& graph, const std::string& path);
PpmiGraph read_ppmi_graph(const std::string& path);

}  // namespace shopeval
