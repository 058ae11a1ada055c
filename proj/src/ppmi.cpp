#include "shopeval/ppmi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "shopeval/text.hpp"

namespace shopeval {

int64_t CoPurchaseCounts::count(const std::string& a, const std::string& b) const {
    if (a == b) return 0;
    auto it = pairs.find(make_item_pair(a, b));
    return it == pairs.end() ? 0 : it->second;
}

int64_t CoPurchaseCounts::marginal(const std::string& a) const {
    auto it = marginals.find(a);
    return it == marginals.end() ? 0 : it->second;
}

double PpmiGraph::weight(const std::string& a, const std::string& b) const {
    const ItemPair key = make_item_pair(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const PpmiEdge& e, const ItemPair& k) {
        return ItemPair{e.a, e.b} < k;
    });
    if (it == edges.end() || it->a != key.first || it->b != key.second) return 0.0;
    return it->weight;
}

bool PpmiGraph::has_edge(const std::string& a, const std::string& b) const {
    const ItemPair key = make_item_pair(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const PpmiEdge& e, const ItemPair& k) {
        return ItemPair{e.a, e.b} < k;
    });
    return it != edges.end() && it->a == key.first && it->b == key.second;
}

std::map<std::string, std::vector<std::string>> PpmiGraph::adjacency() const {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& [id, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

CoPurchaseCounts extract_copurchase_pairs(const InteractionTable& positives, int64_t window_days) {
    const int64_t window = (window_days + 1) * 86400;

    CoPurchaseCounts counts;
    std::set<std::pair<std::string, ItemPair>> seen;  // (user, pair) counted once

    // Rows are sorted by (user, timestamp), so scan each user's run with a
    // sliding window over timestamps.
    const auto& rows = positives.rows;
    size_t user_start = 0;
    while (user_start < rows.size()) {
        size_t user_end = user_start;
        while (user_end < rows.size() && rows[user_end].user_id == rows[user_start].user_id) {
            ++user_end;
        }
        size_t lo = user_start;
        for (size_t i = user_start; i < user_end; ++i) {
            if (!rows[i].positive) continue;
            while (lo < i && rows[i].timestamp - rows[lo].timestamp >= window) ++lo;
            for (size_t j = lo; j < i; ++j) {
                if (!rows[j].positive) continue;
                if (rows[j].item_id == rows[i].item_id) continue;
                seen.insert({rows[i].user_id, make_item_pair(rows[i].item_id, rows[j].item_id)});
            }
        }
        user_start = user_end;
    }

    for (const auto& [user, pair] : seen) {
        (void)user;
        ++counts.pairs[pair];
    }
    for (const auto& [pair, c] : counts.pairs) {
        counts.marginals[pair.first] += c;
        counts.marginals[pair.second] += c;
    }
    for (const auto& [id, m] : counts.marginals) {
        (void)id;
        counts.total += m;
    }
    return counts;
}

PpmiGraph build_ppmi_graph(const CoPurchaseCounts& counts, double threshold) {
    if (counts.total <= 0) throw std::runtime_error("co-purchase graph has no mass");
    PpmiGraph graph;
    graph.threshold = threshold;
    for (const auto& [pair, c] : counts.pairs) {
        const double ma = static_cast<double>(counts.marginal(pair.first));
        const double mb = static_cast<double>(counts.marginal(pair.second));
        const double w = std::log2(static_cast<double>(c) * static_cast<double>(counts.total) /
                                   (ma * mb));
        if (w >= threshold) graph.edges.push_back({pair.first, pair.second, w});
    }
    return graph;
}

void write_ppmi_graph(const PpmiGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# ppmi v1 threshold " << format_double(graph.threshold) << '\n';
    for (const auto& e : graph.edges) {
        out << e.a << '\t' << e.b << '\t' << format_double(e.weight) << '\n';
    }
}

PpmiGraph read_ppmi_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    PpmiGraph graph;
    std::string line;
    if (!std::getline(in, line) || !starts_with(line, "# ppmi v1 threshold ")) {
        throw std::runtime_error(path + ": bad graph header");
    }
    graph.threshold = std::stod(line.substr(std::string("# ppmi v1 threshold ").size()));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        PpmiEdge e;
        if (!(row >> e.a >> e.b >> e.weight)) throw std::runtime_error(path + ": bad edge line");
        graph.edges.push_back(std::move(e));
    }
    return graph;
}

}  // namespace shopeval
