#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "shopeval/ppmi.hpp"
#include "shopeval/rng.hpp"

using namespace shopeval;

namespace {

InteractionTable sorted_table(std::vector<Interaction> rows) {
    std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
        return std::tie(a.user_id, a.timestamp, a.item_id) < std::tie(b.user_id, b.timestamp, b.item_id);
    });
    InteractionTable table;
    table.rows = std::move(rows);
    return table;
}

CoPurchaseCounts oracle_counts(const InteractionTable& table, int64_t window_days) {
    const int64_t window = (window_days + 1) * 86400;
    std::set<std::pair<std::string, ItemPair>> seen;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        for (size_t j = i + 1; j < table.rows.size(); ++j) {
            const auto& a = table.rows[i];
            const auto& b = table.rows[j];
            if (a.user_id != b.user_id || !a.positive || !b.positive) continue;
            if (a.item_id == b.item_id) continue;
            if (std::llabs(a.timestamp - b.timestamp) >= window) continue;
            seen.insert({a.user_id, make_item_pair(a.item_id, b.item_id)});
        }
    }
    CoPurchaseCounts counts;
    for (const auto& [user, pair] : seen) {
        (void)user;
        counts.pairs[pair] += 1;
    }
    for (const auto& [pair, c] : counts.pairs) {
        counts.marginals[pair.first] += c;
        counts.marginals[pair.second] += c;
        counts.total += 2 * c;
    }
    return counts;
}

}  // namespace

TEST_CASE("three-item worked example reproduces exact pmi weights") {
    // one user bought {a,b}, three bought {a,c}, two bought {b,c}
    std::vector<Interaction> rows;
    auto both = [&](const std::string& user, const std::string& x, const std::string& y) {
        rows.push_back({user, x, 5.0, 1000, true});
        rows.push_back({user, y, 5.0, 2000, true});
    };
    both("u1", "a", "b");
    both("u2", "a", "c");
    both("u3", "a", "c");
    both("u4", "a", "c");
    both("u5", "b", "c");
    both("u6", "b", "c");

    CoPurchaseCounts counts = extract_copurchase_pairs(sorted_table(std::move(rows)), 0);
    CHECK(counts.count("a", "b") == 1);
    CHECK(counts.count("b", "a") == 1);
    CHECK(counts.count("a", "c") == 3);
    CHECK(counts.count("b", "c") == 2);
    CHECK(counts.count("a", "a") == 0);
    CHECK(counts.marginal("a") == 4);
    CHECK(counts.marginal("b") == 3);
    CHECK(counts.marginal("c") == 5);
    CHECK(counts.marginal("zz") == 0);
    CHECK(counts.total == 12);

    PpmiGraph graph = build_ppmi_graph(counts, 0.0);
    REQUIRE(graph.edges.size() == 3);
    CHECK(std::abs(graph.weight("a", "c") - std::log2(1.8)) <= 1e-12);
    CHECK(std::abs(graph.weight("a", "c") - 0.8479969065549501) <= 1e-12);
    CHECK(std::abs(graph.weight("a", "b") - std::log2(1.0 * 12.0 / (4.0 * 3.0))) <= 1e-12);
    CHECK(std::abs(graph.weight("b", "c") - std::log2(2.0 * 12.0 / (3.0 * 5.0))) <= 1e-12);
}

TEST_CASE("extraction matches a brute-force oracle on random tables") {
    Rng rng(0xfeed);
    const std::vector<int64_t> windows = {0, 1, 3};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Interaction> rows;
        const size_t users = 2 + rng.uniform_index(20);
        for (size_t u = 0; u < users; ++u) {
            const size_t n = 1 + rng.uniform_index(6);
            for (size_t r = 0; r < n; ++r) {
                Interaction row;
                row.user_id = "u" + std::to_string(u);
                row.item_id = "i" + std::to_string(rng.uniform_index(8));
                row.rating = rng.uniform_index(2) == 0 ? 5.0 : 2.0;
                row.positive = row.rating >= 4.0;
                row.timestamp = static_cast<int64_t>(rng.uniform_index(5 * 86400));
                rows.push_back(std::move(row));
            }
        }
        InteractionTable table = sorted_table(std::move(rows));
        const int64_t window_days = windows[trial % windows.size()];

        CoPurchaseCounts got = extract_copurchase_pairs(table, window_days);
        CoPurchaseCounts want = oracle_counts(table, window_days);
        CHECK(got.pairs == want.pairs);
        CHECK(got.marginals == want.marginals);
        CHECK(got.total == want.total);

        PpmiGraph graph = build_ppmi_graph(got, 0.0);
        for (const auto& e : graph.edges) {
            const double c = static_cast<double>(want.count(e.a, e.b));
            const double expect = std::log2(c * static_cast<double>(want.total) /
                                            (static_cast<double>(want.marginal(e.a)) *
                                             static_cast<double>(want.marginal(e.b))));
            CHECK(std::abs(e.weight - expect) <= 1e-12);
        }
    }
}

TEST_CASE("window boundary is strict") {
    auto pair_at = [](int64_t dt) {
        std::vector<Interaction> rows = {{"u1", "a", 5.0, 0, true}, {"u1", "b", 5.0, dt, true}};
        InteractionTable table;
        table.rows = std::move(rows);
        return extract_copurchase_pairs(table, 0).count("a", "b");
    };
    CHECK(pair_at(86399) == 1);
    CHECK(pair_at(86400) == 0);

    auto pair_at_w2 = [](int64_t dt) {
        std::vector<Interaction> rows = {{"u1", "a", 5.0, 0, true}, {"u1", "b", 5.0, dt, true}};
        InteractionTable table;
        table.rows = std::move(rows);
        return extract_copurchase_pairs(table, 2).count("a", "b");
    };
    CHECK(pair_at_w2(3 * 86400 - 1) == 1);
    CHECK(pair_at_w2(3 * 86400) == 0);
}

TEST_CASE("repeat purchases count once per user and pair") {
    std::vector<Interaction> rows = {{"u1", "a", 5.0, 0, true},   {"u1", "b", 5.0, 10, true},
                                     {"u1", "a", 5.0, 20, true},  {"u1", "b", 5.0, 30, true},
                                     {"u2", "a", 5.0, 0, true},   {"u2", "b", 5.0, 5, true}};
    CoPurchaseCounts counts = extract_copurchase_pairs(sorted_table(std::move(rows)), 0);
    CHECK(counts.count("a", "b") == 2);  // u1 once, u2 once
    CHECK(counts.total == 4);
}

TEST_CASE("non-positive rows never form pairs") {
    std::vector<Interaction> rows = {{"u1", "a", 5.0, 0, true},
                                     {"u1", "b", 2.0, 10, false},
                                     {"u1", "c", 5.0, 20, true}};
    CoPurchaseCounts counts = extract_copurchase_pairs(sorted_table(std::move(rows)), 0);
    CHECK(counts.count("a", "b") == 0);
    CHECK(counts.count("b", "c") == 0);
    CHECK(counts.count("a", "c") == 1);
}

TEST_CASE("threshold keeps edges at exact equality") {
    std::vector<Interaction> rows;
    auto both = [&](const std::string& user, const std::string& x, const std::string& y) {
        rows.push_back({user, x, 5.0, 1000, true});
        rows.push_back({user, y, 5.0, 2000, true});
    };
    both("u1", "a", "b");
    both("u2", "a", "c");
    both("u3", "a", "c");
    both("u4", "a", "c");
    both("u5", "b", "c");
    both("u6", "b", "c");
    CoPurchaseCounts counts = extract_copurchase_pairs(sorted_table(std::move(rows)), 0);

    const double w_ac = std::log2(1.8);
    PpmiGraph at = build_ppmi_graph(counts, w_ac);
    CHECK(at.threshold == doctest::Approx(w_ac));
    CHECK(at.has_edge("a", "c"));
    CHECK_FALSE(at.has_edge("a", "b"));
    CHECK_FALSE(at.has_edge("b", "c"));

    PpmiGraph above = build_ppmi_graph(counts, w_ac + 1e-12);
    CHECK_FALSE(above.has_edge("a", "c"));
}

TEST_CASE("adjacency lists are symmetric and sorted") {
    CoPurchaseCounts counts;
    counts.pairs[make_item_pair("b", "a")] = 2;
    counts.pairs[make_item_pair("c", "a")] = 1;
    counts.marginals["a"] = 3;
    counts.marginals["b"] = 2;
    counts.marginals["c"] = 1;
    counts.total = 6;
    PpmiGraph graph = build_ppmi_graph(counts, -100.0);
    auto adj = graph.adjacency();
    CHECK(adj["a"] == std::vector<std::string>{"b", "c"});
    CHECK(adj["b"] == std::vector<std::string>{"a"});
    CHECK(adj["c"] == std::vector<std::string>{"a"});
    REQUIRE(graph.edges.size() == 2);
    CHECK(graph.edges[0].a == "a");
    CHECK(graph.edges[0].b == "b");
    CHECK(graph.edges[1].b == "c");
}

TEST_CASE("graph files round-trip exactly") {
    CoPurchaseCounts counts;
    counts.pairs[make_item_pair("a", "b")] = 1;
    counts.pairs[make_item_pair("a", "c")] = 3;
    counts.pairs[make_item_pair("b", "c")] = 2;
    counts.marginals["a"] = 4;
    counts.marginals["b"] = 3;
    counts.marginals["c"] = 5;
    counts.total = 12;
    PpmiGraph graph = build_ppmi_graph(counts, 0.1);

    const std::string path = "/tmp/shopeval_graph.ppmi";
    write_ppmi_graph(graph, path);
    PpmiGraph loaded = read_ppmi_graph(path);
    CHECK(loaded.threshold == graph.threshold);
    REQUIRE(loaded.edges.size() == graph.edges.size());
    for (size_t i = 0; i < graph.edges.size(); ++i) {
        CHECK(loaded.edges[i].a == graph.edges[i].a);
        CHECK(loaded.edges[i].b == graph.edges[i].b);
        CHECK(loaded.edges[i].weight == graph.edges[i].weight);
    }
}
