#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "shopeval/queries.hpp"
#include "shopeval/rng.hpp"

using namespace shopeval;

namespace {

json comparative_json() {
    return json{{"key", "k1"},
                {"query", "compare quiet fans"},
                {"task_type", "comparative_shopping"},
                {"target_item", "p1"}};
}

json bundle_json() {
    return json{{"key", "k2"},
                {"query", "complete setup for a desk"},
                {"task_type", "bundle"},
                {"target_item", "p1"},
                {"bundle_items", json::array({"p1", "p2", "p3"})}};
}

}  // namespace

TEST_CASE("task type names round-trip") {
    CHECK(task_type_name(TaskType::comparative_shopping) == "comparative_shopping");
    CHECK(task_type_name(TaskType::bundle) == "bundle");
    CHECK(task_type_from_name("bundle") == TaskType::bundle);
    CHECK(task_type_from_name("comparative_shopping") == TaskType::comparative_shopping);
    CHECK_THROWS_AS(task_type_from_name("retrieval"), std::runtime_error);
}

TEST_CASE("targets depend on the task type") {
    QueryInstance comp = query_instance_from_json(comparative_json());
    CHECK(comp.targets() == std::set<std::string>{"p1"});

    QueryInstance bundle = query_instance_from_json(bundle_json());
    CHECK(bundle.targets() == std::set<std::string>{"p1", "p2", "p3"});
}

TEST_CASE("query instances round-trip through json") {
    for (const json& j : {comparative_json(), bundle_json()}) {
        QueryInstance q = query_instance_from_json(j);
        CHECK(query_instance_to_json(q) == j);
    }
}

TEST_CASE("schema violations name the key and field") {
    SUBCASE("missing key") {
        CHECK_THROWS_WITH_AS(query_instance_from_json(json{{"query", "q"}}),
                             "query instance \"<missing>\": field \"key\" must be a non-empty string",
                             std::runtime_error);
    }
    SUBCASE("empty query") {
        json j = comparative_json();
        j["query"] = "";
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k1\": field \"query\" must be a non-empty string",
                             std::runtime_error);
    }
    SUBCASE("unknown task type") {
        json j = comparative_json();
        j["task_type"] = "retrieval";
        CHECK_THROWS_WITH_AS(
            query_instance_from_json(j),
            "query instance \"k1\": field \"task_type\" must be \"comparative_shopping\" or \"bundle\"",
            std::runtime_error);
    }
    SUBCASE("missing target") {
        json j = comparative_json();
        j.erase("target_item");
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k1\": field \"target_item\" must be a non-empty string",
                             std::runtime_error);
    }
    SUBCASE("bundle without items") {
        json j = bundle_json();
        j.erase("bundle_items");
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k2\": field \"bundle_items\" is required for bundle tasks",
                             std::runtime_error);
    }
    SUBCASE("bundle items must be strings") {
        json j = bundle_json();
        j["bundle_items"] = json::array({"p1", 2, "p3"});
        CHECK_THROWS_AS(query_instance_from_json(j), std::runtime_error);
    }
    SUBCASE("duplicate bundle items") {
        json j = bundle_json();
        j["bundle_items"] = json::array({"p1", "p2", "p2"});
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k2\": field \"bundle_items\" must not contain duplicates",
                             std::runtime_error);
    }
    SUBCASE("bundle size bounds") {
        json j = bundle_json();
        j["bundle_items"] = json::array({"p1", "p2"});
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k2\": field \"bundle_items\" must hold between 3 and 7 items",
                             std::runtime_error);
        json big = bundle_json();
        big["bundle_items"] =
            json::array({"p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8"});
        CHECK_THROWS_AS(query_instance_from_json(big), std::runtime_error);
    }
    SUBCASE("bundle must include the target") {
        json j = bundle_json();
        j["target_item"] = "p9";
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k2\": field \"bundle_items\" must include target_item",
                             std::runtime_error);
    }
    SUBCASE("comparative tasks reject bundle items") {
        json j = comparative_json();
        j["bundle_items"] = json::array({"p1", "p2", "p3"});
        CHECK_THROWS_WITH_AS(query_instance_from_json(j),
                             "query instance \"k1\": field \"bundle_items\" is only allowed for bundle tasks",
                             std::runtime_error);
    }
}

TEST_CASE("query files round-trip and reject duplicate keys") {
    const std::string path = "/tmp/shopeval_queries_roundtrip.jsonl";
    std::vector<QueryInstance> instances = {query_instance_from_json(comparative_json()),
                                            query_instance_from_json(bundle_json())};
    write_query_file(path, instances);
    std::vector<QueryInstance> loaded = load_query_file(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].key == "k1");
    CHECK(loaded[1].key == "k2");
    CHECK(query_instance_to_json(loaded[1]) == bundle_json());

    instances.push_back(query_instance_from_json(comparative_json()));
    write_query_file(path, instances);
    CHECK_THROWS_WITH_AS(load_query_file(path), "duplicate query key: k1", std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("bundle validation cleans a messy proposal") {
    const std::set<std::string> pool = {"a0", "a2", "a3", "a4", "a5"};
    auto cleaned = validate_bundle({"zz", "a2", "a2", "a3"}, "a0", pool);
    REQUIRE(cleaned.has_value());
    CHECK(*cleaned == std::vector<std::string>{"a0", "a2", "a3"});
}

TEST_CASE("bundle validation keeps an anchor already in place") {
    const std::set<std::string> pool = {"a0", "a2", "a3"};
    auto cleaned = validate_bundle({"a2", "a0", "a3"}, "a0", pool);
    REQUIRE(cleaned.has_value());
    CHECK(*cleaned == std::vector<std::string>{"a2", "a0", "a3"});
}

TEST_CASE("bundle validation rejects undersized results") {
    const std::set<std::string> pool = {"a0", "a2"};
    CHECK_FALSE(validate_bundle({}, "a0", pool).has_value());
    CHECK_FALSE(validate_bundle({"a2"}, "a0", pool).has_value());
    CHECK(validate_bundle({"a2"}, "a0", pool, 2).has_value());
}

TEST_CASE("bundle validation truncates and re-fronts the anchor") {
    std::set<std::string> pool = {"a"};
    std::vector<std::string> proposed;
    for (int i = 1; i <= 8; ++i) {
        pool.insert("x" + std::to_string(i));
        proposed.push_back("x" + std::to_string(i));
    }

    SUBCASE("anchor beyond the cut gets re-fronted") {
        proposed.push_back("a");
        auto cleaned = validate_bundle(proposed, "a", pool);
        REQUIRE(cleaned.has_value());
        CHECK(*cleaned ==
              std::vector<std::string>{"a", "x1", "x2", "x3", "x4", "x5", "x6"});
    }
    SUBCASE("anchor inside the cut keeps its slot") {
        proposed.insert(proposed.begin(), "a");
        auto cleaned = validate_bundle(proposed, "a", pool);
        REQUIRE(cleaned.has_value());
        CHECK(*cleaned ==
              std::vector<std::string>{"a", "x1", "x2", "x3", "x4", "x5", "x6"});
    }
}

TEST_CASE("bundle validation is idempotent") {
    std::set<std::string> pool;
    std::vector<std::string> universe;
    for (int i = 0; i < 12; ++i) {
        const std::string id = "i" + std::to_string(i);
        pool.insert(id);
        universe.push_back(id);
    }
    universe.push_back("ghost1");
    universe.push_back("ghost2");

    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> proposed;
        const size_t len = rng.uniform_index(12);
        for (size_t i = 0; i < len; ++i) {
            proposed.push_back(universe[rng.uniform_index(universe.size())]);
        }
        const std::string anchor = "i" + std::to_string(rng.uniform_index(12));
        auto once = validate_bundle(proposed, anchor, pool);
        if (!once) continue;
        CHECK(once->size() >= kBundleMin);
        CHECK(once->size() <= kBundleMax);
        CHECK(std::find(once->begin(), once->end(), anchor) != once->end());
        auto twice = validate_bundle(*once, anchor, pool);
        REQUIRE(twice.has_value());
        CHECK(*twice == *once);
    }
}
