#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "shopeval/embeddings.hpp"
#include "shopeval/synthetic.hpp"
#include "shopeval/training.hpp"

using namespace shopeval;

TEST_CASE("split_heldout_keys is deterministic, clamped, and order independent") {
    std::vector<std::string> keys;
    for (int i = 0; i < 30; ++i) keys.push_back("k" + std::to_string(i));

    auto a = split_heldout_keys(keys, 42, 0.10);
    auto b = split_heldout_keys(keys, 42, 0.10);
    CHECK(a == b);
    CHECK(a.size() == 3);

    std::vector<std::string> shuffled = keys;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(split_heldout_keys(shuffled, 42, 0.10) == a);

    auto c = split_heldout_keys(keys, 7, 0.10);
    CHECK(c.size() == 3);
    CHECK(c != a);  // overwhelmingly likely for 30 choose 3

    CHECK(split_heldout_keys(keys, 42, 0.0).size() == 1);
    CHECK(split_heldout_keys(keys, 42, 1.0).size() == keys.size() - 1);

    for (const auto& k : a) CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
}

TEST_CASE("relevance negatives draw one of each kind") {
    Catalog cat = shopeval::testing::small_catalog();
    InteractionTable positives;
    positives.rows.push_back({"u1", "a1", 5.0, 100, true});
    positives.rows.push_back({"u1", "b1", 5.0, 200, true});

    Rng rng(42);
    for (int i = 0; i < 20; ++i) {
        NegativeSample neg = sample_negatives_relevance("u1", "a1", cat, positives, rng);
        REQUIRE(neg.items.size() == 3);
        CHECK_FALSE(neg.hard_fallback);
        CHECK_FALSE(neg.cross_fallback);
        // hard negative: same subcategory as a1, not interacted
        CHECK(cat.subcategory_of(neg.items[0]) == "guitars");
        CHECK(neg.items[0] != "a1");
        CHECK(neg.items[0] != "b1");
        // cross negative: different subcategory
        CHECK(cat.subcategory_of(neg.items[1]) != "guitars");
        for (const auto& id : neg.items) {
            CHECK(cat.has(id));
            CHECK(id != "a1");
        }
    }
}

TEST_CASE("relevance negatives flag degenerate pools") {
    // single-subcategory catalog: no cross-subcategory negative exists
    std::vector<CatalogItem> items = {
        shopeval::testing::item("s1", "One", "first item in the lone subcategory", "solo"),
        shopeval::testing::item("s2", "Two", "second item in the lone subcategory", "solo"),
        shopeval::testing::item("s3", "Three", "third item in the lone subcategory", "solo")};
    Catalog cat(std::move(items));
    InteractionTable positives;
    positives.rows.push_back({"u1", "s1", 5.0, 100, true});

    Rng rng(7);
    NegativeSample neg = sample_negatives_relevance("u1", "s1", cat, positives, rng);
    REQUIRE(neg.items.size() == 3);
    CHECK_FALSE(neg.hard_fallback);
    CHECK(neg.cross_fallback);

    // user interacted with every same-subcategory item: hard pool is empty
    InteractionTable everything;
    everything.rows.push_back({"u2", "s1", 5.0, 100, true});
    everything.rows.push_back({"u2", "s2", 5.0, 200, true});
    everything.rows.push_back({"u2", "s3", 5.0, 300, true});
    NegativeSample starved = sample_negatives_relevance("u2", "s1", cat, everything, rng);
    CHECK(starved.hard_fallback);
}

TEST_CASE("complementarity training lifts recall on a planted clique world") {
    TrainingWorldConfig wcfg;
    wcfg.clusters = 12;
    wcfg.users = 60;
    wcfg.decoys_per_subcategory = 6;
    wcfg.embed_dim = 64;
    TrainingWorld world = make_training_world(wcfg);

    TrainConfig cfg;
    cfg.hidden_dim = 32;
    cfg.proj_dim = 16;
    cfg.comp_epochs = 2;

    ProjectionPair pair = train_complementarity(world.graph, world.matrix, cfg);
    CHECK(pair.meta.epochs_run == 2);
    CHECK(pair.meta.selected_epoch >= 1);
    CHECK(pair.h_a.in_dim() == 64);
    CHECK(pair.h_a.out_dim() == 16);

    std::vector<std::string> anchors;
    for (const auto& [id, nbrs] : world.graph.adjacency()) {
        (void)nbrs;
        anchors.push_back(id);
    }
    const double trained = complement_recall_at_k(pair, world.graph, world.matrix, anchors, 5);
    const double baseline = identity_recall_at_k(world.graph, world.matrix, anchors, 5);
    CHECK(trained >= baseline + 0.15);
}

TEST_CASE("training is reproducible for a fixed seed") {
    TrainingWorldConfig wcfg;
    wcfg.clusters = 6;
    wcfg.users = 24;
    wcfg.decoys_per_subcategory = 4;
    wcfg.embed_dim = 48;
    TrainingWorld world = make_training_world(wcfg);

    TrainConfig cfg;
    cfg.hidden_dim = 24;
    cfg.proj_dim = 12;
    cfg.comp_epochs = 1;

    ProjectionPair a = train_complementarity(world.graph, world.matrix, cfg);
    ProjectionPair b = train_complementarity(world.graph, world.matrix, cfg);
    CHECK((a.h_a.W1 - b.h_a.W1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.h_c.W2 - b.h_c.W2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.meta.val_metric == b.meta.val_metric);

    TrainConfig other = cfg;
    other.seed = 1234;
    ProjectionPair c = train_complementarity(world.graph, world.matrix, other);
    CHECK((a.h_a.W1 - c.h_a.W1).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("complementarity training rejects an empty graph") {
    Catalog cat = shopeval::testing::small_catalog();
    TestEmbedder embedder(42, 16);
    ItemMatrix matrix = embed_items(cat, embedder);
    PpmiGraph empty;
    CHECK_THROWS_AS(train_complementarity(empty, matrix, TrainConfig{}), std::runtime_error);
}

TEST_CASE("query head training lifts hit rate over the frozen base") {
    TrainingWorldConfig wcfg;
    wcfg.clusters = 10;
    wcfg.users = 50;
    wcfg.decoys_per_subcategory = 5;
    wcfg.embed_dim = 64;
    TrainingWorld world = make_training_world(wcfg);

    TrainConfig cfg;
    cfg.rel_epochs = 3;

    QueryHead trained = train_query_head(world.query_pairs, world.catalog, world.matrix,
                                         *world.provider, cfg);
    QueryHead untrained;
    untrained.head = LinearHead(world.matrix.dim());

    const double hit_trained =
        query_hit_at_k(trained, world.query_pairs, world.matrix, *world.provider, 5);
    const double hit_base =
        query_hit_at_k(untrained, world.query_pairs, world.matrix, *world.provider, 5);
    CHECK(hit_trained >= hit_base + 0.10);

    const double sub_match = subcategory_match_at_k(trained, world.query_pairs, world.catalog,
                                                    world.matrix, *world.provider, 5);
    CHECK(sub_match >= hit_trained);  // hitting the item implies matching its subcategory

    CHECK_THROWS_AS(train_query_head({}, world.catalog, world.matrix, *world.provider, cfg),
                    std::runtime_error);
}
