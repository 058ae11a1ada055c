#pragma once

#include <memory>
#include <string>
#include <vector>

#include "shopeval/catalog.hpp"
#include "shopeval/embeddings.hpp"
#include "shopeval/ppmi.hpp"
#include "shopeval/queries.hpp"
#include "shopeval/training.hpp"

namespace shopeval {

// Planted-task world for tool-ablation and fault-injection runs. Each bundle
// task hides its targets behind the complement tool: the anchor alone matches
// the query token, and its complements share only a theme token invisible to
// the query. Comparative tasks resolve by search alone.
struct AblationWorldConfig {
    size_t bundle_tasks = 120;
    size_t comparative_tasks = 120;
    size_t subcategories = 8;
    size_t fillers_per_subcategory = 30;
    size_t embed_dim = 256;
    uint64_t seed = 42;
};

struct AblationWorld {
    Catalog catalog;
    std::shared_ptr<EmbeddingProvider> provider;
    ItemMatrix matrix;
    std::vector<QueryInstance> instances;
};

AblationWorld make_ablation_world(const AblationWorldConfig& cfg);

// Planted-cluster world for training-lift runs. Co-purchase clusters span
// subcategories and share one weak cluster token, while heavy subcategory
// tokens dominate raw cosine; queries use a chatter vocabulary absent from
// product texts. Raw embeddings rank both tasks near chance, so any lift
// comes from the trained projections.
struct TrainingWorldConfig {
    size_t clusters = 60;
    size_t cluster_size = 4;
    size_t subcategories = 8;
    size_t decoys_per_subcategory = 30;
    size_t users = 300;
    size_t embed_dim = 256;
    uint64_t seed = 7;
};

struct TrainingWorld {
    Catalog catalog;
    std::shared_ptr<EmbeddingProvider> provider;
    ItemMatrix matrix;
    InteractionTable interactions;
    PpmiGraph graph;
    std::vector<QueryPair> query_pairs;
};

TrainingWorld make_training_world(const TrainingWorldConfig& cfg);

void write_query_pairs(const std::string& path, const std::vector<QueryPair>& pairs);
std::vector<QueryPair> read_query_pairs(const std::string& path);

// Writes a generated world under dir: catalog, embedding matrix, queries or
// training artifacts, and a manifest with the generator parameters.
void write_ablation_world(const AblationWorld& world, const AblationWorldConfig& cfg,
                          const std::string& dir);
void write_training_world(const TrainingWorld& world, const TrainingWorldConfig& cfg,
                          const std::string& dir);

}  // namespace shopeval
