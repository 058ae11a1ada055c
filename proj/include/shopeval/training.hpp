#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shopeval/catalog.hpp"
#include "shopeval/embeddings.hpp"
#include "shopeval/heads.hpp"
#include "shopeval/ppmi.hpp"
#include "shopeval/rng.hpp"

namespace shopeval {

struct TrainConfig {
    double tau = 0.05;
    size_t negatives_per_positive = 3;

    size_t comp_batch_size = 512;
    size_t comp_epochs = 3;
    double comp_lr = 1e-3;

    size_t rel_batch_size = 24;
    size_t rel_epochs = 5;
    double rel_lr = 5e-5;
    double rel_warmup_fraction = 0.1;

    double weight_decay = 0.01;

    uint64_t split_seed = 42;
    double val_fraction = 0.10;

    uint64_t seed = 42;  // init, shuffling, negative sampling
    size_t hidden_dim = 256;
    size_t proj_dim = 128;
};

// Deterministic key split used for anchor and user holdouts: shuffle sorted
// keys with the seed, hold out round(n * fraction) clamped to [1, n-1].
std::vector<std::string> split_heldout_keys(const std::vector<std::string>& keys, uint64_t seed,
                                            double fraction);

struct NegativeSample {
    std::vector<std::string> items;  // hard, cross, random
    bool hard_fallback = false;      // slot filled randomly for lack of candidates
    bool cross_fallback = false;
};

// One negative of each kind for a (user, positive item) pair: same-subcategory
// item the user has not interacted with, different-subcategory item, random
// item. Degenerate pools fall back to a random draw and are flagged.
NegativeSample sample_negatives_relevance(const std::string& user_id, const std::string& pos_item,
                                          const Catalog& catalog, const InteractionTable& positives,
                                          Rng& rng);

ProjectionPair train_complementarity(const PpmiGraph& graph, const ItemMatrix& matrix,
                                     const TrainConfig& cfg);

// Mean over anchors of |top-k by pair score ∩ graph complements| / min(k, truth size).
// The anchor itself is excluded from the ranking.
double complement_recall_at_k(const ProjectionPair& pair, const PpmiGraph& graph,
                              const ItemMatrix& matrix, const std::vector<std::string>& anchors,
                              size_t k = 5);

// Same metric with raw cosine ranking (untrained reference point).
double identity_recall_at_k(const PpmiGraph& graph, const ItemMatrix& matrix,
                            const std::vector<std::string>& anchors, size_t k = 5);

struct QueryPair {
    std::string user_id;
    std::string query_text;
    std::string item_id;
};

QueryHead train_query_head(const std::vector<QueryPair>& pairs, const Catalog& catalog,
                           const ItemMatrix& matrix, EmbeddingProvider& provider,
                           const TrainConfig& cfg);

// Fraction of pairs whose target item appears in the head's top-k.
double query_hit_at_k(const QueryHead& head, const std::vector<QueryPair>& pairs,
                      const ItemMatrix& matrix, EmbeddingProvider& provider, size_t k = 5);

// Fraction of pairs whose top-k contains an item sharing the target's subcategory.
double subcategory_match_at_k(const QueryHead& head, const std::vector<QueryPair>& pairs,
                              const Catalog& catalog, const ItemMatrix& matrix,
                              EmbeddingProvider& provider, size_t k = 5);

}  // namespace shopeval
