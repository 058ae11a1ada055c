#pragma once

#include <set>
#include <string>
#include <vector>

#include "shopeval/catalog.hpp"
#include "shopeval/embeddings.hpp"
#include "shopeval/heads.hpp"
#include "shopeval/jsonl.hpp"

namespace shopeval {

struct ReportItem {
    std::string product_id;
    std::string reasoning;
};

struct Report {
    std::string report_explanation;
    std::vector<ReportItem> results;
    bool parse_failed = false;
};

enum class ViolationReason { invalid_id, duplicate, out_of_catalog, not_observed, parse_error, excess };

const char* violation_reason_name(ViolationReason reason);

struct Violation {
    size_t position = 0;  // 0-based position in the raw report
    ViolationReason reason = ViolationReason::invalid_id;
};

struct ValidatedSet {
    std::vector<std::string> valid_ids;  // order-preserving, unique, size <= K
    std::vector<Violation> violations;
};

struct GroundTruth {
    std::set<std::string> targets;
};

struct SetHit {
    double fraction = 0.0;
    size_t count = 0;
};

// Order-preserving filter: malformed entries, unknown ids, repeats, and ids
// never returned by any tool are dropped with a recorded violation; at most
// K ids survive.
ValidatedSet validate_report(const Report& report, const Catalog& catalog,
                             const std::set<std::string>& observed_ids, size_t K = 20,
                             bool enforce_observed = true);

SetHit set_hit_at_k(const ValidatedSet& valid, const GroundTruth& truth);

// Per-subcategory centroids, per-item centroid scopes, and the catalog-wide
// baselines used to normalize the reward components.
struct CentroidIndex {
    std::vector<std::string> subcats;            // sorted
    Eigen::MatrixXd centroids;                   // |subcats| x d
    std::vector<std::vector<size_t>> scopes;     // per item: subcat indices, fallback {own}
    std::vector<double> div_mu, div_max;         // over B_i (scope items minus self)
    std::vector<char> div_defined;               // B_i non-empty
    std::vector<double> comp_mu, comp_max;       // over all items per anchor
    double scope_threshold = 0.90;
};

CentroidIndex build_centroid_index(const Catalog& catalog, const ItemMatrix& matrix,
                                   const ProjectionPair* pair, double scope_threshold = 0.90);

struct ComponentScores {
    std::vector<double> per_item;  // aligned with valid_ids
    double aggregate = 0.0;        // sum / K
};

ComponentScores relevance_reward(const std::string& query, const ValidatedSet& valid,
                                 const ItemMatrix& matrix, const QueryHead* head,
                                 EmbeddingProvider& provider, size_t K);

ComponentScores complementarity_reward(const ValidatedSet& valid, const CentroidIndex& index,
                                       const ProjectionPair* pair, const Catalog& catalog,
                                       const ItemMatrix& matrix, size_t K);

ComponentScores diversity_reward(const ValidatedSet& valid, const CentroidIndex& index,
                                 const Catalog& catalog, const ItemMatrix& matrix, size_t K);

struct ScoreBreakdown {
    double set_hit_fraction = 0.0;
    size_t set_hit_count = 0;
    double relevance = 0.0;
    double complementarity = 0.0;
    double diversity = 0.0;
    std::vector<double> item_relevance, item_complementarity, item_diversity;
    size_t valid_count = 0;
    size_t violation_count = 0;
    size_t k = 0;
};

struct ScoringContext {
    const Catalog* catalog = nullptr;
    const ItemMatrix* matrix = nullptr;
    const CentroidIndex* index = nullptr;
    const ProjectionPair* pair = nullptr;
    const QueryHead* head = nullptr;
    EmbeddingProvider* provider = nullptr;
    size_t k = 20;
};

ScoreBreakdown score_report(const ScoringContext& ctx, const std::string& query,
                            const ValidatedSet& valid, const GroundTruth& truth);

json score_to_json(const ScoreBreakdown& score);
ScoreBreakdown score_from_json(const json& j);

}  // namespace shopeval
