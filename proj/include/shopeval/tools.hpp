#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "shopeval/embeddings.hpp"
#include "shopeval/heads.hpp"
#include "shopeval/jsonl.hpp"

namespace shopeval {

enum class ToolVariant { semantic, utility };

inline const char* variant_name(ToolVariant v) {
    return v == ToolVariant::utility ? "utility" : "semantic";
}

inline ToolVariant variant_from_name(const std::string& name) {
    if (name == "utility") return ToolVariant::utility;
    if (name == "semantic") return ToolVariant::semantic;
    throw std::invalid_argument("unknown tool variant: " + name);
}

struct ToolEntry {
    std::string product_id;
    double norm_score = 0.0;
    std::string title;
    std::string text;  // truncated description
};

struct RemovedEntry {
    std::string product_id;
    std::string duplicate_of;
    std::string title;
    std::string text;
};

struct ToolResult {
    std::string tool_name;
    bool ok = true;
    std::string error;                 // set when !ok; such a call still consumes a round
    std::vector<ToolEntry> entries;    // ranked results, or the kept list for substitutes
    std::vector<RemovedEntry> removed; // substitutes only
    bool clamped = false;              // top_k exceeded the catalog size

    json to_json() const;
    std::vector<std::string> returned_ids() const;  // entries + removed
};

// Immutable per-run environment shared by all tools and episodes.
struct ToolEnv {
    const Catalog* catalog = nullptr;
    const ItemMatrix* matrix = nullptr;
    EmbeddingProvider* provider = nullptr;
    ToolVariant variant = ToolVariant::semantic;
    const ProjectionPair* pair = nullptr;     // utility complement scoring
    const QueryHead* query_head = nullptr;    // utility query path

    // Projected item vectors for complement scoring; equal to the base
    // matrix under the semantic variant.
    Eigen::MatrixXd anchor_proj;
    Eigen::MatrixXd cand_proj;
};

ToolEnv make_tool_env(const Catalog& catalog, const ItemMatrix& matrix, EmbeddingProvider& provider,
                      ToolVariant variant, const ProjectionPair* pair = nullptr,
                      const QueryHead* query_head = nullptr);

// Embed a query through the variant's query path (trained head for utility,
// normalized base embedding otherwise).
Eigen::VectorXd query_vector(const ToolEnv& env, const std::string& query);

ToolResult search_products(const std::string& query, size_t top_k, const ToolEnv& env);
ToolResult get_complementary_products(const std::vector<std::string>& item_ids, size_t top_k,
                                      const ToolEnv& env);
ToolResult get_substitute_products(const std::vector<std::string>& item_ids, const ToolEnv& env,
                                   double threshold = 0.95);

constexpr size_t kToolTextChars = 300;

}  // namespace shopeval
