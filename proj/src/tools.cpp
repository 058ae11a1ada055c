#include "shopeval/tools.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "shopeval/text.hpp"

namespace shopeval {

json ToolResult::to_json() const {
    json j;
    j["tool"] = tool_name;
    if (!ok) {
        j["error"] = error;
        return j;
    }
    if (tool_name == "get_substitute_products") {
        j["kept"] = json::array();
        for (const auto& e : entries) {
            j["kept"].push_back({{"product_id", e.product_id}, {"title", e.title}, {"text", e.text}});
        }
        j["removed"] = json::array();
        for (const auto& r : removed) {
            j["removed"].push_back({{"product_id", r.product_id}, {"duplicate_of", r.duplicate_of}});
        }
    } else {
        j["results"] = json::array();
        for (const auto& e : entries) {
            j["results"].push_back({{"product_id", e.product_id},
                                    {"score", e.norm_score},
                                    {"title", e.title},
                                    {"text", e.text}});
        }
        if (clamped) j["clamped"] = true;
    }
    return j;
}

std::vector<std::string> ToolResult::returned_ids() const {
    std::vector<std::string> ids;
    for (const auto& e : entries) ids.push_back(e.product_id);
    for (const auto& r : removed) ids.push_back(r.product_id);
    return ids;
}

ToolEnv make_tool_env(const Catalog& catalog, const ItemMatrix& matrix, EmbeddingProvider& provider,
                      ToolVariant variant, const ProjectionPair* pair,
                      const QueryHead* query_head) {
    ToolEnv env;
    env.catalog = &catalog;
    env.matrix = &matrix;
    env.provider = &provider;
    env.variant = variant;
    env.pair = pair;
    env.query_head = query_head;
    if (variant == ToolVariant::utility && pair != nullptr) {
        env.anchor_proj = pair->h_a.project_rows(matrix.vectors);
        env.cand_proj = pair->h_c.project_rows(matrix.vectors);
    } else {
        env.anchor_proj = matrix.vectors;
        env.cand_proj = matrix.vectors;
    }
    return env;
}

Eigen::VectorXd query_vector(const ToolEnv& env, const std::string& query) {
    Eigen::VectorXd base = env.provider->embed_one(query);
    if (env.variant == ToolVariant::utility && env.query_head != nullptr) {
        return env.query_head->forward(base);
    }
    const double norm = base.norm();
    return norm > 0.0 ? Eigen::VectorXd(base / norm) : base;
}

namespace {

ToolEntry make_entry(const Catalog& catalog, const std::string& item_id, double norm_score) {
    const CatalogItem& item = catalog.get(item_id);
    return {item_id, norm_score, item.title, truncate_chars(item.description, kToolTextChars)};
}

ToolResult tool_error(const std::string& tool_name, const std::string& message) {
    ToolResult result;
    result.tool_name = tool_name;
    result.ok = false;
    result.error = message;
    return result;
}

}  // namespace

ToolResult search_products(const std::string& query, size_t top_k, const ToolEnv& env) {
    static const std::string kName = "search_products";
    if (query.empty()) return tool_error(kName, "query must be non-empty");
    if (top_k == 0) return tool_error(kName, "top_k must be >= 1");

    const ScoreList ranked = cosine_topk(query_vector(env, query), *env.matrix, top_k);

    ToolResult result;
    result.tool_name = kName;
    result.clamped = ranked.truncated_to_catalog;
    for (const auto& e : ranked.entries) {
        result.entries.push_back(make_entry(*env.catalog, e.item_id, e.norm_score));
    }
    return result;
}

ToolResult get_complementary_products(const std::vector<std::string>& item_ids, size_t top_k,
                                      const ToolEnv& env) {
    static const std::string kName = "get_complementary_products";
    if (item_ids.empty()) return tool_error(kName, "item_ids must be non-empty");
    if (top_k == 0) return tool_error(kName, "top_k must be >= 1");
    for (const auto& id : item_ids) {
        if (!env.catalog->has(id)) return tool_error(kName, "unknown item_id: " + id);
    }

    const std::set<std::string> anchor_set(item_ids.begin(), item_ids.end());

    // Candidate score = max over anchors, skipping same-subcategory pairs
    // per anchor and the anchors themselves entirely.
    std::map<size_t, double> best;
    for (const auto& anchor : item_ids) {
        const size_t a_row = env.matrix->index_of(anchor);
        const std::string& a_sub = env.catalog->subcategory_of(anchor);
        const Eigen::VectorXd scores =
            env.cand_proj * env.anchor_proj.row(static_cast<long>(a_row)).transpose();
        for (size_t j = 0; j < env.matrix->size(); ++j) {
            const std::string& cand_id = env.matrix->ids[j];
            if (anchor_set.count(cand_id)) continue;
            if (env.catalog->get(cand_id).subcategory == a_sub) continue;
            const double s = scores(static_cast<long>(j));
            auto [it, inserted] = best.emplace(j, s);
            if (!inserted && s > it->second) it->second = s;
        }
    }

    std::vector<std::pair<size_t, double>> ranked(best.begin(), best.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return env.matrix->ids[a.first] < env.matrix->ids[b.first];
    });
    if (ranked.size() > top_k) ranked.resize(top_k);

    ToolResult result;
    result.tool_name = kName;
    std::vector<double> raw;
    raw.reserve(ranked.size());
    for (const auto& [j, s] : ranked) {
        (void)j;
        raw.push_back(s);
    }
    const std::vector<double> norm = normalize_display_scores(raw);
    for (size_t i = 0; i < ranked.size(); ++i) {
        result.entries.push_back(make_entry(*env.catalog, env.matrix->ids[ranked[i].first], norm[i]));
    }
    return result;
}

ToolResult get_substitute_products(const std::vector<std::string>& item_ids, const ToolEnv& env,
                                   double threshold) {
    static const std::string kName = "get_substitute_products";
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        return tool_error(kName, "threshold must be in (0, 1]");
    }
    for (const auto& id : item_ids) {
        if (!env.catalog->has(id)) return tool_error(kName, "unknown item_id: " + id);
    }

    ToolResult result;
    result.tool_name = kName;
    std::vector<size_t> kept_rows;

    for (const auto& id : item_ids) {
        const size_t row = env.matrix->index_of(id);
        const std::string& sub = env.catalog->subcategory_of(id);

        double best_sim = 0.0;
        size_t best_kept = 0;
        bool have_best = false;
        for (size_t i = 0; i < kept_rows.size(); ++i) {
            const std::string& kept_id = env.matrix->ids[kept_rows[i]];
            if (env.catalog->subcategory_of(kept_id) != sub) continue;  // s_sub = 0
            const double sim = env.matrix->row(row).dot(env.matrix->row(kept_rows[i]));
            if (!have_best || sim > best_sim) {
                best_sim = sim;
                best_kept = i;
                have_best = true;
            }
        }

        if (have_best && best_sim > threshold) {
            const CatalogItem& item = env.catalog->get(id);
            result.removed.push_back({id, env.matrix->ids[kept_rows[best_kept]], item.title,
                                      truncate_chars(item.description, kToolTextChars)});
        } else {
            kept_rows.push_back(row);
            result.entries.push_back(make_entry(*env.catalog, id, 0.0));
        }
    }
    return result;
}

}  // namespace shopeval
