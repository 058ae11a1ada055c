#include "shopeval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace shopeval {

const char* violation_reason_name(ViolationReason reason) {
    switch (reason) {
        case ViolationReason::invalid_id: return "invalid_id";
        case ViolationReason::duplicate: return "duplicate";
        case ViolationReason::out_of_catalog: return "out_of_catalog";
        case ViolationReason::not_observed: return "not_observed";
        case ViolationReason::parse_error: return "parse_error";
        case ViolationReason::excess: return "excess";
    }
    return "unknown";
}

ValidatedSet validate_report(const Report& report, const Catalog& catalog,
                             const std::set<std::string>& observed_ids, size_t K,
                             bool enforce_observed) {
    ValidatedSet out;
    if (report.parse_failed) {
        out.violations.push_back({0, ViolationReason::parse_error});
        return out;
    }
    std::set<std::string> seen;
    for (size_t pos = 0; pos < report.results.size(); ++pos) {
        const std::string& id = report.results[pos].product_id;
        if (id.empty()) {
            out.violations.push_back({pos, ViolationReason::invalid_id});
            continue;
        }
        if (!catalog.has(id)) {
            out.violations.push_back({pos, ViolationReason::out_of_catalog});
            continue;
        }
        if (seen.count(id)) {
            out.violations.push_back({pos, ViolationReason::duplicate});
            continue;
        }
        if (enforce_observed && observed_ids.count(id) == 0) {
            out.violations.push_back({pos, ViolationReason::not_observed});
            continue;
        }
        if (out.valid_ids.size() >= K) {
            out.violations.push_back({pos, ViolationReason::excess});
            continue;
        }
        seen.insert(id);
        out.valid_ids.push_back(id);
    }
    return out;
}

SetHit set_hit_at_k(const ValidatedSet& valid, const GroundTruth& truth) {
    SetHit hit;
    for (const auto& id : valid.valid_ids) {
        if (truth.targets.count(id)) ++hit.count;
    }
    hit.fraction = truth.targets.empty()
                       ? 0.0
                       : static_cast<double>(hit.count) / static_cast<double>(truth.targets.size());
    return hit;
}

namespace {

constexpr double kEps = 1e-8;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

CentroidIndex build_centroid_index(const Catalog& catalog, const ItemMatrix& matrix,
                                   const ProjectionPair* pair, double scope_threshold) {
    const size_t n = catalog.size();
    CentroidIndex index;
    index.scope_threshold = scope_threshold;
    index.subcats = catalog.subcategories();

    std::vector<size_t> item_subcat(n);
    std::map<std::string, size_t> subcat_pos;
    for (size_t c = 0; c < index.subcats.size(); ++c) subcat_pos[index.subcats[c]] = c;
    for (size_t i = 0; i < n; ++i) item_subcat[i] = subcat_pos[catalog.at(i).subcategory];

    index.centroids =
        Eigen::MatrixXd::Zero(static_cast<long>(index.subcats.size()), matrix.vectors.cols());
    for (size_t i = 0; i < n; ++i) {
        index.centroids.row(static_cast<long>(item_subcat[i])) += matrix.vectors.row(static_cast<long>(i));
    }
    for (long c = 0; c < index.centroids.rows(); ++c) {
        const double norm = index.centroids.row(c).norm();
        if (norm > 0.0) index.centroids.row(c) /= norm;
    }

    // Scopes: subcategories whose centroid is strictly within the threshold;
    // empty scope falls back to the item's own subcategory.
    index.scopes.resize(n);
    const Eigen::MatrixXd scope_sims = matrix.vectors * index.centroids.transpose();
    for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < index.subcats.size(); ++c) {
            if (scope_sims(static_cast<long>(i), static_cast<long>(c)) > scope_threshold) {
                index.scopes[i].push_back(c);
            }
        }
        if (index.scopes[i].empty()) index.scopes[i].push_back(item_subcat[i]);
    }

    // Diversity baselines over B_i: same-scope catalog items excluding i.
    index.div_mu.assign(n, 0.0);
    index.div_max.assign(n, 0.0);
    index.div_defined.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
        const std::set<size_t> scope(index.scopes[i].begin(), index.scopes[i].end());
        const Eigen::VectorXd sims = matrix.vectors * matrix.row(i);
        double sum = 0.0, mx = -std::numeric_limits<double>::infinity();
        size_t count = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i || scope.count(item_subcat[j]) == 0) continue;
            const double s = sims(static_cast<long>(j));
            sum += s;
            mx = std::max(mx, s);
            ++count;
        }
        if (count > 0) {
            index.div_mu[i] = sum / static_cast<double>(count);
            index.div_max[i] = mx;
            index.div_defined[i] = 1;
        }
    }

    // Complementarity baselines over the full catalog, self included.
    const Eigen::MatrixXd anchor_side =
        pair != nullptr ? pair->h_a.project_rows(matrix.vectors) : matrix.vectors;
    const Eigen::MatrixXd cand_side =
        pair != nullptr ? pair->h_c.project_rows(matrix.vectors) : matrix.vectors;
    index.comp_mu.assign(n, 0.0);
    index.comp_max.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd scores = cand_side * anchor_side.row(static_cast<long>(i)).transpose();
        index.comp_mu[i] = scores.mean();
        index.comp_max[i] = scores.maxCoeff();
    }
    return index;
}

ComponentScores relevance_reward(const std::string& query, const ValidatedSet& valid,
                                 const ItemMatrix& matrix, const QueryHead* head,
                                 EmbeddingProvider& provider, size_t K) {
    ComponentScores out;
    out.per_item.assign(valid.valid_ids.size(), 0.0);
    if (valid.valid_ids.empty()) return out;

    Eigen::VectorXd base = provider.embed_one(query);
    Eigen::VectorXd z_q;
    if (head != nullptr) {
        z_q = head->forward(base);
    } else {
        const double norm = base.norm();
        z_q = norm > 0.0 ? Eigen::VectorXd(base / norm) : base;
    }

    const Eigen::VectorXd scores = matrix.vectors * z_q;
    const double mu = scores.mean();
    const double mx = scores.maxCoeff();
    const double denom = mx - mu + kEps;

    double sum = 0.0;
    for (size_t i = 0; i < valid.valid_ids.size(); ++i) {
        const double a = scores(static_cast<long>(matrix.index_of(valid.valid_ids[i])));
        out.per_item[i] = std::max(0.0, (a - mu) / denom);
        sum += out.per_item[i];
    }
    out.aggregate = sum / static_cast<double>(K);
    return out;
}

ComponentScores complementarity_reward(const ValidatedSet& valid, const CentroidIndex& index,
                                       const ProjectionPair* pair, const Catalog& catalog,
                                       const ItemMatrix& matrix, size_t K) {
    ComponentScores out;
    const size_t m = valid.valid_ids.size();
    out.per_item.assign(m, 0.0);
    if (m < 2) return out;

    std::vector<size_t> rows(m);
    std::vector<std::string> subs(m);
    for (size_t i = 0; i < m; ++i) {
        rows[i] = matrix.index_of(valid.valid_ids[i]);
        subs[i] = catalog.subcategory_of(valid.valid_ids[i]);
    }

    double sum = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double mu = index.comp_mu[rows[i]];
        const double denom = index.comp_max[rows[i]] - mu + kEps;

        double acc = 0.0;
        size_t count = 0;
        for (size_t j = 0; j < m; ++j) {
            if (j == i || subs[j] == subs[i]) continue;
            const double b = pair != nullptr
                                 ? pair->score(matrix.row(rows[i]), matrix.row(rows[j]))
                                 : matrix.row(rows[i]).dot(matrix.row(rows[j]));
            acc += clamp01((b - mu) / denom);
            ++count;
        }
        if (count > 0) out.per_item[i] = acc / static_cast<double>(count);
        sum += out.per_item[i];
    }
    out.aggregate = sum / static_cast<double>(K);
    return out;
}

ComponentScores diversity_reward(const ValidatedSet& valid, const CentroidIndex& index,
                                 const Catalog& catalog, const ItemMatrix& matrix, size_t K) {
    ComponentScores out;
    const size_t m = valid.valid_ids.size();
    out.per_item.assign(m, 0.0);
    if (m == 0) return out;

    std::map<std::string, size_t> subcat_pos;
    for (size_t c = 0; c < index.subcats.size(); ++c) subcat_pos[index.subcats[c]] = c;

    std::vector<size_t> rows(m), subs(m);
    for (size_t i = 0; i < m; ++i) {
        rows[i] = matrix.index_of(valid.valid_ids[i]);
        subs[i] = subcat_pos.at(catalog.subcategory_of(valid.valid_ids[i]));
    }

    double sum = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const std::set<size_t> scope(index.scopes[rows[i]].begin(), index.scopes[rows[i]].end());

        double acc = 0.0;
        size_t count = 0;
        for (size_t j = 0; j < m; ++j) {
            if (j == i || scope.count(subs[j]) == 0) continue;
            acc += matrix.row(rows[i]).dot(matrix.row(rows[j]));
            ++count;
        }
        if (count == 0 || !index.div_defined[rows[i]]) continue;  // stays 0

        const double mean_sim = acc / static_cast<double>(count);
        const double mu = index.div_mu[rows[i]];
        const double denom = index.div_max[rows[i]] - mu + kEps;
        const double u = clamp01((mean_sim - mu) / denom);
        out.per_item[i] = 1.0 - u;
        sum += out.per_item[i];
    }
    out.aggregate = sum / static_cast<double>(K);
    return out;
}

ScoreBreakdown score_report(const ScoringContext& ctx, const std::string& query,
                            const ValidatedSet& valid, const GroundTruth& truth) {
    ScoreBreakdown score;
    score.k = ctx.k;
    score.valid_count = valid.valid_ids.size();
    score.violation_count = valid.violations.size();

    const SetHit hit = set_hit_at_k(valid, truth);
    score.set_hit_fraction = hit.fraction;
    score.set_hit_count = hit.count;

    const ComponentScores rel =
        relevance_reward(query, valid, *ctx.matrix, ctx.head, *ctx.provider, ctx.k);
    const ComponentScores comp =
        complementarity_reward(valid, *ctx.index, ctx.pair, *ctx.catalog, *ctx.matrix, ctx.k);
    const ComponentScores div = diversity_reward(valid, *ctx.index, *ctx.catalog, *ctx.matrix, ctx.k);

    score.relevance = rel.aggregate;
    score.complementarity = comp.aggregate;
    score.diversity = div.aggregate;
    score.item_relevance = rel.per_item;
    score.item_complementarity = comp.per_item;
    score.item_diversity = div.per_item;
    return score;
}

json score_to_json(const ScoreBreakdown& score) {
    return {{"set_hit_fraction", score.set_hit_fraction},
            {"set_hit_count", score.set_hit_count},
            {"relevance", score.relevance},
            {"complementarity", score.complementarity},
            {"diversity", score.diversity},
            {"item_relevance", score.item_relevance},
            {"item_complementarity", score.item_complementarity},
            {"item_diversity", score.item_diversity},
            {"valid_count", score.valid_count},
            {"violation_count", score.violation_count},
            {"k", score.k}};
}

ScoreBreakdown score_from_json(const json& j) {
    ScoreBreakdown score;
    score.set_hit_fraction = j.at("set_hit_fraction").get<double>();
    score.set_hit_count = j.at("set_hit_count").get<size_t>();
    score.relevance = j.at("relevance").get<double>();
    score.complementarity = j.at("complementarity").get<double>();
    score.diversity = j.at("diversity").get<double>();
    score.item_relevance = j.at("item_relevance").get<std::vector<double>>();
    score.item_complementarity = j.at("item_complementarity").get<std::vector<double>>();
    score.item_diversity = j.at("item_diversity").get<std::vector<double>>();
    score.valid_count = j.at("valid_count").get<size_t>();
    score.violation_count = j.at("violation_count").get<size_t>();
    score.k = j.at("k").get<size_t>();
    return score;
}

}  // namespace shopeval
