#include "shopeval/training.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "shopeval/losses.hpp"
#include "shopeval/optim.hpp"

namespace shopeval {

std::vector<std::string> split_heldout_keys(const std::vector<std::string>& keys, uint64_t seed,
                                            double fraction) {
    if (keys.size() < 2) throw std::runtime_error("need at least two keys to split");
    std::vector<std::string> shuffled(keys.begin(), keys.end());
    std::sort(shuffled.begin(), shuffled.end());
    Rng rng(seed);
    rng.shuffle(shuffled);
    auto count = static_cast<size_t>(round_half_away(static_cast<double>(keys.size()) * fraction));
    count = std::clamp<size_t>(count, 1, keys.size() - 1);
    shuffled.resize(count);
    std::sort(shuffled.begin(), shuffled.end());
    return shuffled;
}

NegativeSample sample_negatives_relevance(const std::string& user_id, const std::string& pos_item,
                                          const Catalog& catalog, const InteractionTable& positives,
                                          Rng& rng) {
    std::set<std::string> user_items;
    for (const auto& row : positives.rows) {
        if (row.user_id == user_id) user_items.insert(row.item_id);
    }
    const std::string& pos_sub = catalog.subcategory_of(pos_item);

    std::vector<std::string> hard_pool, cross_pool;
    for (const auto& item : catalog.items()) {
        if (item.item_id == pos_item) continue;
        if (item.subcategory == pos_sub) {
            if (user_items.count(item.item_id) == 0) hard_pool.push_back(item.item_id);
        } else {
            cross_pool.push_back(item.item_id);
        }
    }

    auto random_other = [&]() {
        while (true) {
            const auto& item = catalog.at(static_cast<size_t>(rng.uniform_index(catalog.size())));
            if (item.item_id != pos_item) return item.item_id;
        }
    };

    NegativeSample out;
    if (hard_pool.empty()) {
        out.items.push_back(random_other());
        out.hard_fallback = true;
    } else {
        out.items.push_back(hard_pool[rng.uniform_index(hard_pool.size())]);
    }
    if (cross_pool.empty()) {
        out.items.push_back(random_other());
        out.cross_fallback = true;
    } else {
        out.items.push_back(cross_pool[rng.uniform_index(cross_pool.size())]);
    }
    out.items.push_back(random_other());
    return out;
}

namespace {

struct CompExample {
    size_t anchor_row;
    size_t pos_row;
};

}  // namespace

ProjectionPair train_complementarity(const PpmiGraph& graph, const ItemMatrix& matrix,
                                     const TrainConfig& cfg) {
    if (graph.edges.empty()) throw std::runtime_error("complementarity training needs a non-empty graph");

    const auto adjacency = graph.adjacency();
    std::vector<std::string> anchors;
    anchors.reserve(adjacency.size());
    for (const auto& [id, nbrs] : adjacency) {
        (void)nbrs;
        anchors.push_back(id);
    }

    const auto val_anchors = split_heldout_keys(anchors, cfg.split_seed, cfg.val_fraction);
    if (val_anchors.empty()) throw std::runtime_error("no validation anchors");
    const std::set<std::string> val_set(val_anchors.begin(), val_anchors.end());

    std::vector<CompExample> examples;
    std::map<size_t, std::set<size_t>> complement_rows;  // anchor row -> complement rows
    for (const auto& [id, nbrs] : adjacency) {
        const size_t a_row = matrix.index_of(id);
        for (const auto& nbr : nbrs) complement_rows[a_row].insert(matrix.index_of(nbr));
        if (val_set.count(id)) continue;
        for (const auto& nbr : nbrs) examples.push_back({a_row, matrix.index_of(nbr)});
    }
    if (examples.empty()) throw std::runtime_error("no training examples after anchor split");

    ProjectionPair pair;
    pair.h_a = MlpHead(matrix.dim(), cfg.hidden_dim, cfg.proj_dim, hash_mix(cfg.seed, 1));
    pair.h_c = MlpHead(matrix.dim(), cfg.hidden_dim, cfg.proj_dim, hash_mix(cfg.seed, 2));
    pair.meta.seed = cfg.seed;
    pair.meta.epochs_run = cfg.comp_epochs;

    if (cfg.comp_epochs == 0) {
        pair.meta.val_metric = complement_recall_at_k(pair, graph, matrix, val_anchors);
        return pair;
    }

    std::vector<Eigen::MatrixXd*> params = pair.h_a.params();
    std::vector<Eigen::MatrixXd*> grads = pair.h_a.grads();
    for (auto* p : pair.h_c.params()) params.push_back(p);
    for (auto* g : pair.h_c.grads()) grads.push_back(g);

    const size_t batches_per_epoch = (examples.size() + cfg.comp_batch_size - 1) / cfg.comp_batch_size;
    AdamW opt(params, grads, {cfg.comp_lr, 0.9, 0.999, 1e-8, cfg.weight_decay},
              {ScheduleKind::cosine_decay, 0, cfg.comp_epochs * batches_per_epoch});

    ProjectionPair best = pair;
    double best_metric = -1.0;

    for (size_t epoch = 0; epoch < cfg.comp_epochs; ++epoch) {
        Rng epoch_rng(hash_mix(cfg.seed, 100 + epoch));
        std::vector<size_t> order(examples.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        epoch_rng.shuffle(order);

        for (size_t start = 0; start < order.size(); start += cfg.comp_batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.comp_batch_size);
            pair.h_a.zero_grads();
            pair.h_c.zero_grads();
            const double inv_batch = 1.0 / static_cast<double>(stop - start);

            for (size_t idx = start; idx < stop; ++idx) {
                const CompExample& ex = examples[order[idx]];
                const auto& excluded = complement_rows[ex.anchor_row];

                std::vector<size_t> neg_rows;
                while (neg_rows.size() < cfg.negatives_per_positive) {
                    const auto cand = static_cast<size_t>(epoch_rng.uniform_index(matrix.size()));
                    if (cand == ex.anchor_row || excluded.count(cand)) continue;
                    neg_rows.push_back(cand);
                }

                MlpHead::Cache a_cache;
                const Eigen::VectorXd a_vec =
                    pair.h_a.forward_cached(matrix.row(ex.anchor_row), a_cache);
                MlpHead::Cache p_cache;
                const Eigen::VectorXd p_vec = pair.h_c.forward_cached(matrix.row(ex.pos_row), p_cache);
                std::vector<MlpHead::Cache> n_caches(neg_rows.size());
                std::vector<Eigen::VectorXd> n_vecs;
                n_vecs.reserve(neg_rows.size());
                for (size_t r = 0; r < neg_rows.size(); ++r) {
                    n_vecs.push_back(pair.h_c.forward_cached(matrix.row(neg_rows[r]), n_caches[r]));
                }

                const InfoNceGrad g = infonce_loss_grad(a_vec, p_vec, n_vecs, cfg.tau);
                pair.h_a.backward(a_cache, inv_batch * g.d_anchor);
                pair.h_c.backward(p_cache, inv_batch * g.d_pos);
                for (size_t r = 0; r < neg_rows.size(); ++r) {
                    pair.h_c.backward(n_caches[r], inv_batch * g.d_negs[r]);
                }
            }
            opt.step();
        }

        const double metric = complement_recall_at_k(pair, graph, matrix, val_anchors);
        if (metric > best_metric) {
            best_metric = metric;
            best = pair;
            best.meta.selected_epoch = epoch + 1;
        }
    }

    best.meta.val_metric = best_metric;
    best.meta.epochs_run = cfg.comp_epochs;
    best.h_a.zero_grads();
    best.h_c.zero_grads();
    return best;
}

namespace {

double recall_for_ranking(const PpmiGraph& graph, const ItemMatrix& matrix,
                          const std::vector<std::string>& anchors, size_t k,
                          const Eigen::MatrixXd& anchor_side, const Eigen::MatrixXd& cand_side) {
    const auto adjacency = graph.adjacency();
    double total = 0.0;
    size_t counted = 0;
    for (const auto& anchor : anchors) {
        auto it = adjacency.find(anchor);
        if (it == adjacency.end() || it->second.empty()) continue;
        const size_t a_row = matrix.index_of(anchor);
        const Eigen::VectorXd scores = cand_side * anchor_side.row(static_cast<long>(a_row)).transpose();

        std::vector<size_t> order;
        order.reserve(matrix.size());
        for (size_t i = 0; i < matrix.size(); ++i) {
            if (i != a_row) order.push_back(i);
        }
        const size_t take = std::min(k, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<long>(take), order.end(),
                          [&](size_t x, size_t y) {
                              const double sx = scores(static_cast<long>(x));
                              const double sy = scores(static_cast<long>(y));
                              if (sx != sy) return sx > sy;
                              return matrix.ids[x] < matrix.ids[y];
                          });
        order.resize(take);

        std::set<std::string> truth(it->second.begin(), it->second.end());
        size_t hits = 0;
        for (size_t row : order) {
            if (truth.count(matrix.ids[row])) ++hits;
        }
        total += static_cast<double>(hits) / static_cast<double>(std::min(k, truth.size()));
        ++counted;
    }
    if (counted == 0) throw std::runtime_error("no anchors with complements to evaluate");
    return total / static_cast<double>(counted);
}

}  // namespace

double complement_recall_at_k(const ProjectionPair& pair, const PpmiGraph& graph,
                              const ItemMatrix& matrix, const std::vector<std::string>& anchors,
                              size_t k) {
    const Eigen::MatrixXd anchor_side = pair.h_a.project_rows(matrix.vectors);
    const Eigen::MatrixXd cand_side = pair.h_c.project_rows(matrix.vectors);
    return recall_for_ranking(graph, matrix, anchors, k, anchor_side, cand_side);
}

double identity_recall_at_k(const PpmiGraph& graph, const ItemMatrix& matrix,
                            const std::vector<std::string>& anchors, size_t k) {
    return recall_for_ranking(graph, matrix, anchors, k, matrix.vectors, matrix.vectors);
}

QueryHead train_query_head(const std::vector<QueryPair>& pairs, const Catalog& catalog,
                           const ItemMatrix& matrix, EmbeddingProvider& provider,
                           const TrainConfig& cfg) {
    if (pairs.empty()) throw std::runtime_error("query training needs at least one pair");

    std::set<std::string> user_set;
    for (const auto& p : pairs) user_set.insert(p.user_id);
    const std::vector<std::string> users(user_set.begin(), user_set.end());
    const auto val_users_vec = split_heldout_keys(users, cfg.split_seed, cfg.val_fraction);
    const std::set<std::string> val_users(val_users_vec.begin(), val_users_vec.end());

    std::vector<QueryPair> train_pairs, val_pairs;
    for (const auto& p : pairs) {
        (val_users.count(p.user_id) ? val_pairs : train_pairs).push_back(p);
    }
    if (val_pairs.empty()) throw std::runtime_error("empty validation side for query training");
    if (train_pairs.empty()) throw std::runtime_error("empty training side for query training");

    // The item tower is frozen; interactions for negative sampling come from
    // the training pairs themselves.
    InteractionTable interactions;
    for (const auto& p : pairs) {
        interactions.rows.push_back({p.user_id, p.item_id, 5.0, 0, true});
    }

    std::vector<std::string> texts;
    texts.reserve(train_pairs.size());
    for (const auto& p : train_pairs) texts.push_back(p.query_text);
    const auto base_train = provider.embed(texts);

    QueryHead head;
    head.head = LinearHead(matrix.dim());
    head.meta.seed = cfg.seed;
    head.meta.epochs_run = cfg.rel_epochs;

    if (cfg.rel_epochs == 0) {
        head.meta.val_metric = subcategory_match_at_k(head, val_pairs, catalog, matrix, provider);
        return head;
    }

    const size_t batches_per_epoch =
        (train_pairs.size() + cfg.rel_batch_size - 1) / cfg.rel_batch_size;
    const size_t total_steps = cfg.rel_epochs * batches_per_epoch;
    auto warmup = static_cast<size_t>(round_half_away(
        static_cast<double>(total_steps) * cfg.rel_warmup_fraction));
    warmup = std::max<size_t>(warmup, 1);

    AdamW opt(head.head.params(), head.head.grads(), {cfg.rel_lr, 0.9, 0.999, 1e-8, cfg.weight_decay},
              {ScheduleKind::linear_warmup, warmup, total_steps});

    QueryHead best = head;
    double best_metric = -1.0;

    for (size_t epoch = 0; epoch < cfg.rel_epochs; ++epoch) {
        Rng epoch_rng(hash_mix(cfg.seed, 500 + epoch));
        std::vector<size_t> order(train_pairs.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        epoch_rng.shuffle(order);

        for (size_t start = 0; start < order.size(); start += cfg.rel_batch_size) {
            const size_t stop = std::min(order.size(), start + cfg.rel_batch_size);
            head.head.zero_grads();
            const double inv_batch = 1.0 / static_cast<double>(stop - start);

            for (size_t idx = start; idx < stop; ++idx) {
                const QueryPair& p = train_pairs[order[idx]];
                const auto negatives =
                    sample_negatives_relevance(p.user_id, p.item_id, catalog, interactions, epoch_rng);

                LinearHead::Cache cache;
                const Eigen::VectorXd z_q = head.head.forward_cached(base_train[order[idx]], cache);
                const Eigen::VectorXd pos = matrix.row(matrix.index_of(p.item_id));
                std::vector<Eigen::VectorXd> negs;
                negs.reserve(negatives.items.size());
                for (const auto& id : negatives.items) negs.push_back(matrix.row(matrix.index_of(id)));

                const BprGrad g = bpr_loss_grad(z_q, pos, negs);
                head.head.backward(cache, inv_batch * g.d_query);
            }
            opt.step();
        }

        const double metric = subcategory_match_at_k(head, val_pairs, catalog, matrix, provider);
        if (metric > best_metric) {
            best_metric = metric;
            best = head;
            best.meta.selected_epoch = epoch + 1;
        }
    }

    best.meta.val_metric = best_metric;
    best.meta.epochs_run = cfg.rel_epochs;
    best.head.zero_grads();
    return best;
}

namespace {

std::vector<std::vector<std::string>> topk_ids_for_pairs(const QueryHead& head,
                                                         const std::vector<QueryPair>& pairs,
                                                         const ItemMatrix& matrix,
                                                         EmbeddingProvider& provider, size_t k) {
    std::vector<std::string> texts;
    texts.reserve(pairs.size());
    for (const auto& p : pairs) texts.push_back(p.query_text);
    const auto base = provider.embed(texts);

    std::vector<std::vector<std::string>> out;
    out.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        const ScoreList ranked = cosine_topk(head.forward(base[i]), matrix, k);
        std::vector<std::string> ids;
        ids.reserve(ranked.entries.size());
        for (const auto& e : ranked.entries) ids.push_back(e.item_id);
        out.push_back(std::move(ids));
    }
    return out;
}

}  // namespace

double query_hit_at_k(const QueryHead& head, const std::vector<QueryPair>& pairs,
                      const ItemMatrix& matrix, EmbeddingProvider& provider, size_t k) {
    if (pairs.empty()) throw std::runtime_error("no pairs to evaluate");
    const auto topk = topk_ids_for_pairs(head, pairs, matrix, provider, k);
    size_t hits = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (std::find(topk[i].begin(), topk[i].end(), pairs[i].item_id) != topk[i].end()) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double subcategory_match_at_k(const QueryHead& head, const std::vector<QueryPair>& pairs,
                              const Catalog& catalog, const ItemMatrix& matrix,
                              EmbeddingProvider& provider, size_t k) {
    if (pairs.empty()) throw std::runtime_error("no pairs to evaluate");
    const auto topk = topk_ids_for_pairs(head, pairs, matrix, provider, k);
    size_t hits = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const std::string& want = catalog.subcategory_of(pairs[i].item_id);
        for (const auto& id : topk[i]) {
            if (catalog.subcategory_of(id) == want) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace shopeval
