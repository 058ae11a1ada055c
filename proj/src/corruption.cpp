#include "shopeval/corruption.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "shopeval/rng.hpp"
#include "shopeval/text.hpp"

namespace shopeval {

void FaultConfig::validate() const {
    if (rate < 0.0 || rate > 1.0) throw std::runtime_error("fault rate must be in [0, 1]");
    if (pool_min > pool_max) throw std::runtime_error("fault pool_min must be <= pool_max");
}

uint64_t corruption_seed(const std::string& tool_name, const json& call_inputs,
                         uint64_t master_seed) {
    // Plain (key-sorted) serialization canonicalizes logically equal inputs.
    const std::string canonical = nlohmann::json(call_inputs).dump();
    uint64_t h = fnv1a(tool_name);
    h = fnv1a("|", h);
    h = fnv1a(canonical, h);
    return hash_mix(h, master_seed);
}

namespace {

// Per-item criterion score for the replacement pool ranking.
Eigen::VectorXd pool_criterion(const std::string& tool_name, const json& call_inputs,
                               const ToolEnv& env) {
    if (tool_name == "search_products") {
        const std::string query = call_inputs.value("query", std::string());
        return env.matrix->vectors * query_vector(env, query);
    }
    if (tool_name == "get_complementary_products") {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(env.cand_proj.rows());
        const auto& ids = call_inputs.at("item_ids");
        for (const auto& id : ids) {
            const size_t a_row = env.matrix->index_of(id.get<std::string>());
            mean += env.cand_proj * env.anchor_proj.row(static_cast<long>(a_row)).transpose();
        }
        return mean / static_cast<double>(ids.size());
    }
    throw std::runtime_error("no ranked-corruption criterion for tool " + tool_name);
}

}  // namespace

ToolResult corrupt_ranked_result(const std::string& tool_name, const json& call_inputs,
                                 const ToolResult& clean, const FaultConfig& cfg,
                                 const ToolEnv& env) {
    cfg.validate();
    if (cfg.rate == 0.0 || !clean.ok || clean.entries.empty()) return clean;

    const size_t k = clean.entries.size();
    const auto n_corrupt =
        static_cast<size_t>(round_half_away(static_cast<double>(k) * cfg.rate));
    if (n_corrupt == 0) return clean;

    const uint64_t seed = corruption_seed(tool_name, call_inputs, cfg.master_seed);
    Rng rng(seed);
    std::vector<size_t> slots = rng.sample_indices(k, n_corrupt);
    std::sort(slots.begin(), slots.end());

    std::set<std::string> clean_ids;
    for (const auto& e : clean.entries) clean_ids.insert(e.product_id);

    const Eigen::VectorXd criterion = pool_criterion(tool_name, call_inputs, env);

    ToolResult out = clean;
    for (size_t slot : slots) {
        const std::string& orig_id = clean.entries[slot].product_id;
        const std::string& sub = env.catalog->subcategory_of(orig_id);

        std::vector<size_t> members = env.catalog->items_in_subcategory(sub);
        std::sort(members.begin(), members.end(), [&](size_t a, size_t b) {
            const double sa = criterion(static_cast<long>(a));
            const double sb = criterion(static_cast<long>(b));
            if (sa != sb) return sa < sb;
            return env.catalog->at(a).item_id < env.catalog->at(b).item_id;
        });

        auto pool_size = static_cast<size_t>(round_half_away(
            static_cast<double>(members.size()) * cfg.pool_fraction));
        pool_size = std::clamp(pool_size, cfg.pool_min, cfg.pool_max);
        pool_size = std::min(pool_size, members.size());

        std::vector<std::string> pool;
        for (size_t i = 0; i < pool_size; ++i) {
            const std::string& id = env.catalog->at(members[i]).item_id;
            if (clean_ids.count(id) == 0) pool.push_back(id);
        }
        if (pool.empty()) continue;  // nothing safe to swap in; slot stays clean

        Rng slot_rng(hash_mix(seed, 0x510700 + slot));
        const std::string& repl_id = pool[slot_rng.uniform_index(pool.size())];
        const CatalogItem& repl = env.catalog->get(repl_id);

        ToolEntry& entry = out.entries[slot];
        entry.product_id = repl_id;
        entry.title = repl.title;
        entry.text = truncate_chars(repl.description, kToolTextChars);
        // norm_score deliberately kept from the original slot
    }
    return out;
}

ToolResult corrupt_substitutes(const std::string& tool_name, const json& call_inputs,
                               const ToolResult& clean, const FaultConfig& cfg) {
    cfg.validate();
    if (cfg.rate == 0.0 || !clean.ok || clean.removed.empty()) return clean;

    const size_t n_removed = clean.removed.size();
    const auto n_back =
        static_cast<size_t>(round_half_away(static_cast<double>(n_removed) * cfg.rate));
    if (n_back == 0) return clean;

    const uint64_t seed = corruption_seed(tool_name, call_inputs, cfg.master_seed);
    Rng rng(seed);
    std::vector<size_t> picks = rng.sample_indices(n_removed, n_back);
    std::sort(picks.begin(), picks.end());  // removed list is in input order
    const std::set<size_t> pick_set(picks.begin(), picks.end());

    ToolResult out = clean;
    out.removed.clear();
    for (size_t i = 0; i < n_removed; ++i) {
        const RemovedEntry& r = clean.removed[i];
        if (pick_set.count(i)) {
            out.entries.push_back({r.product_id, 0.0, r.title, r.text});
        } else {
            out.removed.push_back(r);
        }
    }
    return out;
}

ToolResult apply_faults(const std::string& tool_name, const json& call_inputs,
                        const ToolResult& clean, const FaultConfig& cfg, const ToolEnv& env) {
    cfg.validate();
    if (cfg.rate == 0.0 || !clean.ok) return clean;
    if (tool_name == "get_substitute_products") {
        return corrupt_substitutes(tool_name, call_inputs, clean, cfg);
    }
    return corrupt_ranked_result(tool_name, call_inputs, clean, cfg, env);
}

}  // namespace shopeval
