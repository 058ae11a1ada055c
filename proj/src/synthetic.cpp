#include "shopeval/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <tuple>

#include "shopeval/rng.hpp"
#include "shopeval/text.hpp"

namespace shopeval {

namespace {

std::string repeat_token(const std::string& token, size_t n) {
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

CatalogItem make_item(std::string id, std::string title, std::string description,
                      std::string subcategory, double price) {
    CatalogItem item;
    item.item_id = std::move(id);
    item.title = std::move(title);
    item.description = std::move(description);
    item.subcategory = std::move(subcategory);
    item.price = price;
    item.product_text = "Title: " + item.title + " | Description: " + item.description;
    return item;
}

std::string junk_tokens(Rng& rng, size_t n) {
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += "junk" + std::to_string(rng.uniform_index(100000));
    }
    return out;
}

}  // namespace

AblationWorld make_ablation_world(const AblationWorldConfig& cfg) {
    Rng rng(hash_mix(cfg.seed, 0xab1a));
    std::vector<CatalogItem> items;
    std::vector<QueryInstance> instances;

    auto subcat = [&](size_t i) { return "gear" + std::to_string(i % cfg.subcategories); };

    for (size_t t = 0; t < cfg.bundle_tasks; ++t) {
        const std::string qtok = "qtok" + std::to_string(t);
        const std::string theme = "theme" + std::to_string(t);
        const std::string anchor_id = "ba" + std::to_string(t);

        items.push_back(make_item(
            anchor_id, "Anchor " + std::to_string(t),
            qtok + " " + qtok + " " + repeat_token(theme, 3) + " core unit " + junk_tokens(rng, 2),
            subcat(t), 20.0 + 0.25 * static_cast<double>(t)));

        QueryInstance q;
        q.key = "bundle-" + std::to_string(t);
        q.query = "complete setup " + qtok + " project";
        q.task_type = TaskType::bundle;
        q.target_item = anchor_id;
        std::vector<std::string> bundle{anchor_id};
        for (size_t k = 1; k <= 3; ++k) {
            const std::string comp_id = "bc" + std::to_string(t) + "x" + std::to_string(k);
            items.push_back(make_item(
                comp_id, "Companion " + std::to_string(t) + "-" + std::to_string(k),
                repeat_token(theme, 3) + " part" + std::to_string(k) + " module " +
                    junk_tokens(rng, 2),
                subcat(t + k), 10.0 + 0.1 * static_cast<double>(t + k)));
            bundle.push_back(comp_id);
        }
        q.bundle_items = std::move(bundle);
        instances.push_back(std::move(q));
    }

    for (size_t t = 0; t < cfg.comparative_tasks; ++t) {
        const std::string ctok = "ctok" + std::to_string(t);
        const std::string target_id = "ct" + std::to_string(t);
        items.push_back(make_item(target_id, "Pick " + std::to_string(t),
                                  ctok + " " + ctok + " prime choice " + junk_tokens(rng, 2),
                                  subcat(t), 15.0 + 0.2 * static_cast<double>(t)));

        QueryInstance q;
        q.key = "comparative-" + std::to_string(t);
        q.query = "compare options " + ctok + " choices";
        q.task_type = TaskType::comparative_shopping;
        q.target_item = target_id;
        instances.push_back(std::move(q));
    }

    for (size_t s = 0; s < cfg.subcategories; ++s) {
        for (size_t i = 0; i < cfg.fillers_per_subcategory; ++i) {
            const std::string id = "fs" + std::to_string(s) + "n" + std::to_string(i);
            items.push_back(make_item(id, "Filler " + std::to_string(s) + "-" + std::to_string(i),
                                      "sub" + std::to_string(s) + " spare " + junk_tokens(rng, 4),
                                      subcat(s), 5.0 + 0.05 * static_cast<double>(i)));
        }
    }

    AblationWorld world;
    world.catalog = Catalog(std::move(items));
    world.provider = std::make_shared<TestEmbedder>(cfg.seed, cfg.embed_dim);
    world.matrix = embed_items(world.catalog, *world.provider);
    world.instances = std::move(instances);
    return world;
}

TrainingWorld make_training_world(const TrainingWorldConfig& cfg) {
    Rng rng(hash_mix(cfg.seed, 0x17a1));
    std::vector<CatalogItem> items;

    auto subcat_name = [&](size_t i) { return "shelf" + std::to_string(i % cfg.subcategories); };
    auto member_id = [](size_t c, size_t m) {
        return "tc" + std::to_string(c) + "m" + std::to_string(m);
    };

    for (size_t c = 0; c < cfg.clusters; ++c) {
        for (size_t m = 0; m < cfg.cluster_size; ++m) {
            const size_t s = (c + m) % cfg.subcategories;
            const std::string obj = "obj" + std::to_string(c) + "p" + std::to_string(m);
            items.push_back(make_item(
                member_id(c, m), "Cluster " + std::to_string(c) + "-" + std::to_string(m),
                repeat_token("sub" + std::to_string(s), 6) + " clus" + std::to_string(c) + " " +
                    obj + " " + obj,
                subcat_name(s), 12.0 + 0.1 * static_cast<double>(c)));
        }
    }
    for (size_t s = 0; s < cfg.subcategories; ++s) {
        for (size_t i = 0; i < cfg.decoys_per_subcategory; ++i) {
            items.push_back(make_item(
                "td" + std::to_string(s) + "d" + std::to_string(i),
                "Decoy " + std::to_string(s) + "-" + std::to_string(i),
                repeat_token("sub" + std::to_string(s), 6) + " " + junk_tokens(rng, 3),
                subcat_name(s), 6.0 + 0.05 * static_cast<double>(i)));
        }
    }

    TrainingWorld world;
    world.catalog = Catalog(std::move(items));
    world.provider = std::make_shared<TestEmbedder>(cfg.seed, cfg.embed_dim);
    world.matrix = embed_items(world.catalog, *world.provider);

    std::vector<Interaction> rows;
    std::vector<QueryPair> pairs;
    const int64_t day = 86400;
    for (size_t u = 0; u < cfg.users; ++u) {
        const size_t c = u % cfg.clusters;
        const std::string user = "user" + std::to_string(u);
        const int64_t base = 1600000000 + static_cast<int64_t>(u) * 10 * day;
        for (size_t m = 0; m < cfg.cluster_size; ++m) {
            Interaction row;
            row.user_id = user;
            row.item_id = member_id(c, m);
            row.rating = 5.0;
            row.timestamp = base + static_cast<int64_t>(m) * 3600;
            row.positive = true;
            rows.push_back(std::move(row));

            QueryPair pair;
            pair.user_id = user;
            const std::string chat = "chat" + std::to_string(c) + "m" + std::to_string(m);
            pair.query_text = chat + " " + chat + " please find";
            pair.item_id = member_id(c, m);
            pairs.push_back(std::move(pair));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
        return std::tie(a.user_id, a.timestamp, a.item_id) <
               std::tie(b.user_id, b.timestamp, b.item_id);
    });
    world.interactions.rows = std::move(rows);

    const CoPurchaseCounts counts = extract_copurchase_pairs(world.interactions, 0);
    world.graph = build_ppmi_graph(counts, 0.0);
    world.query_pairs = std::move(pairs);
    return world;
}

void write_query_pairs(const std::string& path, const std::vector<QueryPair>& pairs) {
    JsonlWriter writer(path);
    for (const auto& p : pairs) {
        json j;
        j["user_id"] = p.user_id;
        j["query_text"] = p.query_text;
        j["item_id"] = p.item_id;
        writer.write(j);
    }
}

std::vector<QueryPair> read_query_pairs(const std::string& path) {
    std::vector<QueryPair> pairs;
    for_each_jsonl(path, [&](const json& j, size_t) {
        QueryPair p;
        p.user_id = j.at("user_id").get<std::string>();
        p.query_text = j.at("query_text").get<std::string>();
        p.item_id = j.at("item_id").get<std::string>();
        pairs.push_back(std::move(p));
    });
    return pairs;
}

namespace {

void write_manifest(const std::string& dir, json manifest) {
    std::ofstream out(dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

}  // namespace

void write_ablation_world(const AblationWorld& world, const AblationWorldConfig& cfg,
                          const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_catalog(world.catalog, dir + "/catalog.jsonl");
    save_item_matrix(world.matrix, dir + "/items.matrix");
    write_query_file(dir + "/queries.jsonl", world.instances);
    json manifest;
    manifest["world"] = "ablation";
    manifest["bundle_tasks"] = cfg.bundle_tasks;
    manifest["comparative_tasks"] = cfg.comparative_tasks;
    manifest["subcategories"] = cfg.subcategories;
    manifest["fillers_per_subcategory"] = cfg.fillers_per_subcategory;
    manifest["embed_dim"] = cfg.embed_dim;
    manifest["seed"] = cfg.seed;
    write_manifest(dir, std::move(manifest));
}

void write_training_world(const TrainingWorld& world, const TrainingWorldConfig& cfg,
                          const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_catalog(world.catalog, dir + "/catalog.jsonl");
    save_item_matrix(world.matrix, dir + "/items.matrix");
    write_interactions(world.interactions, dir + "/interactions.jsonl");
    write_ppmi_graph(world.graph, dir + "/copurchase.ppmi");
    write_query_pairs(dir + "/query_pairs.jsonl", world.query_pairs);
    json manifest;
    manifest["world"] = "training";
    manifest["clusters"] = cfg.clusters;
    manifest["cluster_size"] = cfg.cluster_size;
    manifest["subcategories"] = cfg.subcategories;
    manifest["decoys_per_subcategory"] = cfg.decoys_per_subcategory;
    manifest["users"] = cfg.users;
    manifest["embed_dim"] = cfg.embed_dim;
    manifest["seed"] = cfg.seed;
    write_manifest(dir, std::move(manifest));
}

}  // namespace shopeval
