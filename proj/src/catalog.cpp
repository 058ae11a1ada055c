#include "shopeval/catalog.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "shopeval/jsonl.hpp"
#include "shopeval/rng.hpp"
#include "shopeval/text.hpp"

namespace shopeval {

Catalog::Catalog(std::vector<CatalogItem> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end(),
              [](const CatalogItem& a, const CatalogItem& b) { return a.item_id < b.item_id; });
    for (size_t i = 0; i < items_.size(); ++i) {
        if (!index_.emplace(items_[i].item_id, i).second) {
            throw std::runtime_error("duplicate item_id in catalog: " + items_[i].item_id);
        }
    }
}

size_t Catalog::index_of(const std::string& item_id) const {
    auto it = index_.find(item_id);
    if (it == index_.end()) throw std::out_of_range("unknown item_id: " + item_id);
    return it->second;
}

std::vector<std::string> Catalog::ids() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& it : items_) out.push_back(it.item_id);
    return out;
}

std::vector<std::string> Catalog::subcategories() const {
    std::set<std::string> subs;
    for (const auto& it : items_) subs.insert(it.subcategory);
    return {subs.begin(), subs.end()};
}

std::vector<size_t> Catalog::items_in_subcategory(const std::string& sub) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < items_.size(); ++i) {
        if (items_[i].subcategory == sub) out.push_back(i);
    }
    return out;
}

std::vector<std::string> InteractionTable::users() const {
    std::set<std::string> u;
    for (const auto& r : rows) u.insert(r.user_id);
    return {u.begin(), u.end()};
}

std::string render_product_text(const std::string& title, const std::string& description) {
    return "Title: " + title + " | Description: " + description;
}

std::optional<std::pair<std::string, std::string>> parse_product_text(const std::string& text) {
    static const std::string kTitle = "Title: ";
    static const std::string kSep = " | Description: ";
    if (!starts_with(text, kTitle)) return std::nullopt;
    const size_t sep = text.find(kSep, kTitle.size());
    if (sep == std::string::npos) return std::nullopt;
    return std::make_pair(text.substr(kTitle.size(), sep - kTitle.size()),
                          text.substr(sep + kSep.size()));
}

CatalogItem build_catalog_item(const RawItem& raw, const FilterConfig& cfg) {
    if (raw.item_id.empty()) throw std::runtime_error("raw item with empty item_id");
    if (raw.category_path.empty()) {
        throw std::runtime_error("item " + raw.item_id + " has empty category_path");
    }
    std::string joined;
    for (const auto& frag : raw.description_fragments) {
        if (frag.empty()) continue;
        if (!joined.empty()) joined.push_back(' ');
        joined += frag;
    }
    std::string desc = collapse_whitespace(joined);
    if (desc.size() < cfg.desc_min_chars) {
        throw std::runtime_error("item " + raw.item_id + " description too short after cleaning");
    }
    desc = truncate_chars(desc, cfg.desc_max_chars);

    CatalogItem item;
    item.item_id = raw.item_id;
    item.title = truncate_chars(raw.title, cfg.title_max_chars);
    item.description = desc;
    item.price = raw.price.value_or(0.0);
    item.subcategory = raw.category_path.back();
    item.product_text = render_product_text(item.title, item.description);
    return item;
}

namespace {

bool price_ok(const RawItem& raw, const FilterConfig& cfg) {
    return raw.price.has_value() && *raw.price >= cfg.price_min && *raw.price <= cfg.price_max;
}

bool english(const FilterConfig& cfg, const std::string& text) {
    return cfg.is_english ? cfg.is_english(text) : mostly_ascii_english(text);
}

}  // namespace

Catalog filter_catalog(const std::vector<RawItem>& raw_items,
                       const std::vector<RawReview>& raw_reviews,
                       const FilterConfig& cfg) {
    std::set<std::string> seen;
    for (const auto& raw : raw_items) {
        if (!seen.insert(raw.item_id).second) {
            throw std::runtime_error("duplicate item_id in raw dump: " + raw.item_id);
        }
    }

    std::set<std::string> reviewed;
    for (const auto& rv : raw_reviews) {
        if (rv.text.size() >= cfg.min_review_chars && english(cfg, rv.text)) {
            reviewed.insert(rv.item_id);
        }
    }

    std::vector<CatalogItem> kept;
    for (const auto& raw : raw_items) {
        if (!price_ok(raw, cfg)) continue;
        if (raw.category_path.empty()) continue;
        if (reviewed.count(raw.item_id) == 0) continue;
        try {
            kept.push_back(build_catalog_item(raw, cfg));
        } catch (const std::runtime_error&) {
            continue;  // too-short description
        }
    }
    if (kept.empty()) throw std::runtime_error("no items survived catalog filtering");
    return Catalog(std::move(kept));
}

InteractionTable filter_interactions(const std::vector<RawReview>& raw_reviews,
                                     const Catalog& catalog,
                                     const FilterConfig& cfg) {
    InteractionTable table;
    for (const auto& rv : raw_reviews) {
        if (rv.rating < 1.0 || rv.rating > 5.0) {
            throw std::runtime_error("review for " + rv.item_id + " has rating out of [1,5]");
        }
        if (rv.timestamp < 0) {
            throw std::runtime_error("review for " + rv.item_id + " has negative timestamp");
        }
        if (rv.user_id.empty()) throw std::runtime_error("review with empty user_id");
        if (!catalog.has(rv.item_id)) continue;
        table.rows.push_back({rv.user_id, rv.item_id, rv.rating, rv.timestamp,
                              rv.rating >= cfg.positive_rating});
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const Interaction& a, const Interaction& b) {
        if (a.user_id != b.user_id) return a.user_id < b.user_id;
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.item_id < b.item_id;
    });
    return table;
}

UserSplit split_users(const InteractionTable& table, const SplitConfig& cfg) {
    std::vector<std::string> users = table.users();
    if (users.size() < 2) throw std::runtime_error("need at least two users to split");

    Rng rng(cfg.seed);
    rng.shuffle(users);

    const auto n = static_cast<double>(users.size());
    auto heldout_count = static_cast<size_t>(round_half_away(n * cfg.heldout_fraction));
    heldout_count = std::clamp<size_t>(heldout_count, 1, users.size() - 1);

    std::set<std::string> heldout(users.begin(), users.begin() + static_cast<long>(heldout_count));

    UserSplit split;
    split.heldout_users.assign(heldout.begin(), heldout.end());
    for (const auto& row : table.rows) {
        (heldout.count(row.user_id) ? split.heldout : split.train).rows.push_back(row);
    }
    return split;
}

std::vector<RawItem> read_raw_items(const std::string& path) {
    std::vector<RawItem> items;
    for_each_jsonl(path, [&](const json& j, size_t lineno) {
        RawItem it;
        it.item_id = j.at("item_id").get<std::string>();
        it.title = j.value("title", std::string());
        if (j.contains("description_fragments")) {
            for (const auto& f : j.at("description_fragments")) {
                it.description_fragments.push_back(f.get<std::string>());
            }
        } else if (j.contains("description")) {
            it.description_fragments.push_back(j.at("description").get<std::string>());
        }
        if (j.contains("price") && !j.at("price").is_null()) {
            if (j.at("price").is_number()) {
                it.price = j.at("price").get<double>();
            } else {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": non-numeric price");
            }
        }
        if (j.contains("category_path")) {
            for (const auto& c : j.at("category_path")) it.category_path.push_back(c.get<std::string>());
        }
        items.push_back(std::move(it));
    });
    return items;
}

std::vector<RawReview> read_raw_reviews(const std::string& path) {
    std::vector<RawReview> reviews;
    for_each_jsonl(path, [&](const json& j, size_t) {
        RawReview rv;
        rv.user_id = j.at("user_id").get<std::string>();
        rv.item_id = j.at("item_id").get<std::string>();
        rv.rating = j.at("rating").get<double>();
        rv.timestamp = j.at("timestamp").get<int64_t>();
        rv.text = j.value("text", std::string());
        reviews.push_back(std::move(rv));
    });
    return reviews;
}

void write_catalog(const Catalog& catalog, const std::string& path) {
    JsonlWriter out(path);
    for (const auto& it : catalog.items()) {
        out.write({{"item_id", it.item_id},
                   {"title", it.title},
                   {"description", it.description},
                   {"price", it.price},
                   {"subcategory", it.subcategory},
                   {"product_text", it.product_text}});
    }
}

Catalog read_catalog(const std::string& path) {
    std::vector<CatalogItem> items;
    for_each_jsonl(path, [&](const json& j, size_t) {
        CatalogItem it;
        it.item_id = j.at("item_id").get<std::string>();
        it.title = j.at("title").get<std::string>();
        it.description = j.at("description").get<std::string>();
        it.price = j.at("price").get<double>();
        it.subcategory = j.at("subcategory").get<std::string>();
        it.product_text = j.value("product_text", render_product_text(it.title, it.description));
        items.push_back(std::move(it));
    });
    return Catalog(std::move(items));
}

void write_interactions(const InteractionTable& table, const std::string& path) {
    JsonlWriter out(path);
    for (const auto& r : table.rows) {
        out.write({{"user_id", r.user_id},
                   {"item_id", r.item_id},
                   {"rating", r.rating},
                   {"timestamp", r.timestamp},
                   {"positive", r.positive}});
    }
}

InteractionTable read_interactions(const std::string& path) {
    InteractionTable table;
    for_each_jsonl(path, [&](const json& j, size_t) {
        table.rows.push_back({j.at("user_id").get<std::string>(), j.at("item_id").get<std::string>(),
                              j.at("rating").get<double>(), j.at("timestamp").get<int64_t>(),
                              j.at("positive").get<bool>()});
    });
    return table;
}

}  // namespace shopeval
