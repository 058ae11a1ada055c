#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace shopeval {

struct RawItem {
    std::string item_id;
    std::string title;
    std::vector<std::string> description_fragments;
    std::optional<double> price;
    std::vector<std::string> category_path;
};

struct RawReview {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;
    int64_t timestamp = 0;
    std::string text;
};

struct CatalogItem {
    std::string item_id;
    std::string title;        // truncated
    std::string description;  // cleaned and truncated
    double price = 0.0;
    std::string subcategory;
    std::string product_text;
};

class Catalog {
public:
    Catalog() = default;
    explicit Catalog(std::vector<CatalogItem> items);

    size_t size() const { return items_.size(); }
    bool has(const std::string& item_id) const { return index_.count(item_id) > 0; }
    size_t index_of(const std::string& item_id) const;
    const CatalogItem& at(size_t i) const { return items_.at(i); }
    const CatalogItem& get(const std::string& item_id) const { return items_.at(index_of(item_id)); }
    const std::string& subcategory_of(const std::string& item_id) const { return get(item_id).subcategory; }
    const std::vector<CatalogItem>& items() const { return items_; }
    std::vector<std::string> ids() const;
    std::vector<std::string> subcategories() const;  // distinct, sorted
    std::vector<size_t> items_in_subcategory(const std::string& sub) const;

private:
    std::vector<CatalogItem> items_;  // sorted by item_id
    std::unordered_map<std::string, size_t> index_;
};

struct Interaction {
    std::string user_id;
    std::string item_id;
    double rating = 0.0;
    int64_t timestamp = 0;
    bool positive = false;
};

struct InteractionTable {
    std::vector<Interaction> rows;  // sorted by (user_id, timestamp, item_id)
    std::vector<std::string> users() const;  // distinct, sorted
};

struct FilterConfig {
    double price_min = 0.99;
    double price_max = 10000.0;
    size_t min_review_chars = 20;
    size_t title_max_chars = 200;
    size_t desc_min_chars = 15;
    size_t desc_max_chars = 500;
    double positive_rating = 4.0;
    // Language predicate for review text; empty means the built-in
    // ASCII heuristic.
    std::function<bool(const std::string&)> is_english;
};

struct SplitConfig {
    uint64_t seed = 42;
    double heldout_fraction = 0.10;
};

// Clean one raw item into its catalog form. Throws if the cleaned
// description is shorter than cfg.desc_min_chars or category_path is empty.
CatalogItem build_catalog_item(const RawItem& raw, const FilterConfig& cfg);

std::string render_product_text(const std::string& title, const std::string& description);
std::optional<std::pair<std::string, std::string>> parse_product_text(const std::string& text);

// Apply all eligibility rules and return the surviving items sorted by id.
// Throws on duplicate raw ids or an empty result.
Catalog filter_catalog(const std::vector<RawItem>& raw_items,
                       const std::vector<RawReview>& raw_reviews,
                       const FilterConfig& cfg);

// Keep reviews whose item survived filtering; tag positives. Throws on
// rating or timestamp range violations.
InteractionTable filter_interactions(const std::vector<RawReview>& raw_reviews,
                                     const Catalog& catalog,
                                     const FilterConfig& cfg);

struct UserSplit {
    InteractionTable train;
    InteractionTable heldout;
    std::vector<std::string> heldout_users;  // sorted
};

// Disjoint user-level split: every user's rows land entirely on one side.
UserSplit split_users(const InteractionTable& table, const SplitConfig& cfg);

// JSONL I/O.
std::vector<RawItem> read_raw_items(const std::string& path);
std::vector<RawReview> read_raw_reviews(const std::string& path);
void write_catalog(const Catalog& catalog, const std::string& path);
Catalog read_catalog(const std::string& path);
void write_interactions(const InteractionTable& table, const std::string& path);
InteractionTable read_interactions(const std::string& path);

}  // namespace shopeval
