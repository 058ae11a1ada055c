#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shopeval/catalog.hpp"
#include "shopeval/embeddings.hpp"

namespace shopeval::testing {

inline std::string read_golden(const std::string& name) {
    const std::string path = std::string(SHOPEVAL_GOLDEN_DIR) + "/" + name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing golden file " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline CatalogItem item(std::string id, std::string title, std::string description,
                        std::string subcategory, double price = 9.99) {
    CatalogItem it;
    it.item_id = std::move(id);
    it.title = std::move(title);
    it.description = std::move(description);
    it.subcategory = std::move(subcategory);
    it.price = price;
    it.product_text = "Title: " + it.title + " | Description: " + it.description;
    return it;
}

// Tiny two-subcategory catalog used across tool and scoring tests.
inline Catalog small_catalog() {
    std::vector<CatalogItem> items;
    items.push_back(item("a1", "Acoustic Guitar", "spruce top dreadnought acoustic guitar",
                         "guitars"));
    items.push_back(item("a2", "Electric Guitar", "solid body electric guitar with two pickups",
                         "guitars"));
    items.push_back(item("a3", "Parlor Guitar", "small body parlor acoustic guitar", "guitars"));
    items.push_back(item("b1", "Guitar Case", "hard shell guitar case with plush lining",
                         "cases"));
    items.push_back(item("b2", "Gig Bag", "padded gig bag with backpack straps", "cases"));
    items.push_back(item("c1", "Tuner Pedal", "chromatic tuner pedal with bright display",
                         "pedals"));
    items.push_back(item("c2", "Overdrive Pedal", "warm overdrive pedal with tone knob",
                         "pedals"));
    return Catalog(std::move(items));
}

inline std::string spaced_tokens(std::initializer_list<const char*> tokens) {
    std::string out;
    for (const char* t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

}  // namespace shopeval::testing
