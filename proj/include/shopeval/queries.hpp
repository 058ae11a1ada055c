#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shopeval/jsonl.hpp"

namespace shopeval {

enum class TaskType { comparative_shopping, bundle };

std::string task_type_name(TaskType t);
TaskType task_type_from_name(const std::string& name);

// One benchmark task: a stable key, the shopper query, and the hidden targets.
// Comparative tasks hold a single target; bundle tasks hold the full bundle.
struct QueryInstance {
    std::string key;
    std::string query;
    TaskType task_type = TaskType::comparative_shopping;
    std::string target_item;
    std::optional<std::vector<std::string>> bundle_items;

    std::set<std::string> targets() const;
};

constexpr size_t kBundleMin = 3;
constexpr size_t kBundleMax = 7;

json query_instance_to_json(const QueryInstance& q);
QueryInstance query_instance_from_json(const json& j);

// Loads a JSONL query file. Schema violations and duplicate keys throw with
// the offending key and field named.
std::vector<QueryInstance> load_query_file(const std::string& path);
void write_query_file(const std::string& path, const std::vector<QueryInstance>& instances);

// Cleans a proposed bundle against the known pool: drop unknown ids, dedupe
// preserving order, prepend the anchor if missing, reject if below min_size,
// truncate above max_size. Returns nullopt on rejection. Idempotent.
std::optional<std::vector<std::string>> validate_bundle(const std::vector<std::string>& proposed,
                                                        const std::string& anchor,
                                                        const std::set<std::string>& pool,
                                                        size_t min_size = kBundleMin,
                                                        size_t max_size = kBundleMax);

}  // namespace shopeval
