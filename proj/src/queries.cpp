#include "shopeval/queries.hpp"

#include <algorithm>
#include <stdexcept>

namespace shopeval {

std::string task_type_name(TaskType t) {
    return t == TaskType::bundle ? "bundle" : "comparative_shopping";
}

TaskType task_type_from_name(const std::string& name) {
    if (name == "bundle") return TaskType::bundle;
    if (name == "comparative_shopping") return TaskType::comparative_shopping;
    throw std::runtime_error("unknown task_type: " + name);
}

std::set<std::string> QueryInstance::targets() const {
    if (task_type == TaskType::bundle && bundle_items) {
        return {bundle_items->begin(), bundle_items->end()};
    }
    return {target_item};
}

json query_instance_to_json(const QueryInstance& q) {
    json j;
    j["key"] = q.key;
    j["query"] = q.query;
    j["task_type"] = task_type_name(q.task_type);
    j["target_item"] = q.target_item;
    if (q.bundle_items) j["bundle_items"] = *q.bundle_items;
    return j;
}

namespace {

[[noreturn]] void fail_field(const std::string& key, const std::string& field,
                             const std::string& why) {
    throw std::runtime_error("query instance \"" + key + "\": field \"" + field + "\" " + why);
}

std::string require_string(const json& j, const std::string& key, const std::string& field) {
    if (!j.contains(field) || !j.at(field).is_string() ||
        j.at(field).get<std::string>().empty()) {
        fail_field(key, field, "must be a non-empty string");
    }
    return j.at(field).get<std::string>();
}

}  // namespace

QueryInstance query_instance_from_json(const json& j) {
    const std::string key =
        j.contains("key") && j.at("key").is_string() ? j.at("key").get<std::string>() : "";
    if (key.empty()) fail_field("<missing>", "key", "must be a non-empty string");

    QueryInstance q;
    q.key = key;
    q.query = require_string(j, key, "query");
    try {
        q.task_type = task_type_from_name(require_string(j, key, "task_type"));
    } catch (const std::runtime_error&) {
        fail_field(key, "task_type", "must be \"comparative_shopping\" or \"bundle\"");
    }
    q.target_item = require_string(j, key, "target_item");

    if (q.task_type == TaskType::bundle) {
        if (!j.contains("bundle_items") || !j.at("bundle_items").is_array()) {
            fail_field(key, "bundle_items", "is required for bundle tasks");
        }
        std::vector<std::string> items;
        for (const auto& e : j.at("bundle_items")) {
            if (!e.is_string()) fail_field(key, "bundle_items", "must contain strings");
            items.push_back(e.get<std::string>());
        }
        const std::set<std::string> unique(items.begin(), items.end());
        if (unique.size() != items.size()) {
            fail_field(key, "bundle_items", "must not contain duplicates");
        }
        if (items.size() < kBundleMin || items.size() > kBundleMax) {
            fail_field(key, "bundle_items",
                       "must hold between " + std::to_string(kBundleMin) + " and " +
                           std::to_string(kBundleMax) + " items");
        }
        if (!unique.count(q.target_item)) {
            fail_field(key, "bundle_items", "must include target_item");
        }
        q.bundle_items = std::move(items);
    } else if (j.contains("bundle_items")) {
        fail_field(key, "bundle_items", "is only allowed for bundle tasks");
    }
    return q;
}

std::vector<QueryInstance> load_query_file(const std::string& path) {
    std::vector<QueryInstance> out;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](const json& j, size_t) {
        QueryInstance q = query_instance_from_json(j);
        if (!seen.insert(q.key).second) {
            throw std::runtime_error("duplicate query key: " + q.key);
        }
        out.push_back(std::move(q));
    });
    return out;
}

void write_query_file(const std::string& path, const std::vector<QueryInstance>& instances) {
    JsonlWriter writer(path);
    for (const auto& q : instances) writer.write(query_instance_to_json(q));
}

std::optional<std::vector<std::string>> validate_bundle(const std::vector<std::string>& proposed,
                                                        const std::string& anchor,
                                                        const std::set<std::string>& pool,
                                                        size_t min_size, size_t max_size) {
    std::vector<std::string> cleaned;
    std::set<std::string> seen;
    for (const auto& id : proposed) {
        if (!pool.count(id)) continue;
        if (!seen.insert(id).second) continue;
        cleaned.push_back(id);
    }
    if (!seen.count(anchor)) cleaned.insert(cleaned.begin(), anchor);
    if (cleaned.size() < min_size) return std::nullopt;
    if (cleaned.size() > max_size) {
        cleaned.resize(max_size);
        // The anchor guarantee holds through truncation; re-front it if cut.
        if (std::find(cleaned.begin(), cleaned.end(), anchor) == cleaned.end()) {
            cleaned.pop_back();
            cleaned.insert(cleaned.begin(), anchor);
        }
    }
    return cleaned;
}

}  // namespace shopeval
