#pragma once

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace shopeval {

// Object key order is meaningful for rendered prompts and serialized
// records, so the ordered variant is used throughout.
using json = nlohmann::ordered_json;

inline void for_each_jsonl(const std::string& path, const std::function<void(const json&, size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": invalid JSON");
        }
        fn(j, lineno);
    }
}

inline std::vector<json> read_jsonl(const std::string& path) {
    std::vector<json> rows;
    for_each_jsonl(path, [&](const json& j, size_t) { rows.push_back(j); });
    return rows;
}

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path, bool append = false)
        : out_(path, append ? std::ios::app : std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    }

    void write(const json& j) {
        out_ << j.dump() << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

}  // namespace shopeval
