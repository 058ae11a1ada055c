#pragma once

#include <cstdint>
#include <string>

#include "shopeval/tools.hpp"

namespace shopeval {

struct FaultConfig {
    double rate = 0.0;           // fraction of result slots corrupted
    double pool_fraction = 0.25; // bottom share of the subcategory used as replacement pool
    size_t pool_min = 3;
    size_t pool_max = 50;
    uint64_t master_seed = 0;

    void validate() const;
};

// Stable seed for one tool call: hash of tool name, canonicalized (sorted-key)
// call inputs, and the master seed.
uint64_t corruption_seed(const std::string& tool_name, const json& call_inputs,
                         uint64_t master_seed);

// Swap round(K * rate) result slots for low-ranked items from the original
// item's subcategory, keeping each slot's displayed score. The ranking
// criterion matches the call: query relevance for search, mean-anchor
// complementarity for the complement tool.
ToolResult corrupt_ranked_result(const std::string& tool_name, const json& call_inputs,
                                 const ToolResult& clean, const FaultConfig& cfg,
                                 const ToolEnv& env);

// Reinstate round(|removed| * rate) pruned items into the kept list, appended
// in original input order with annotations stripped.
ToolResult corrupt_substitutes(const std::string& tool_name, const json& call_inputs,
                               const ToolResult& clean, const FaultConfig& cfg);

// Dispatch by tool name; identity when rate is 0.
ToolResult apply_faults(const std::string& tool_name, const json& call_inputs,
                        const ToolResult& clean, const FaultConfig& cfg, const ToolEnv& env);

}  // namespace shopeval
