#pragma once

#include <string>
#include <utility>
#include <vector>

namespace shopeval {

std::string render_system_prompt(size_t top_k, size_t max_tool_rounds);

// The three task-mode definitions shared by the system and finalization prompts.
std::string task_mode_definitions();

std::string finalization_system_prompt();

// candidates: (item_id, product text) in first-observed order.
std::string render_finalization_user_prompt(
    const std::string& need, const std::vector<std::pair<std::string, std::string>>& candidates,
    size_t top_k);

}  // namespace shopeval
