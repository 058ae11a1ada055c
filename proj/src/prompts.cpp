#include "shopeval/prompts.hpp"

namespace shopeval {

std::string task_mode_definitions() {
    return
        "- retrieval_clear: the user is looking for relevant products matching a clear need.\n"
        "- comparative_shopping: the user needs credible alternatives that satisfy the same broad "
        "intent while exposing meaningful tradeoffs and avoiding redundant near-duplicates.\n"
        "- bundle: the user needs a coherent set of complementary products that work together or "
        "fill different roles in a setup.";
}

std::string render_system_prompt(size_t top_k, size_t max_tool_rounds) {
    std::string out;
    out += "You are an expert product recommendation agent integrated with local catalog tools.\n";
    out += "\n";
    out += "Mission: Build a final recommendation set of exactly " + std::to_string(top_k) +
           " unique products for the user's need.\n";
    out += "\n";
    out += "First infer the task mode:\n";
    out += task_mode_definitions() + "\n";
    out += "\n";
    out += "Available tools:\n";
    out += "- search_products(...)\n";
    out += "- get_complementary_products(...)\n";
    out += "- get_substitute_products(...)\n";
    out += "\n";
    out += "Tool budget:\n";
    out += "- You may call at most " + std::to_string(max_tool_rounds) + " tools.\n";
    out += "- Use tools deliberately; prefer fewer calls if enough evidence exists.\n";
    out += "- Do not invent product IDs. Final results must come from observed tool results.\n";
    out += "\n";
    out += "Output protocol:\n";
    out += "\n";
    out += "At each reasoning step, return strictly valid JSON only.\n";
    out += "\n";
    out += "If calling a tool:\n";
    out += "{\n";
    out += "  \"thought\": \"...\",\n";
    out += "  \"step_goal\": \"...\",\n";
    out += "  \"action\": \"<tool name>\",\n";
    out += "  \"action_input\": {...}\n";
    out += "}\n";
    out += "\n";
    out += "If ready to finalize:\n";
    out += "{\n";
    out += "  \"thought\": \"...\",\n";
    out += "  \"final\": {\n";
    out += "    \"report_explanation\": \"...\",\n";
    out += "    \"results\": [\n";
    out += "      {\"product_id\": \"<id>\", \"reasoning\": \"...\"}\n";
    out += "    ]\n";
    out += "  }\n";
    out += "}";
    return out;
}

std::string finalization_system_prompt() {
    return "You are finalizing a product recommendation report. Use the user need, candidate set, "
           "and selected task-mode objective to produce the final answer. Return valid JSON only.";
}

std::string render_finalization_user_prompt(
    const std::string& need, const std::vector<std::pair<std::string, std::string>>& candidates,
    size_t top_k) {
    std::string out;
    out += "User need:\n";
    out += need + "\n";
    out += "\n";
    out += "Task modes:\n";
    out += task_mode_definitions() + "\n";
    out += "\n";
    out += "Candidate set:\n";
    for (const auto& [id, text] : candidates) {
        out += "[" + id + "] " + text + "\n";
    }
    out += "\n";
    out += "Return only valid JSON:\n";
    out += "{\n";
    out += "  \"report_explanation\": \"<brief strategy summary>\",\n";
    out += "  \"results\": [\n";
    out += "    {\"product_id\": \"<id>\", \"reasoning\": \"<why this item fits>\"}\n";
    out += "  ]\n";
    out += "}\n";
    out += "\n";
    out += "Rules:\n";
    out += "- exactly " + std::to_string(top_k) + " results\n";
    out += "- no duplicate product_id\n";
    out += "- only use product IDs from the candidate set\n";
    out += "- match the selected task-mode objective";
    return out;
}

}  // namespace shopeval
