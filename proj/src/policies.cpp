#include "shopeval/policies.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "shopeval/text.hpp"

namespace shopeval {

namespace {

struct StateView {
    std::string user_need;
    size_t remaining = 0;
    size_t target_count = 0;
    std::vector<std::string> candidates;
    json last_tool_result;
};

StateView parse_state(const std::string& state_block) {
    StateView view;
    const json j = json::parse(state_block);
    view.user_need = j.at("user_need").get<std::string>();
    view.remaining = j.at("planning").at("remaining_tool_calls").get<size_t>();
    view.target_count = j.at("target_count").get<size_t>();
    for (const auto& id : j.at("current_candidates")) view.candidates.push_back(id.get<std::string>());
    view.last_tool_result = j.at("last_tool_result");
    return view;
}

std::string tool_call_text(const std::string& goal, const std::string& name, json input) {
    json j;
    j["thought"] = goal;
    j["step_goal"] = goal;
    j["action"] = name;
    j["action_input"] = std::move(input);
    return j.dump();
}

std::string final_text(const std::string& explanation, const std::vector<std::string>& ids,
                       const std::string& reasoning) {
    json final_obj;
    final_obj["report_explanation"] = explanation;
    final_obj["results"] = json::array();
    for (const auto& id : ids) {
        final_obj["results"].push_back({{"product_id", id}, {"reasoning", reasoning}});
    }
    json j;
    j["thought"] = "finalizing";
    j["final"] = std::move(final_obj);
    return j.dump();
}

// Ranked ids from a search/complement result, or the kept list for substitutes.
std::vector<std::string> result_ids(const json& result) {
    std::vector<std::string> ids;
    if (!result.is_object()) return ids;
    const char* key = result.contains("kept") ? "kept" : "results";
    if (!result.contains(key)) return ids;
    for (const auto& e : result.at(key)) ids.push_back(e.at("product_id").get<std::string>());
    return ids;
}

std::string last_tool_name(const json& result) {
    return result.is_object() && result.contains("tool") ? result.at("tool").get<std::string>()
                                                         : std::string();
}

// First `k` unique ids, preferring `primary` order, topping up from `backup`.
std::vector<std::string> pick_k(const std::vector<std::string>& primary,
                                const std::vector<std::string>& backup, size_t k) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto* source : {&primary, &backup}) {
        for (const auto& id : *source) {
            if (out.size() >= k) return out;
            if (seen.insert(id).second) out.push_back(id);
        }
    }
    return out;
}

// Parse "[id] text" candidate lines and the "- exactly N results" rule from
// the finalization prompt.
std::pair<std::vector<std::string>, size_t> parse_finalization(const std::string& user_prompt) {
    std::vector<std::string> ids;
    size_t top_k = 0;

    const std::string marker = "Candidate set:\n";
    size_t pos = user_prompt.find(marker);
    if (pos != std::string::npos) {
        pos += marker.size();
        while (pos < user_prompt.size() && user_prompt[pos] == '[') {
            const size_t close = user_prompt.find(']', pos);
            if (close == std::string::npos) break;
            ids.push_back(user_prompt.substr(pos + 1, close - pos - 1));
            const size_t eol = user_prompt.find('\n', close);
            if (eol == std::string::npos) break;
            pos = eol + 1;
        }
    }

    const std::string rule = "- exactly ";
    pos = user_prompt.find(rule);
    if (pos != std::string::npos) {
        top_k = static_cast<size_t>(std::stoul(user_prompt.substr(pos + rule.size())));
    }
    return {ids, top_k};
}

class ScriptedPolicy : public Policy {
public:
    explicit ScriptedPolicy(std::string name) : name_(std::move(name)) {}
    std::string name() const override { return name_; }

    std::string finalize(const std::string&, const std::string& user_prompt) override {
        const auto [ids, top_k] = parse_finalization(user_prompt);
        json j;
        j["report_explanation"] = "Selected the first observed candidates for the stated need.";
        j["results"] = json::array();
        for (size_t i = 0; i < ids.size() && i < top_k; ++i) {
            j["results"].push_back(
                {{"product_id", ids[i]}, {"reasoning", "Observed in tool results for this need."}});
        }
        return j.dump();
    }

protected:
    std::string name_;
};

class NoToolsPolicy : public ScriptedPolicy {
public:
    NoToolsPolicy() : ScriptedPolicy("no_tools") {}
    std::string decide(const std::string&, const std::string&) override {
        return final_text("No tool evidence was gathered; the report is empty.", {}, "");
    }
};

class SearchOnlyPolicy : public ScriptedPolicy {
public:
    SearchOnlyPolicy() : ScriptedPolicy("search_only") {}
    std::string decide(const std::string&, const std::string& state_block) override {
        const StateView state = parse_state(state_block);
        if (state.last_tool_result.is_null()) {
            return tool_call_text("retrieve the top ranked matches", "search_products",
                                  {{"query", state.user_need},
                                   {"top_k", state.target_count}});
        }
        const auto ranked = result_ids(state.last_tool_result);
        return final_text("Returning the ranked search results.",
                          pick_k(ranked, state.candidates, state.target_count),
                          "High-ranked search match for the need.");
    }
};

class SearchSubstitutePolicy : public ScriptedPolicy {
public:
    SearchSubstitutePolicy() : ScriptedPolicy("search_substitute") {}
    std::string decide(const std::string&, const std::string& state_block) override {
        const StateView state = parse_state(state_block);
        const std::string last = last_tool_name(state.last_tool_result);
        if (last.empty()) {
            return tool_call_text("retrieve a wide ranked pool", "search_products",
                                  {{"query", state.user_need},
                                   {"top_k", 2 * state.target_count}});
        }
        if (last == "search_products") {
            return tool_call_text("prune near-duplicate results", "get_substitute_products",
                                  {{"item_ids", result_ids(state.last_tool_result)}});
        }
        return final_text("Search results pruned of near-duplicates.",
                          pick_k(result_ids(state.last_tool_result), state.candidates,
                                 state.target_count),
                          "Distinct option covering the need.");
    }
};

class SearchComplementPolicy : public ScriptedPolicy {
public:
    SearchComplementPolicy() : ScriptedPolicy("search_complement") {}
    std::string decide(const std::string&, const std::string& state_block) override {
        const StateView state = parse_state(state_block);
        const std::string last = last_tool_name(state.last_tool_result);
        if (last.empty()) {
            return tool_call_text("find the anchor product", "search_products",
                                  {{"query", state.user_need}, {"top_k", 10}});
        }
        if (last == "search_products") {
            const auto ranked = result_ids(state.last_tool_result);
            anchor_ = ranked.empty() ? std::string() : ranked.front();
            if (anchor_.empty()) {
                return final_text("Search returned nothing.", {}, "");
            }
            return tool_call_text("expand complements of the anchor",
                                  "get_complementary_products",
                                  {{"item_ids", json::array({anchor_})}, {"top_k", 15}});
        }
        std::vector<std::string> ordered;
        if (!anchor_.empty()) ordered.push_back(anchor_);
        for (const auto& id : result_ids(state.last_tool_result)) ordered.push_back(id);
        return final_text("Anchor plus its top complements.",
                          pick_k(ordered, state.candidates, state.target_count),
                          "Fills a distinct role alongside the anchor.");
    }

private:
    std::string anchor_;
};

class FullToolsPolicy : public ScriptedPolicy {
public:
    FullToolsPolicy() : ScriptedPolicy("full_tools") {}
    std::string decide(const std::string&, const std::string& state_block) override {
        const StateView state = parse_state(state_block);
        const bool bundle = state.user_need.find("complete setup") != std::string::npos;
        const std::string last = last_tool_name(state.last_tool_result);

        if (last.empty()) {
            return tool_call_text("retrieve ranked matches", "search_products",
                                  {{"query", state.user_need},
                                   {"top_k", bundle ? size_t{8} : 2 * state.target_count}});
        }
        if (last == "search_products") {
            const auto ranked = result_ids(state.last_tool_result);
            if (bundle && !ranked.empty()) {
                anchor_ = ranked.front();
                return tool_call_text("expand complements of the anchor",
                                      "get_complementary_products",
                                      {{"item_ids", json::array({anchor_})}, {"top_k", 15}});
            }
            return tool_call_text("prune near-duplicate results", "get_substitute_products",
                                  {{"item_ids", ranked}});
        }
        if (last == "get_complementary_products") {
            std::vector<std::string> ordered;
            if (!anchor_.empty()) ordered.push_back(anchor_);
            for (const auto& id : result_ids(state.last_tool_result)) ordered.push_back(id);
            return tool_call_text("prune near-duplicates from the bundle pool",
                                  "get_substitute_products", {{"item_ids", ordered}});
        }
        return final_text("Pruned candidate pool matching the inferred task mode.",
                          pick_k(result_ids(state.last_tool_result), state.candidates,
                                 state.target_count),
                          "Kept after duplicate pruning.");
    }

private:
    std::string anchor_;
};

class OraclePolicy : public ScriptedPolicy {
public:
    explicit OraclePolicy(std::set<std::string> targets)
        : ScriptedPolicy("oracle"), targets_(std::move(targets)) {}

    std::string decide(const std::string&, const std::string& state_block) override {
        const StateView state = parse_state(state_block);
        const std::string last = last_tool_name(state.last_tool_result);
        if (last.empty()) {
            return tool_call_text("observe ranked matches", "search_products",
                                  {{"query", state.user_need}, {"top_k", state.target_count}});
        }
        if (last == "search_products") {
            const auto ranked = result_ids(state.last_tool_result);
            if (!ranked.empty()) {
                return tool_call_text("observe complements", "get_complementary_products",
                                      {{"item_ids", json::array({ranked.front()})},
                                       {"top_k", state.target_count}});
            }
        }
        std::vector<std::string> first(targets_.begin(), targets_.end());
        return final_text("Hidden targets listed first.",
                          pick_k(first, state.candidates, state.target_count),
                          "Ground-truth member.");
    }

private:
    std::set<std::string> targets_;
};

class ChatPolicy : public Policy {
public:
    explicit ChatPolicy(ChatEndpointConfig cfg) : cfg_(std::move(cfg)) {}

    std::string name() const override { return "chat:" + cfg_.model; }

    std::string decide(const std::string& system_prompt, const std::string& state_block) override {
        return chat(system_prompt, state_block);
    }

    std::string finalize(const std::string& system_prompt,
                         const std::string& user_prompt) override {
        return chat(system_prompt, user_prompt);
    }

    json take_log() override {
        json out = std::move(log_);
        log_ = json::array();
        return out;
    }

private:
    std::string chat(const std::string& system_prompt, const std::string& user_prompt) {
        json body;
        body["model"] = cfg_.model;
        body["messages"] = json::array({{{"role", "system"}, {"content", system_prompt}},
                                        {{"role", "user"}, {"content", user_prompt}}});

        std::string last_error;
        for (size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                const double delay =
                    cfg_.backoff_seconds * static_cast<double>(1ull << (attempt - 1));
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }

            httplib::Client client(cfg_.host, cfg_.port);
            const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
            client.set_connection_timeout(timeout);
            client.set_read_timeout(timeout);
            client.set_write_timeout(timeout);
            httplib::Headers headers;
            if (!cfg_.api_key.empty()) {
                headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            }

            auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
            json entry;
            entry["attempt"] = attempt;
            entry["request_chars"] = body.dump().size();
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                entry["error"] = last_error;
                log_.push_back(entry);
                continue;
            }
            entry["status"] = res->status;
            if (res->status == 429 || res->status >= 500) {
                last_error = "retryable status " + std::to_string(res->status);
                entry["error"] = last_error;
                log_.push_back(entry);
                continue;
            }
            if (res->status != 200) {
                entry["error"] = res->body;
                log_.push_back(entry);
                throw PolicyTransportError("chat endpoint status " + std::to_string(res->status));
            }
            const json reply = json::parse(res->body, nullptr, false);
            if (reply.is_discarded() || !reply.contains("choices") || reply.at("choices").empty()) {
                entry["error"] = "malformed completion body";
                log_.push_back(entry);
                throw PolicyTransportError("malformed chat completion response");
            }
            const std::string content =
                reply.at("choices").at(0).at("message").at("content").get<std::string>();
            entry["response_chars"] = content.size();
            log_.push_back(entry);
            return content;
        }
        throw PolicyTransportError(last_error.empty() ? "chat endpoint unreachable" : last_error);
    }

    ChatEndpointConfig cfg_;
    json log_ = json::array();
};

}  // namespace

std::unique_ptr<Policy> make_scripted_policy(const std::string& name) {
    if (name == "no_tools") return std::make_unique<NoToolsPolicy>();
    if (name == "search_only") return std::make_unique<SearchOnlyPolicy>();
    if (name == "search_substitute") return std::make_unique<SearchSubstitutePolicy>();
    if (name == "search_complement") return std::make_unique<SearchComplementPolicy>();
    if (name == "full_tools") return std::make_unique<FullToolsPolicy>();
    if (name == "oracle") {
        throw std::runtime_error("oracle policy requires test mode and a target set");
    }
    throw std::runtime_error("unknown scripted policy: " + name);
}

std::unique_ptr<Policy> make_oracle_policy(const std::set<std::string>& targets, bool test_mode) {
    if (!test_mode) throw std::runtime_error("oracle policy is only available in test mode");
    return std::make_unique<OraclePolicy>(targets);
}

std::unique_ptr<Policy> make_chat_policy(const ChatEndpointConfig& cfg) {
    return std::make_unique<ChatPolicy>(cfg);
}

}  // namespace shopeval
