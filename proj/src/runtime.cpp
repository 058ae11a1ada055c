#include "shopeval/runtime.hpp"

#include <chrono>
#include <thread>

#include "shopeval/prompts.hpp"
#include "shopeval/rng.hpp"
#include "shopeval/text.hpp"

namespace shopeval {

void EpisodeState::add_candidates(const std::vector<std::string>& ids, const std::string& tool,
                                  size_t round) {
    for (const auto& id : ids) {
        if (candidate_ids.insert(id).second) {
            candidates.push_back({id, tool, round});
        }
    }
}

namespace {

// Strip a single ``` or ```json fence if the whole payload is wrapped in one.
std::string strip_fence(const std::string& raw) { return strip_code_fence(raw); }

Report report_from_json(const json& j, bool& ok) {
    Report report;
    ok = false;
    if (!j.is_object() || !j.contains("results") || !j.at("results").is_array()) return report;
    report.report_explanation = j.value("report_explanation", std::string());
    for (const auto& entry : j.at("results")) {
        ReportItem item;
        if (entry.is_object() && entry.contains("product_id") && entry.at("product_id").is_string()) {
            item.product_id = entry.at("product_id").get<std::string>();
            item.reasoning = entry.value("reasoning", std::string());
        }
        report.results.push_back(std::move(item));
    }
    ok = true;
    return report;
}

const std::set<std::string>& known_tools() {
    static const std::set<std::string> tools = {"search_products", "get_complementary_products",
                                               "get_substitute_products"};
    return tools;
}

}  // namespace

AgentAction parse_action(const std::string& raw) {
    AgentAction action;
    action.raw = raw;

    const std::string body = strip_fence(raw);
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        action.invalid_reason = "unparsable";
        return action;
    }

    const bool has_action = j.contains("action");
    const bool has_final = j.contains("final");
    if (has_action && has_final) {
        action.invalid_reason = "ambiguous";
        return action;
    }
    if (has_final) {
        bool ok = false;
        Report report = report_from_json(j.at("final"), ok);
        if (!ok) {
            action.invalid_reason = "malformed final";
            return action;
        }
        action.kind = AgentAction::Kind::final;
        action.report = std::move(report);
        return action;
    }
    if (has_action) {
        if (!j.at("action").is_string()) {
            action.invalid_reason = "action must be a string";
            return action;
        }
        const std::string name = j.at("action").get<std::string>();
        if (known_tools().count(name) == 0) {
            action.invalid_reason = "unknown tool: " + name;
            return action;
        }
        if (!j.contains("action_input") || !j.at("action_input").is_object()) {
            action.invalid_reason = "missing action_input";
            return action;
        }
        action.kind = AgentAction::Kind::tool_call;
        action.call = {name, j.at("action_input")};
        return action;
    }
    action.invalid_reason = "unparsable";
    return action;
}

Report parse_report_text(const std::string& raw) {
    const std::string body = strip_fence(raw);
    json j = json::parse(body, nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
        bool ok = false;
        Report report = report_from_json(j, ok);
        if (ok) return report;
    }
    Report failed;
    failed.parse_failed = true;
    return failed;
}

std::string render_state_block(const EpisodeState& state, size_t target_count) {
    json block;
    block["user_need"] = state.user_need;
    block["planning"] = {{"infer_task_mode", state.inferred_mode},
                         {"current_result_count", state.candidates.size()},
                         {"remaining_tool_calls", state.remaining()}};
    block["target_count"] = target_count;
    block["current_candidates"] = json::array();
    for (const auto& c : state.candidates) block["current_candidates"].push_back(c.item_id);
    block["last_tool_result"] = state.last_tool_result;
    block["recent_trace"] = json::array();
    const size_t start =
        state.notes.size() > kRecentTraceWindow ? state.notes.size() - kRecentTraceWindow : 0;
    for (size_t i = start; i < state.notes.size(); ++i) {
        block["recent_trace"].push_back({{"round", state.notes[i].round},
                                         {"action", state.notes[i].action},
                                         {"outcome", state.notes[i].outcome}});
    }
    return block.dump(2);
}

json EpisodeTrace::to_json() const {
    json j;
    j["failed"] = failed;
    j["wall_seconds"] = wall_seconds;
    j["records"] = json::array();
    for (const auto& r : records) {
        j["records"].push_back({{"round", r.round},
                                {"state_digest", r.state_digest},
                                {"raw_output", r.raw_output},
                                {"kind", r.kind},
                                {"detail", r.detail}});
    }
    j["final_report"] = {{"report_explanation", final_report.report_explanation},
                         {"parse_failed", final_report.parse_failed},
                         {"results", json::array()}};
    for (const auto& item : final_report.results) {
        j["final_report"]["results"].push_back(
            {{"product_id", item.product_id}, {"reasoning", item.reasoning}});
    }
    j["observed_ids"] = json::array();
    for (const auto& id : observed_ids) j["observed_ids"].push_back(id);
    return j;
}

ToolResult call_tool(const ToolCallAction& call, const ToolEnv& env, const FaultConfig& faults) {
    auto error = [&](const std::string& msg) {
        ToolResult r;
        r.tool_name = call.name;
        r.ok = false;
        r.error = msg;
        return r;
    };

    const json& args = call.arguments;
    if (call.name == "search_products") {
        if (!args.contains("query") || !args.at("query").is_string()) {
            return error("search_products requires a string 'query'");
        }
        size_t top_k = 20;
        if (args.contains("top_k")) {
            if (!args.at("top_k").is_number_integer() || args.at("top_k").get<int64_t>() < 1) {
                return error("top_k must be a positive integer");
            }
            top_k = args.at("top_k").get<size_t>();
        }
        json canonical = {{"query", args.at("query")}, {"top_k", top_k}};
        const ToolResult clean = search_products(args.at("query").get<std::string>(), top_k, env);
        return apply_faults(call.name, canonical, clean, faults, env);
    }

    auto parse_ids = [&](std::vector<std::string>& ids) -> bool {
        if (!args.contains("item_ids") || !args.at("item_ids").is_array()) return false;
        for (const auto& v : args.at("item_ids")) {
            if (!v.is_string()) return false;
            ids.push_back(v.get<std::string>());
        }
        return true;
    };

    if (call.name == "get_complementary_products") {
        std::vector<std::string> ids;
        if (!parse_ids(ids)) return error("get_complementary_products requires 'item_ids' strings");
        size_t top_k = 20;
        if (args.contains("top_k")) {
            if (!args.at("top_k").is_number_integer() || args.at("top_k").get<int64_t>() < 1) {
                return error("top_k must be a positive integer");
            }
            top_k = args.at("top_k").get<size_t>();
        }
        json canonical = {{"item_ids", ids}, {"top_k", top_k}};
        const ToolResult clean = get_complementary_products(ids, top_k, env);
        return apply_faults(call.name, canonical, clean, faults, env);
    }

    if (call.name == "get_substitute_products") {
        std::vector<std::string> ids;
        if (!parse_ids(ids)) return error("get_substitute_products requires 'item_ids' strings");
        double threshold = 0.95;
        if (args.contains("threshold")) {
            if (!args.at("threshold").is_number()) return error("threshold must be a number");
            threshold = args.at("threshold").get<double>();
        }
        json canonical = {{"item_ids", ids}, {"threshold", threshold}};
        const ToolResult clean = get_substitute_products(ids, env, threshold);
        return apply_faults(call.name, canonical, clean, faults, env);
    }

    return error("unknown tool: " + call.name);
}

namespace {

std::string digest(const std::string& text) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

std::string outcome_text(const ToolResult& result) {
    if (!result.ok) return "error: " + result.error;
    if (result.tool_name == "get_substitute_products") {
        return std::to_string(result.entries.size()) + " kept, " +
               std::to_string(result.removed.size()) + " removed";
    }
    return std::to_string(result.entries.size()) + " results";
}

// Run a policy call with bounded retries on transport errors.
template <typename Fn>
bool with_retries(Fn&& fn, std::string& out, const EpisodeConfig& cfg, std::string& error) {
    for (size_t attempt = 0; attempt <= cfg.policy_retries; ++attempt) {
        try {
            out = fn();
            return true;
        } catch (const PolicyTransportError& e) {
            error = e.what();
            if (attempt < cfg.policy_retries && cfg.backoff_seconds > 0.0) {
                const double delay = cfg.backoff_seconds * static_cast<double>(1ull << attempt);
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
        }
    }
    return false;
}

}  // namespace

std::pair<EpisodeTrace, Report> run_episode(const std::string& query, const ToolEnv& env,
                                            Policy& policy, const EpisodeConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.faults.validate();

    EpisodeState state;
    state.user_need = query;
    state.budget = cfg.budget;

    EpisodeTrace trace;
    const std::string system_prompt = render_system_prompt(cfg.k, cfg.budget);

    bool finalized = false;
    while (state.rounds_used < cfg.budget && !finalized && !trace.failed) {
        const std::string state_block = render_state_block(state, cfg.k);

        std::string raw, transport_error;
        if (!with_retries([&] { return policy.decide(system_prompt, state_block); }, raw, cfg,
                          transport_error)) {
            trace.failed = true;
            trace.records.push_back({state.rounds_used + 1, digest(state_block), "", "failure",
                                     json{{"error", transport_error}}});
            break;
        }

        AgentAction action = parse_action(raw);
        TraceRecord record;
        record.state_digest = digest(state_block);
        record.raw_output = raw;
        record.detail = policy.take_log();

        switch (action.kind) {
            case AgentAction::Kind::final: {
                record.round = 0;
                record.kind = "finalization";
                trace.records.push_back(std::move(record));
                trace.final_report = std::move(action.report);
                finalized = true;
                break;
            }
            case AgentAction::Kind::tool_call: {
                ++state.rounds_used;
                const ToolResult result = call_tool(action.call, env, cfg.faults);
                state.add_candidates(result.returned_ids(), action.call.name, state.rounds_used);
                state.last_tool_result = result.to_json();
                state.notes.push_back({state.rounds_used, action.call.name, outcome_text(result)});

                record.round = state.rounds_used;
                record.kind = "tool_call";
                record.detail = json{{"tool", action.call.name},
                                     {"arguments", action.call.arguments},
                                     {"result", result.to_json()},
                                     {"log", record.detail}};
                trace.records.push_back(std::move(record));
                break;
            }
            case AgentAction::Kind::invalid: {
                ++state.rounds_used;
                state.last_tool_result = json{{"violation", action.invalid_reason}};
                state.notes.push_back({state.rounds_used, "invalid", action.invalid_reason});

                record.round = state.rounds_used;
                record.kind = "invalid";
                record.detail = json{{"reason", action.invalid_reason}, {"log", record.detail}};
                trace.records.push_back(std::move(record));
                break;
            }
        }
    }

    if (!finalized && !trace.failed) {
        // Budget exhausted: force a finalization over the accumulated pool.
        std::vector<std::pair<std::string, std::string>> candidates;
        for (const auto& c : state.candidates) {
            candidates.emplace_back(
                c.item_id, truncate_chars(env.catalog->get(c.item_id).product_text, kToolTextChars));
        }
        const std::string user_prompt =
            render_finalization_user_prompt(state.user_need, candidates, cfg.k);

        std::string raw, transport_error;
        if (with_retries([&] { return policy.finalize(finalization_system_prompt(), user_prompt); },
                         raw, cfg, transport_error)) {
            trace.final_report = parse_report_text(raw);
            trace.records.push_back(
                {0, digest(user_prompt), raw, "finalization", policy.take_log()});
        } else {
            trace.failed = true;
            trace.records.push_back(
                {0, digest(user_prompt), "", "failure", json{{"error", transport_error}}});
        }
    }

    if (trace.failed) {
        trace.final_report = Report{};
        trace.final_report.parse_failed = true;
    }

    trace.observed_ids = state.candidate_ids;
    for (const auto& c : state.candidates) {
        trace.candidate_texts.emplace_back(
            c.item_id, truncate_chars(env.catalog->get(c.item_id).product_text, kToolTextChars));
    }
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {trace, trace.final_report};
}

}  // namespace shopeval
