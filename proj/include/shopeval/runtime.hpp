#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "shopeval/corruption.hpp"
#include "shopeval/scoring.hpp"
#include "shopeval/tools.hpp"

namespace shopeval {

struct CandidateEntry {
    std::string item_id;
    std::string source_tool;
    size_t first_round = 0;
};

struct TraceNote {
    size_t round = 0;
    std::string action;
    std::string outcome;
};

struct EpisodeState {
    std::string user_need;
    std::string inferred_mode = "unknown";
    size_t budget = 10;
    size_t rounds_used = 0;
    std::vector<CandidateEntry> candidates;  // first-observed order
    std::set<std::string> candidate_ids;
    json last_tool_result;  // null before the first tool decision
    std::vector<TraceNote> notes;

    size_t remaining() const { return budget - rounds_used; }
    void add_candidates(const std::vector<std::string>& ids, const std::string& tool,
                        size_t round);
};

struct ToolCallAction {
    std::string name;
    json arguments;
};

struct AgentAction {
    enum class Kind { tool_call, final, invalid };
    Kind kind = Kind::invalid;
    ToolCallAction call;        // tool_call
    Report report;              // final
    std::string invalid_reason; // invalid
    std::string raw;
};

// Strict JSON action parse; a single fenced code block around the object is
// tolerated. Invalid is a value, never an exception.
AgentAction parse_action(const std::string& raw);

// Finalization output parse; failure yields a Report with parse_failed set.
Report parse_report_text(const std::string& raw);

std::string render_state_block(const EpisodeState& state, size_t target_count);

// Number of trailing trace notes shown in the state block.
constexpr size_t kRecentTraceWindow = 3;

class PolicyTransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual std::string decide(const std::string& system_prompt, const std::string& state_block) = 0;
    virtual std::string finalize(const std::string& system_prompt,
                                 const std::string& user_prompt) = 0;
    // Transport log accumulated since the last call; empty for local policies.
    virtual json take_log() { return json::array(); }
};

struct TraceRecord {
    size_t round = 0;  // 1-based decision rounds; 0 marks the finalization record
    std::string state_digest;
    std::string raw_output;
    std::string kind;  // tool_call | invalid | final | finalization | failure
    json detail;
};

struct EpisodeTrace {
    std::vector<TraceRecord> records;
    Report final_report;
    bool failed = false;
    double wall_seconds = 0.0;
    std::set<std::string> observed_ids;
    std::vector<std::pair<std::string, std::string>> candidate_texts;  // id, display text

    json to_json() const;
};

struct EpisodeConfig {
    size_t budget = 10;
    size_t k = 20;
    FaultConfig faults;
    size_t policy_retries = 2;
    double backoff_seconds = 0.5;
};

// Normalize arguments, run the named tool, and apply fault injection.
ToolResult call_tool(const ToolCallAction& call, const ToolEnv& env, const FaultConfig& faults);

std::pair<EpisodeTrace, Report> run_episode(const std::string& query, const ToolEnv& env,
                                            Policy& policy, const EpisodeConfig& cfg);

}  // namespace shopeval
