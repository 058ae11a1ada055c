#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shopeval/policies.hpp"
#include "shopeval/queries.hpp"
#include "shopeval/runtime.hpp"
#include "shopeval/scoring.hpp"
#include "shopeval/tools.hpp"

namespace shopeval {

struct EnvCell {
    ToolVariant variant = ToolVariant::semantic;
    double fault_rate = 0.0;
};

struct ResultsRow {
    std::string key;
    std::string model;
    TaskType task_type = TaskType::comparative_shopping;
    ToolVariant variant = ToolVariant::semantic;
    double fault_rate = 0.0;
    bool failed = false;
    ScoreBreakdown score;
    double wall_seconds = 0.0;
};

json results_row_to_json(const ResultsRow& row);
ResultsRow results_row_from_json(const json& j);

// Fresh policy per episode so stateful policies never leak across tasks.
struct PolicyEntry {
    std::string model;
    std::function<std::unique_ptr<Policy>(const QueryInstance&)> make;
};

PolicyEntry scripted_policy_entry(const std::string& name);
PolicyEntry chat_policy_entry(const std::string& model, const ChatEndpointConfig& cfg);

struct SweepConfig {
    std::vector<EnvCell> cells;
    size_t workers = 1;
    size_t budget = 10;
    size_t k = 20;
    uint64_t fault_master_seed = 42;
    double fault_pool_fraction = 0.25;
    bool enforce_observed = true;
    size_t policy_retries = 2;
    double backoff_seconds = 0.5;
    std::string results_path;  // append-only JSONL; existing rows are resumed, empty: in-memory
    std::string traces_path;   // optional episode-trace JSONL, one episode per line
};

// Immutable world shared by all episodes of a sweep.
struct SweepWorld {
    const Catalog* catalog = nullptr;
    const ItemMatrix* matrix = nullptr;
    EmbeddingProvider* provider = nullptr;
    const ProjectionPair* pair = nullptr;
    const QueryHead* query_head = nullptr;
    const ScoringContext* scoring = nullptr;
};

// Runs every (instance, policy, cell) combination not already present in the
// results file. Episode failures are recorded as failed rows. Returns all
// rows, previously persisted ones included, in a deterministic order.
std::vector<ResultsRow> run_sweep(const std::vector<QueryInstance>& instances,
                                  const SweepWorld& world, const std::vector<PolicyEntry>& policies,
                                  const SweepConfig& cfg);

struct AggregateGroup {
    std::string model;
    TaskType task_type = TaskType::comparative_shopping;
    ToolVariant variant = ToolVariant::semantic;
    double fault_rate = 0.0;
    size_t episodes = 0;
    size_t failures = 0;
    double set_hit = 0.0;
    double relevance = 0.0;
    double complementarity = 0.0;
    double diversity = 0.0;
};

struct RetentionRow {
    std::string model;
    TaskType task_type = TaskType::comparative_shopping;
    ToolVariant variant = ToolVariant::semantic;
    double fault_rate = 0.0;
    double retention = 0.0;  // group mean SetHit / clean-cell mean SetHit
};

struct Leaderboard {
    std::vector<AggregateGroup> groups;      // sorted by (model, task, variant, rate)
    std::vector<RetentionRow> retention;     // only where the clean mean is positive
};

Leaderboard aggregate(const std::vector<ResultsRow>& rows);

std::string format_table(const Leaderboard& board);
std::string format_csv(const Leaderboard& board);
json format_plotdata(const Leaderboard& board);

}  // namespace shopeval
