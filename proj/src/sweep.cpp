#include "shopeval/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "shopeval/text.hpp"

namespace shopeval {

namespace {

std::string rate_key(double rate) { return format_double(rate); }

std::string row_key(const std::string& key, const std::string& model, ToolVariant variant,
                    double rate) {
    return key + "\x1f" + model + "\x1f" + variant_name(variant) + "\x1f" + rate_key(rate);
}

bool row_less(const ResultsRow& a, const ResultsRow& b) {
    const int va = static_cast<int>(a.variant);
    const int vb = static_cast<int>(b.variant);
    return std::tie(a.key, a.model, va, a.fault_rate) < std::tie(b.key, b.model, vb, b.fault_rate);
}

}  // namespace

json results_row_to_json(const ResultsRow& row) {
    json j;
    j["key"] = row.key;
    j["model"] = row.model;
    j["task_type"] = task_type_name(row.task_type);
    j["variant"] = variant_name(row.variant);
    j["fault_rate"] = row.fault_rate;
    j["failed"] = row.failed;
    j["score"] = score_to_json(row.score);
    j["wall_seconds"] = row.wall_seconds;
    return j;
}

ResultsRow results_row_from_json(const json& j) {
    ResultsRow row;
    row.key = j.at("key").get<std::string>();
    row.model = j.at("model").get<std::string>();
    row.task_type = task_type_from_name(j.at("task_type").get<std::string>());
    row.variant = variant_from_name(j.at("variant").get<std::string>());
    row.fault_rate = j.at("fault_rate").get<double>();
    row.failed = j.at("failed").get<bool>();
    row.score = score_from_json(j.at("score"));
    row.wall_seconds = j.at("wall_seconds").get<double>();
    return row;
}

PolicyEntry scripted_policy_entry(const std::string& name) {
    PolicyEntry entry;
    entry.model = "scripted:" + name;
    entry.make = [name](const QueryInstance&) { return make_scripted_policy(name); };
    return entry;
}

PolicyEntry chat_policy_entry(const std::string& model, const ChatEndpointConfig& cfg) {
    PolicyEntry entry;
    entry.model = "chat:" + model;
    entry.make = [cfg](const QueryInstance&) { return make_chat_policy(cfg); };
    return entry;
}

std::vector<ResultsRow> run_sweep(const std::vector<QueryInstance>& instances,
                                  const SweepWorld& world, const std::vector<PolicyEntry>& policies,
                                  const SweepConfig& cfg) {
    std::vector<ResultsRow> rows;
    std::set<std::string> done;
    if (!cfg.results_path.empty() && std::filesystem::exists(cfg.results_path)) {
        for (const json& j : read_jsonl(cfg.results_path)) {
            ResultsRow row = results_row_from_json(j);
            done.insert(row_key(row.key, row.model, row.variant, row.fault_rate));
            rows.push_back(std::move(row));
        }
    }

    struct Job {
        const QueryInstance* instance;
        const PolicyEntry* policy;
        EnvCell cell;
    };
    std::vector<Job> jobs;
    for (const auto& instance : instances) {
        for (const auto& policy : policies) {
            for (const auto& cell : cfg.cells) {
                if (done.count(row_key(instance.key, policy.model, cell.variant, cell.fault_rate))) {
                    continue;
                }
                jobs.push_back({&instance, &policy, cell});
            }
        }
    }

    std::map<std::string, ToolEnv> envs;
    for (const auto& cell : cfg.cells) {
        const std::string name = variant_name(cell.variant);
        if (!envs.count(name)) {
            envs.emplace(name, make_tool_env(*world.catalog, *world.matrix, *world.provider,
                                             cell.variant, world.pair, world.query_head));
        }
    }

    std::mutex sink_mutex;
    std::unique_ptr<JsonlWriter> writer;
    if (!cfg.results_path.empty()) {
        writer = std::make_unique<JsonlWriter>(cfg.results_path, true);
    }
    std::unique_ptr<JsonlWriter> trace_writer;
    if (!cfg.traces_path.empty()) {
        trace_writer = std::make_unique<JsonlWriter>(cfg.traces_path, true);
    }

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            const Job& job = jobs[i];

            EpisodeConfig episode_cfg;
            episode_cfg.budget = cfg.budget;
            episode_cfg.k = cfg.k;
            episode_cfg.faults.rate = job.cell.fault_rate;
            episode_cfg.faults.pool_fraction = cfg.fault_pool_fraction;
            episode_cfg.faults.master_seed = cfg.fault_master_seed;
            episode_cfg.policy_retries = cfg.policy_retries;
            episode_cfg.backoff_seconds = cfg.backoff_seconds;

            ResultsRow row;
            row.key = job.instance->key;
            row.model = job.policy->model;
            row.task_type = job.instance->task_type;
            row.variant = job.cell.variant;
            row.fault_rate = job.cell.fault_rate;

            const ToolEnv& env = envs.at(variant_name(job.cell.variant));
            std::unique_ptr<Policy> policy = job.policy->make(*job.instance);
            auto [trace, report] = run_episode(job.instance->query, env, *policy, episode_cfg);

            const ValidatedSet valid =
                validate_report(report, *world.scoring->catalog, trace.observed_ids,
                                world.scoring->k, cfg.enforce_observed);
            const GroundTruth truth{job.instance->targets()};
            row.failed = trace.failed;
            row.score = score_report(*world.scoring, job.instance->query, valid, truth);
            row.wall_seconds = trace.wall_seconds;

            std::lock_guard<std::mutex> lock(sink_mutex);
            if (writer) writer->write(results_row_to_json(row));
            if (trace_writer) {
                json t;
                t["key"] = job.instance->key;
                t["model"] = job.policy->model;
                t["variant"] = variant_name(job.cell.variant);
                t["fault_rate"] = job.cell.fault_rate;
                t["query"] = job.instance->query;
                t["trace"] = trace.to_json();
                trace_writer->write(t);
            }
            rows.push_back(std::move(row));
        }
    };

    const size_t n_workers = std::max<size_t>(1, std::min(cfg.workers, jobs.size() ? jobs.size() : 1));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::sort(rows.begin(), rows.end(), row_less);
    return rows;
}

namespace {

struct GroupKey {
    std::string model;
    TaskType task_type;
    ToolVariant variant;
    double rate;

    bool operator<(const GroupKey& o) const {
        return std::tie(model, task_type, variant, rate) <
               std::tie(o.model, o.task_type, o.variant, o.rate);
    }
};

}  // namespace

Leaderboard aggregate(const std::vector<ResultsRow>& rows) {
    std::map<GroupKey, AggregateGroup> groups;
    for (const auto& row : rows) {
        const GroupKey key{row.model, row.task_type, row.variant, row.fault_rate};
        AggregateGroup& g = groups[key];
        if (g.episodes == 0) {
            g.model = row.model;
            g.task_type = row.task_type;
            g.variant = row.variant;
            g.fault_rate = row.fault_rate;
        }
        ++g.episodes;
        if (row.failed) ++g.failures;
        g.set_hit += row.score.set_hit_fraction;
        g.relevance += row.score.relevance;
        g.complementarity += row.score.complementarity;
        g.diversity += row.score.diversity;
    }

    Leaderboard board;
    for (auto& [key, g] : groups) {
        const double n = static_cast<double>(g.episodes);
        g.set_hit /= n;
        g.relevance /= n;
        g.complementarity /= n;
        g.diversity /= n;
        board.groups.push_back(g);
    }

    for (const auto& g : board.groups) {
        if (g.fault_rate == 0.0) continue;
        const GroupKey clean_key{g.model, g.task_type, g.variant, 0.0};
        const auto it = groups.find(clean_key);
        if (it == groups.end() || it->second.set_hit <= 0.0) continue;
        RetentionRow r;
        r.model = g.model;
        r.task_type = g.task_type;
        r.variant = g.variant;
        r.fault_rate = g.fault_rate;
        r.retention = g.set_hit / it->second.set_hit;
        board.retention.push_back(r);
    }
    return board;
}

namespace {

std::string fixed3(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

}  // namespace

std::string format_table(const Leaderboard& board) {
    std::ostringstream out;
    out << "model                     task                  variant   rate   n     sethit relev  compl  divers fails\n";
    for (const auto& g : board.groups) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-25s %-21s %-9s %-6.2f %-5zu %-6s %-6s %-6s %-6s %zu\n",
                      g.model.c_str(), task_type_name(g.task_type).c_str(),
                      variant_name(g.variant), g.fault_rate, g.episodes,
                      fixed3(g.set_hit).c_str(), fixed3(g.relevance).c_str(),
                      fixed3(g.complementarity).c_str(), fixed3(g.diversity).c_str(), g.failures);
        out << line;
    }
    if (!board.retention.empty()) {
        out << "\nretention (SetHit vs clean)\n";
        for (const auto& r : board.retention) {
            char line[256];
            std::snprintf(line, sizeof(line), "%-25s %-21s %-9s %-6.2f %s\n", r.model.c_str(),
                          task_type_name(r.task_type).c_str(), variant_name(r.variant),
                          r.fault_rate, fixed3(r.retention).c_str());
            out << line;
        }
    }
    return out.str();
}

std::string format_csv(const Leaderboard& board) {
    std::ostringstream out;
    out << "model,task_type,variant,fault_rate,episodes,failures,set_hit,relevance,"
           "complementarity,diversity,retention\n";
    std::map<std::tuple<std::string, int, int, double>, double> retention;
    for (const auto& r : board.retention) {
        retention[{r.model, static_cast<int>(r.task_type), static_cast<int>(r.variant),
                   r.fault_rate}] = r.retention;
    }
    for (const auto& g : board.groups) {
        out << g.model << ',' << task_type_name(g.task_type) << ',' << variant_name(g.variant)
            << ',' << format_double(g.fault_rate) << ',' << g.episodes << ',' << g.failures << ','
            << format_double(g.set_hit) << ',' << format_double(g.relevance) << ','
            << format_double(g.complementarity) << ',' << format_double(g.diversity) << ',';
        const auto it = retention.find({g.model, static_cast<int>(g.task_type),
                                        static_cast<int>(g.variant), g.fault_rate});
        if (it != retention.end()) out << format_double(it->second);
        out << '\n';
    }
    return out.str();
}

json format_plotdata(const Leaderboard& board) {
    json series = json::array();
    std::map<std::tuple<std::string, int, int>, json> by_series;
    for (const auto& g : board.groups) {
        auto& entry = by_series[{g.model, static_cast<int>(g.task_type),
                                 static_cast<int>(g.variant)}];
        if (entry.is_null()) {
            entry = json{{"model", g.model},
                         {"task_type", task_type_name(g.task_type)},
                         {"variant", variant_name(g.variant)},
                         {"fault_rates", json::array()},
                         {"set_hit", json::array()},
                         {"relevance", json::array()},
                         {"complementarity", json::array()},
                         {"diversity", json::array()},
                         {"retention", json::array()}};
        }
        entry["fault_rates"].push_back(g.fault_rate);
        entry["set_hit"].push_back(g.set_hit);
        entry["relevance"].push_back(g.relevance);
        entry["complementarity"].push_back(g.complementarity);
        entry["diversity"].push_back(g.diversity);
    }
    for (const auto& r : board.retention) {
        auto& entry = by_series[{r.model, static_cast<int>(r.task_type),
                                 static_cast<int>(r.variant)}];
        entry["retention"].push_back(json{{"fault_rate", r.fault_rate}, {"value", r.retention}});
    }
    for (auto& [key, entry] : by_series) series.push_back(std::move(entry));
    json out;
    out["series"] = std::move(series);
    return out;
}

}  // namespace shopeval
