#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "shopeval/catalog.hpp"
#include "shopeval/judge.hpp"
#include "shopeval/policies.hpp"
#include "shopeval/ppmi.hpp"
#include "shopeval/sweep.hpp"
#include "shopeval/synthetic.hpp"
#include "shopeval/training.hpp"

namespace {

using namespace shopeval;

struct EmbedderFlags {
    uint64_t seed = 42;
    size_t dim = 256;
    std::string endpoint;  // host:port[/base_path]; empty: hashing test embedder

    void attach(CLI::App* cmd) {
        cmd->add_option("--embed-seed", seed, "Hashing embedder seed");
        cmd->add_option("--embed-dim", dim, "Hashing embedder dimension");
        cmd->add_option("--embed-endpoint", endpoint,
                        "Remote embedding endpoint host:port[/base]; overrides the hashing embedder");
    }

    std::unique_ptr<EmbeddingProvider> make() const {
        if (endpoint.empty()) return std::make_unique<TestEmbedder>(seed, dim);
        std::string rest = endpoint;
        std::string base_path;
        const size_t slash = rest.find('/');
        if (slash != std::string::npos) {
            base_path = rest.substr(slash);
            rest = rest.substr(0, slash);
        }
        const size_t colon = rest.find(':');
        if (colon == std::string::npos) {
            throw CLI::ValidationError("--embed-endpoint", "expected host:port[/base]");
        }
        return std::make_unique<RemoteEmbedder>(rest.substr(0, colon),
                                                std::stoi(rest.substr(colon + 1)), dim, base_path);
    }
};

ChatEndpointConfig parse_chat_endpoint(const std::string& url, const std::string& model) {
    ChatEndpointConfig cfg;
    std::string rest = url;
    const std::string scheme = "http://";
    if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
    const size_t slash = rest.find('/');
    if (slash != std::string::npos) {
        cfg.path = rest.substr(slash);
        rest = rest.substr(0, slash);
    }
    const size_t colon = rest.find(':');
    if (colon != std::string::npos) {
        cfg.port = std::stoi(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
    }
    cfg.host = rest;
    if (!model.empty()) cfg.model = model;
    if (const char* key = std::getenv("SHOPEVAL_API_KEY")) cfg.api_key = key;
    return cfg;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Recommendation-agent benchmark harness"};
    app.require_subcommand(1);

    // build-catalog
    auto* build = app.add_subcommand("build-catalog",
                                     "Filter raw items and reviews into a catalog and interactions");
    std::string items_path, reviews_path, out_catalog, out_interactions;
    build->add_option("--items", items_path, "Raw item JSONL")->required();
    build->add_option("--reviews", reviews_path, "Raw review JSONL")->required();
    build->add_option("--out-catalog", out_catalog, "Catalog JSONL output")->required();
    build->add_option("--out-interactions", out_interactions, "Interactions JSONL output")
        ->required();
    build->callback([&]() {
        const auto raw_items = read_raw_items(items_path);
        const auto raw_reviews = read_raw_reviews(reviews_path);
        FilterConfig filter;
        const Catalog catalog = filter_catalog(raw_items, raw_reviews, filter);
        const InteractionTable interactions = filter_interactions(raw_reviews, catalog, filter);
        write_catalog(catalog, out_catalog);
        write_interactions(interactions, out_interactions);
        std::cout << "catalog items: " << catalog.size()
                  << ", interactions: " << interactions.rows.size() << "\n";
    });

    // embed
    auto* embed = app.add_subcommand("embed", "Embed catalog items into a dense matrix");
    std::string embed_catalog, embed_out;
    EmbedderFlags embed_flags;
    embed->add_option("--catalog", embed_catalog, "Catalog JSONL")->required();
    embed->add_option("--out", embed_out, "Item matrix output")->required();
    embed_flags.attach(embed);
    embed->callback([&]() {
        const Catalog catalog = read_catalog(embed_catalog);
        auto provider = embed_flags.make();
        const ItemMatrix matrix = embed_items(catalog, *provider);
        save_item_matrix(matrix, embed_out);
        std::cout << "embedded " << matrix.ids.size() << " items, d=" << matrix.vectors.cols()
                  << "\n";
    });

    // build-ppmi
    auto* ppmi = app.add_subcommand("build-ppmi", "Build the co-purchase PPMI graph");
    std::string ppmi_interactions, ppmi_out;
    int64_t window_days = 0;
    double ppmi_threshold = 0.0;
    ppmi->add_option("--interactions", ppmi_interactions, "Interactions JSONL")->required();
    ppmi->add_option("--out", ppmi_out, "Graph output")->required();
    ppmi->add_option("--window-days", window_days, "Co-purchase window in days");
    ppmi->add_option("--threshold", ppmi_threshold, "Minimum retained PPMI weight");
    ppmi->callback([&]() {
        const InteractionTable interactions = read_interactions(ppmi_interactions);
        const CoPurchaseCounts counts = extract_copurchase_pairs(interactions, window_days);
        const PpmiGraph graph = build_ppmi_graph(counts, ppmi_threshold);
        write_ppmi_graph(graph, ppmi_out);
        std::cout << "edges: " << graph.edges.size() << "\n";
    });

    // train-comp
    auto* comp = app.add_subcommand("train-comp", "Train the complementarity projection pair");
    std::string comp_matrix, comp_graph, comp_out;
    TrainConfig comp_cfg;
    comp->add_option("--matrix", comp_matrix, "Item matrix")->required();
    comp->add_option("--graph", comp_graph, "PPMI graph")->required();
    comp->add_option("--out", comp_out, "Projection pair output")->required();
    comp->add_option("--seed", comp_cfg.seed, "Training seed");
    comp->add_option("--epochs", comp_cfg.comp_epochs, "Epochs");
    comp->add_option("--lr", comp_cfg.comp_lr, "Learning rate");
    comp->callback([&]() {
        const ItemMatrix matrix = load_item_matrix(comp_matrix);
        const PpmiGraph graph = read_ppmi_graph(comp_graph);
        const ProjectionPair pair = train_complementarity(graph, matrix, comp_cfg);
        save_projection_pair(pair, comp_out);
        std::cout << "val recall@5: " << pair.meta.val_metric << " (epoch "
                  << pair.meta.selected_epoch << ")\n";
    });

    // train-query
    auto* trainq = app.add_subcommand("train-query", "Train the query relevance head");
    std::string trainq_catalog, trainq_matrix, trainq_pairs, trainq_out;
    TrainConfig trainq_cfg;
    EmbedderFlags trainq_flags;
    trainq->add_option("--catalog", trainq_catalog, "Catalog JSONL")->required();
    trainq->add_option("--matrix", trainq_matrix, "Item matrix")->required();
    trainq->add_option("--pairs", trainq_pairs, "Query pair JSONL")->required();
    trainq->add_option("--out", trainq_out, "Query head output")->required();
    trainq->add_option("--seed", trainq_cfg.seed, "Training seed");
    trainq->add_option("--epochs", trainq_cfg.rel_epochs, "Epochs");
    trainq->add_option("--lr", trainq_cfg.rel_lr, "Learning rate");
    trainq_flags.attach(trainq);
    trainq->callback([&]() {
        const Catalog catalog = read_catalog(trainq_catalog);
        const ItemMatrix matrix = load_item_matrix(trainq_matrix);
        const auto pairs = read_query_pairs(trainq_pairs);
        auto provider = trainq_flags.make();
        const QueryHead head = train_query_head(pairs, catalog, matrix, *provider, trainq_cfg);
        save_query_head(head, trainq_out);
        std::cout << "val subcategory match@5: " << head.meta.val_metric << " (epoch "
                  << head.meta.selected_epoch << ")\n";
    });

    // gen-tasks
    auto* gen = app.add_subcommand("gen-tasks", "Generate a synthetic benchmark world");
    std::string gen_world = "ablation", gen_out;
    AblationWorldConfig ablation_cfg;
    TrainingWorldConfig training_cfg;
    gen->add_option("--world", gen_world, "ablation or training")
        ->check(CLI::IsMember({"ablation", "training"}));
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--bundle-tasks", ablation_cfg.bundle_tasks, "Bundle task count");
    gen->add_option("--comparative-tasks", ablation_cfg.comparative_tasks,
                    "Comparative task count");
    gen->add_option("--clusters", training_cfg.clusters, "Planted cluster count");
    gen->add_option("--users", training_cfg.users, "Synthetic user count");
    uint64_t gen_seed = 0;
    auto* seed_opt = gen->add_option("--seed", gen_seed, "World seed");
    gen->callback([&]() {
        if (gen_world == "ablation") {
            if (!seed_opt->empty()) ablation_cfg.seed = gen_seed;
            const AblationWorld world = make_ablation_world(ablation_cfg);
            write_ablation_world(world, ablation_cfg, gen_out);
            std::cout << "items: " << world.catalog.size()
                      << ", instances: " << world.instances.size() << "\n";
        } else {
            if (!seed_opt->empty()) training_cfg.seed = gen_seed;
            const TrainingWorld world = make_training_world(training_cfg);
            write_training_world(world, training_cfg, gen_out);
            std::cout << "items: " << world.catalog.size()
                      << ", edges: " << world.graph.edges.size()
                      << ", query pairs: " << world.query_pairs.size() << "\n";
        }
    });

    // run
    auto* run = app.add_subcommand("run", "Run a benchmark sweep");
    std::string run_queries, run_catalog, run_matrix, run_pair, run_head, run_out;
    std::vector<std::string> run_variants{"semantic"};
    std::vector<double> run_rates{0.0};
    std::vector<std::string> run_policies;
    std::string run_model = "default";
    SweepConfig sweep_cfg;
    EmbedderFlags run_flags;
    bool run_traces = false;
    run->add_option("--queries", run_queries, "Query instance JSONL")->required();
    run->add_option("--catalog", run_catalog, "Catalog JSONL")->required();
    run->add_option("--matrix", run_matrix, "Item matrix")->required();
    run->add_option("--pair", run_pair, "Trained projection pair (utility variant)");
    run->add_option("--query-head", run_head, "Trained query head (utility variant)");
    run->add_option("--variant", run_variants, "Tool variant(s): semantic, utility");
    run->add_option("--faulty-rate", run_rates, "Fault injection rate(s)");
    run->add_option("--policy", run_policies,
                    "Policies: scripted:<name> or chat:<url>")
        ->required();
    run->add_option("--model", run_model, "Model label for chat policies");
    run->add_option("--k", sweep_cfg.k, "Report size");
    run->add_option("--budget", sweep_cfg.budget, "Tool-decision budget");
    run->add_option("--workers", sweep_cfg.workers, "Concurrent episodes");
    run->add_option("--fault-seed", sweep_cfg.fault_master_seed, "Fault master seed");
    run->add_option("--out", run_out, "Output directory")->required();
    run->add_flag("--traces", run_traces, "Also write per-episode traces");
    run_flags.attach(run);
    run->callback([&]() {
        const auto instances = load_query_file(run_queries);
        const Catalog catalog = read_catalog(run_catalog);
        const ItemMatrix matrix = load_item_matrix(run_matrix);
        auto provider = run_flags.make();
        if (provider->dim() != static_cast<size_t>(matrix.vectors.cols())) {
            throw CLI::ValidationError("--embed-dim", "embedder dimension does not match matrix");
        }

        std::unique_ptr<ProjectionPair> pair;
        if (!run_pair.empty()) {
            pair = std::make_unique<ProjectionPair>(load_projection_pair(run_pair));
        }
        std::unique_ptr<QueryHead> head;
        if (!run_head.empty()) head = std::make_unique<QueryHead>(load_query_head(run_head));

        const CentroidIndex index = build_centroid_index(catalog, matrix, pair.get());
        ScoringContext scoring;
        scoring.catalog = &catalog;
        scoring.matrix = &matrix;
        scoring.index = &index;
        scoring.pair = pair.get();
        scoring.head = head.get();
        scoring.provider = provider.get();
        scoring.k = sweep_cfg.k;

        SweepWorld world;
        world.catalog = &catalog;
        world.matrix = &matrix;
        world.provider = provider.get();
        world.pair = pair.get();
        world.query_head = head.get();
        world.scoring = &scoring;

        for (const auto& variant : run_variants) {
            for (const double rate : run_rates) {
                sweep_cfg.cells.push_back({variant_from_name(variant), rate});
            }
        }

        std::vector<PolicyEntry> entries;
        for (const auto& spec : run_policies) {
            if (spec.rfind("scripted:", 0) == 0) {
                entries.push_back(scripted_policy_entry(spec.substr(9)));
            } else if (spec.rfind("chat:", 0) == 0) {
                entries.push_back(
                    chat_policy_entry(run_model, parse_chat_endpoint(spec.substr(5), run_model)));
            } else {
                throw CLI::ValidationError("--policy", "expected scripted:<name> or chat:<url>");
            }
        }

        std::filesystem::create_directories(run_out);
        sweep_cfg.results_path = run_out + "/results.jsonl";
        if (run_traces) sweep_cfg.traces_path = run_out + "/traces.jsonl";

        const auto rows = run_sweep(instances, world, entries, sweep_cfg);
        std::cout << format_table(aggregate(rows));
    });

    // aggregate
    auto* agg = app.add_subcommand("aggregate", "Aggregate sweep results");
    std::string agg_in, agg_format = "table";
    agg->add_option("--in", agg_in, "Results directory or results.jsonl")->required();
    agg->add_option("--format", agg_format, "table, csv, or plotdata")
        ->check(CLI::IsMember({"table", "csv", "plotdata"}));
    agg->callback([&]() {
        std::string path = agg_in;
        if (std::filesystem::is_directory(path)) path += "/results.jsonl";
        std::vector<ResultsRow> rows;
        for (const json& j : read_jsonl(path)) rows.push_back(results_row_from_json(j));
        const Leaderboard board = aggregate(rows);
        if (agg_format == "table") {
            std::cout << format_table(board);
        } else if (agg_format == "csv") {
            std::cout << format_csv(board);
        } else {
            std::cout << format_plotdata(board).dump(2) << "\n";
        }
    });

    // judge
    auto* judge = app.add_subcommand("judge", "Render or execute semantic judge prompts");
    std::string judge_traces, judge_catalog, judge_endpoint, judge_model = "default",
                judge_render_dir;
    size_t judge_k = 20;
    bool judge_no_enforce = false;
    judge->add_option("--traces", judge_traces, "Episode trace JSONL from run --traces")
        ->required();
    judge->add_option("--catalog", judge_catalog, "Catalog JSONL")->required();
    judge->add_option("--endpoint", judge_endpoint, "Chat endpoint URL; omit to render only");
    judge->add_option("--model", judge_model, "Judge model name");
    judge->add_option("--render-dir", judge_render_dir, "Directory for rendered prompts");
    judge->add_option("--k", judge_k, "Report size used for validation");
    judge->add_flag("--no-enforce-observed", judge_no_enforce,
                    "Allow report ids outside the observed candidate set");
    judge->callback([&]() {
        const bool judge_enforce = !judge_no_enforce;
        const Catalog catalog = read_catalog(judge_catalog);
        std::unique_ptr<Policy> client;
        if (!judge_endpoint.empty()) {
            client = make_chat_policy(parse_chat_endpoint(judge_endpoint, judge_model));
        }
        if (!judge_render_dir.empty()) std::filesystem::create_directories(judge_render_dir);

        std::vector<JudgeVerdict> verdicts;
        size_t rendered = 0;
        for (const json& line : read_jsonl(judge_traces)) {
            const json& tj = line.at("trace");
            Report report;
            report.report_explanation =
                tj.at("final_report").at("report_explanation").get<std::string>();
            report.parse_failed = tj.at("final_report").at("parse_failed").get<bool>();
            for (const auto& e : tj.at("final_report").at("results")) {
                report.results.push_back(
                    {e.at("product_id").get<std::string>(), e.at("reasoning").get<std::string>()});
            }
            std::set<std::string> observed;
            for (const auto& id : tj.at("observed_ids")) observed.insert(id.get<std::string>());

            const ValidatedSet valid =
                validate_report(report, catalog, observed, judge_k, judge_enforce);
            Report validated;
            validated.report_explanation = report.report_explanation;
            std::vector<std::string> expected;
            for (const auto& id : valid.valid_ids) {
                expected.push_back(id);
                for (const auto& item : report.results) {
                    if (item.product_id == id) {
                        validated.results.push_back(item);
                        break;
                    }
                }
            }

            const std::string query = line.at("query").get<std::string>();
            const JudgePrompts prompts = render_judge_prompts(query, validated, catalog);
            if (!judge_render_dir.empty()) {
                const std::string base =
                    judge_render_dir + "/" + line.at("key").get<std::string>();
                std::ofstream(base + ".quality.txt")
                    << prompts.quality_system << "\n---\n" << prompts.quality_user << "\n";
                std::ofstream(base + ".explanation.txt")
                    << prompts.explanation_system << "\n---\n" << prompts.explanation_user << "\n";
                ++rendered;
            }
            if (client) {
                const std::string quality_raw =
                    client->decide(prompts.quality_system, prompts.quality_user);
                const std::string explanation_raw =
                    client->decide(prompts.explanation_system, prompts.explanation_user);
                verdicts.push_back(parse_judge_responses(quality_raw, explanation_raw, expected));
            }
        }
        if (client) {
            std::cout << judge_aggregate_to_json(aggregate_judge(verdicts)).dump(2) << "\n";
        } else {
            std::cout << "rendered " << rendered << " prompt pairs\n";
        }
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
