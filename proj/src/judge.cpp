#include "shopeval/judge.hpp"

#include "shopeval/text.hpp"
#include "shopeval/tools.hpp"

namespace shopeval {

namespace {

constexpr const char* kQualitySystem =
    "You are a helpful assistant that evaluates product recommendation quality. You return "
    "structured JSON assessments.";

constexpr const char* kExplanationSystem =
    "You are a helpful assistant that evaluates the quality of reasoning provided by a product "
    "recommendation system. You return structured JSON assessments.";

std::string item_header(const Catalog& catalog, const std::string& id) {
    std::string title;
    std::string text;
    if (catalog.has(id)) {
        const CatalogItem& item = catalog.get(id);
        title = item.title;
        text = truncate_chars(item.description, kToolTextChars);
    }
    return "- " + id + ": " + title + "\n  " + text;
}

std::string quality_products_block(const Report& report, const Catalog& catalog) {
    std::string block;
    for (const auto& item : report.results) {
        if (!block.empty()) block += "\n";
        block += item_header(catalog, item.product_id);
    }
    return block;
}

std::string explanation_products_block(const Report& report, const Catalog& catalog) {
    std::string block;
    for (const auto& item : report.results) {
        if (!block.empty()) block += "\n";
        block += item_header(catalog, item.product_id) + "\n  Reasoning: " + item.reasoning;
    }
    return block;
}

int strict_flag(const json& j, const char* field, bool& ok) {
    if (!j.contains(field) || !j.at(field).is_number_integer()) {
        ok = false;
        return 0;
    }
    const int v = j.at(field).get<int>();
    if (v != 0 && v != 1) {
        ok = false;
        return 0;
    }
    return v;
}

const json* parse_items_object(const std::string& raw, json& storage) {
    storage = json::parse(strip_code_fence(raw), nullptr, false);
    if (storage.is_discarded() || !storage.is_object()) return nullptr;
    if (!storage.contains("items") || !storage.at("items").is_object()) return nullptr;
    return &storage.at("items");
}

}  // namespace

JudgePrompts render_judge_prompts(const std::string& query, const Report& report,
                                  const Catalog& catalog) {
    JudgePrompts prompts;
    prompts.quality_system = kQualitySystem;
    prompts.explanation_system = kExplanationSystem;

    prompts.quality_user =
        "Below is a set of product recommendations made for a user. Please assess the quality of "
        "each recommended product.\n"
        "\n"
        "## User Need\n"
        "\n" +
        query +
        "\n"
        "\n"
        "## Recommended Products\n"
        "\n" +
        quality_products_block(report, catalog) +
        "\n"
        "\n"
        "## Assessment Criteria\n"
        "\n"
        "For each product, assign binary scores: 1 = yes, 0 = no.\n"
        "\n"
        "1. relevance: Does this product genuinely address the user's stated need? Would a "
        "reasonable shopper consider it a relevant result?\n"
        "\n"
        "2. complementarity: Does this product add complementary value to the set? Would a buyer "
        "naturally purchase it alongside at least one other recommended item, e.g., a guitar case "
        "with a guitar? Score 0 if it serves the same function as another item, or has no logical "
        "pairing with any other item in the set.\n"
        "\n"
        "3. diversity: Is this product sufficiently different from the other recommended items? "
        "Does it cover a distinct subcategory, use-case, or product type? Score 0 if another "
        "recommended item could fully substitute for it.\n"
        "\n"
        "Respond with a JSON object:\n"
        "\n"
        "{\n"
        "  \"items\": {\n"
        "    \"<product_id>\": {\n"
        "      \"relevance\": <0|1>,\n"
        "      \"complementarity\": <0|1>,\n"
        "      \"diversity\": <0|1>\n"
        "    },\n"
        "    ...\n"
        "  }\n"
        "}";

    prompts.explanation_user =
        "Below is a product recommendation produced by an automated system. Please assess the "
        "quality of the reasoning and explanations.\n"
        "\n"
        "## User Need\n"
        "\n" +
        query +
        "\n"
        "\n"
        "## Strategy Explanation\n"
        "\n" +
        report.report_explanation +
        "\n"
        "\n"
        "## Recommended Products with Reasoning\n"
        "\n" +
        explanation_products_block(report, catalog) +
        "\n"
        "\n"
        "## Assessment Criteria\n"
        "\n"
        "For each product, assess the reasoning quality using binary scores: 1 = yes, 0 = no.\n"
        "\n"
        "1. specificity: Does the reasoning mention concrete product attributes, features, "
        "constraints, or use-cases instead of generic praise such as \"good quality\" or "
        "\"useful\"?\n"
        "\n"
        "2. faithfulness: Are the claims in the reasoning supported by the product description "
        "shown above, without inventing capabilities, materials, or benefits that are not "
        "evidenced in the text?\n"
        "\n"
        "3. justification: Does the reasoning clearly connect this particular product to the "
        "user's stated need, explaining why it belongs in the recommendation set instead of only "
        "describing the product in isolation?\n"
        "\n"
        "If no meaningful reasoning was provided for a product, score all three as 0.\n"
        "\n"
        "Additionally:\n"
        "\n"
        "- strategy_coherence: Is the strategy explanation internally coherent, and is that "
        "strategy actually reflected in the final selected products?\n"
        "\n"
        "- overall_report_quality: Considering the strategy explanation and all item-level "
        "reasons together, does the report read like a coherent, useful overall recommendation "
        "report for this user need?\n"
        "\n"
        "Respond with a JSON object:\n"
        "\n"
        "{\n"
        "  \"items\": {\n"
        "    \"<product_id>\": {\n"
        "      \"specificity\": <0|1>,\n"
        "      \"faithfulness\": <0|1>,\n"
        "      \"justification\": <0|1>\n"
        "    },\n"
        "    ...\n"
        "  },\n"
        "  \"strategy_coherence\": <0|1>,\n"
        "  \"overall_report_quality\": <0|1>\n"
        "}";

    return prompts;
}

JudgeVerdict parse_judge_responses(const std::string& quality_raw,
                                   const std::string& explanation_raw,
                                   const std::vector<std::string>& expected_ids) {
    JudgeVerdict verdict;
    for (const auto& id : expected_ids) {
        verdict.quality[id] = {};
        verdict.reasoning[id] = {};
    }

    json quality_storage;
    if (const json* items = parse_items_object(quality_raw, quality_storage)) {
        bool ok = true;
        std::map<std::string, ItemQualityFlags> parsed = verdict.quality;
        for (const auto& [id, flags] : items->items()) {
            if (!flags.is_object()) {
                ok = false;
                break;
            }
            ItemQualityFlags f;
            f.relevance = strict_flag(flags, "relevance", ok);
            f.complementarity = strict_flag(flags, "complementarity", ok);
            f.diversity = strict_flag(flags, "diversity", ok);
            if (!ok) break;
            if (parsed.count(id)) parsed[id] = f;
        }
        if (ok) {
            verdict.quality_valid = true;
            verdict.quality = std::move(parsed);
        }
    }

    json explanation_storage;
    if (const json* items = parse_items_object(explanation_raw, explanation_storage)) {
        bool ok = true;
        std::map<std::string, ItemReasonFlags> parsed = verdict.reasoning;
        for (const auto& [id, flags] : items->items()) {
            if (!flags.is_object()) {
                ok = false;
                break;
            }
            ItemReasonFlags f;
            f.specificity = strict_flag(flags, "specificity", ok);
            f.faithfulness = strict_flag(flags, "faithfulness", ok);
            f.justification = strict_flag(flags, "justification", ok);
            if (!ok) break;
            if (parsed.count(id)) parsed[id] = f;
        }
        const int coherence = strict_flag(explanation_storage, "strategy_coherence", ok);
        const int overall = strict_flag(explanation_storage, "overall_report_quality", ok);
        if (ok) {
            verdict.reasoning_valid = true;
            verdict.reasoning = std::move(parsed);
            verdict.strategy_coherence = coherence;
            verdict.overall_report_quality = overall;
        }
    }
    return verdict;
}

JudgeAggregate aggregate_judge(const std::vector<JudgeVerdict>& verdicts) {
    JudgeAggregate agg;
    for (const auto& v : verdicts) {
        if (v.quality_valid) {
            double rel = 0.0, comp = 0.0, div = 0.0;
            for (const auto& [id, f] : v.quality) {
                rel += f.relevance;
                comp += f.complementarity;
                div += f.diversity;
            }
            const double n = v.quality.empty() ? 1.0 : static_cast<double>(v.quality.size());
            agg.relevance += rel / n;
            agg.complementarity += comp / n;
            agg.diversity += div / n;
            ++agg.quality_reports;
        } else {
            ++agg.invalid_quality;
        }
        if (v.reasoning_valid) {
            double spec = 0.0, faith = 0.0, just = 0.0;
            for (const auto& [id, f] : v.reasoning) {
                spec += f.specificity;
                faith += f.faithfulness;
                just += f.justification;
            }
            const double n = v.reasoning.empty() ? 1.0 : static_cast<double>(v.reasoning.size());
            agg.specificity += spec / n;
            agg.faithfulness += faith / n;
            agg.justification += just / n;
            agg.strategy_coherence += v.strategy_coherence;
            agg.overall_report_quality += v.overall_report_quality;
            ++agg.reasoning_reports;
        } else {
            ++agg.invalid_reasoning;
        }
    }
    if (agg.quality_reports > 0) {
        const double n = static_cast<double>(agg.quality_reports);
        agg.relevance /= n;
        agg.complementarity /= n;
        agg.diversity /= n;
    }
    if (agg.reasoning_reports > 0) {
        const double n = static_cast<double>(agg.reasoning_reports);
        agg.specificity /= n;
        agg.faithfulness /= n;
        agg.justification /= n;
        agg.strategy_coherence /= n;
        agg.overall_report_quality /= n;
    }
    return agg;
}

json judge_aggregate_to_json(const JudgeAggregate& agg) {
    json j;
    j["quality_reports"] = agg.quality_reports;
    j["reasoning_reports"] = agg.reasoning_reports;
    j["invalid_quality"] = agg.invalid_quality;
    j["invalid_reasoning"] = agg.invalid_reasoning;
    j["relevance"] = agg.relevance;
    j["complementarity"] = agg.complementarity;
    j["diversity"] = agg.diversity;
    j["specificity"] = agg.specificity;
    j["faithfulness"] = agg.faithfulness;
    j["justification"] = agg.justification;
    j["strategy_coherence"] = agg.strategy_coherence;
    j["overall_report_quality"] = agg.overall_report_quality;
    return j;
}

}  // namespace shopeval
