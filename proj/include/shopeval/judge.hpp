#pragma once

#include <map>
#include <string>
#include <vector>

#include "shopeval/catalog.hpp"
#include "shopeval/scoring.hpp"

namespace shopeval {

// Rendered prompt pair for one report: product quality and explanation quality.
struct JudgePrompts {
    std::string quality_system;
    std::string quality_user;
    std::string explanation_system;
    std::string explanation_user;
};

// Renders both judge prompt templates for a validated report. Items missing
// from the catalog render with empty title and text.
JudgePrompts render_judge_prompts(const std::string& query, const Report& report,
                                  const Catalog& catalog);

struct ItemQualityFlags {
    int relevance = 0;
    int complementarity = 0;
    int diversity = 0;
};

struct ItemReasonFlags {
    int specificity = 0;
    int faithfulness = 0;
    int justification = 0;
};

// Parsed verdicts for one report. Expected items missing from a response keep
// all-zero flags; a response that fails the schema marks its half invalid.
struct JudgeVerdict {
    bool quality_valid = false;
    bool reasoning_valid = false;
    std::map<std::string, ItemQualityFlags> quality;
    std::map<std::string, ItemReasonFlags> reasoning;
    int strategy_coherence = 0;
    int overall_report_quality = 0;
};

JudgeVerdict parse_judge_responses(const std::string& quality_raw,
                                   const std::string& explanation_raw,
                                   const std::vector<std::string>& expected_ids);

// Means of per-report mean flags over the valid verdicts of each half, plus
// counts of invalid responses excluded from those means.
struct JudgeAggregate {
    size_t quality_reports = 0;
    size_t reasoning_reports = 0;
    size_t invalid_quality = 0;
    size_t invalid_reasoning = 0;
    double relevance = 0.0;
    double complementarity = 0.0;
    double diversity = 0.0;
    double specificity = 0.0;
    double faithfulness = 0.0;
    double justification = 0.0;
    double strategy_coherence = 0.0;
    double overall_report_quality = 0.0;
};

JudgeAggregate aggregate_judge(const std::vector<JudgeVerdict>& verdicts);

json judge_aggregate_to_json(const JudgeAggregate& agg);

}  // namespace shopeval
