#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobalt/core.hpp"
#include "cobalt/pipeline.hpp"

namespace cobalt::report {

struct ModelReport {
    std::string model_id;
    int total = 0;
    int vulnerable = 0;
    double rate = 0.0;  // percent, one decimal
    int crit_count = 0;
    int high_count = 0;
    int solver_sat_count = 0;
    Grade grade = Grade::A;
};

struct CorpusReport {
    std::vector<ModelReport> rows;  // rate descending, then model_id
    double mean_rate = 0.0;
    // Mean across models of each model's per-category vulnerable rate;
    // categories absent from the corpus are omitted.
    std::map<Category, double> category_rates;
};

// Normalized record of one external static-analysis tool hit.
struct ToolFinding {
    std::string tool_id;
    std::string artifact_id;
    std::string rule_id;
    std::optional<int> line;
};

struct ToolOverlapRow {
    std::string tool_id;
    int caught = 0;  // artifacts with >= 1 hit from this tool
    double rate = 0.0;
};

struct SatMissed {
    int missed = 0;
    int total = 0;  // artifacts carrying >= 1 solver-proven finding
    double percentage = 0.0;
};

struct OverlapReport {
    int total_artifacts = 0;
    std::vector<ToolOverlapRow> tools;  // first-appearance order
    int combined_caught = 0;
    double combined_rate = 0.0;
    int flagged_count = 0;      // pipeline-positive artifacts
    int pipeline_only = 0;      // flagged but missed by every tool
    double pipeline_only_rate = 0.0;  // over flagged_count
    SatMissed sat_missed;
};

// Groups results by model (metadata from `corpus`), counts vulnerable
// artifacts and CRITICAL/HIGH/solver-proven findings, and computes exact
// one-decimal rates. Empty corpus or a result naming an artifact outside the
// corpus is a DomainError.
CorpusReport build_leaderboard(const std::vector<pipeline::ArtifactResult>& results,
                               const std::vector<Artifact>& corpus);

// Artifact-level overlap: a tool catches an artifact if it reports at least
// one finding on it. A tool finding naming an artifact outside `results` is
// a DomainError.
OverlapReport compare_tools(const std::vector<pipeline::ArtifactResult>& results,
                            const std::vector<ToolFinding>& tool_findings);

std::string render_leaderboard_md(const CorpusReport& r);
std::string render_overlap_md(const OverlapReport& r);

void to_json(json& j, const ModelReport& r);
void to_json(json& j, const CorpusReport& r);
void to_json(json& j, const ToolOverlapRow& r);
void to_json(json& j, const SatMissed& s);
void to_json(json& j, const OverlapReport& r);
void to_json(json& j, const ToolFinding& f);
void from_json(const json& j, ToolFinding& f);

std::vector<ToolFinding> tool_findings_from_json(const json& j);

}  // namespace cobalt::report
