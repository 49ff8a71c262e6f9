#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cobalt/core.hpp"
#include "cobalt/encode.hpp"
#include "cobalt/smt.hpp"

namespace cobalt::pipeline {

enum class Backend { BUILTIN, EXTERNAL };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct AnalysisConfig {
    encode::Width width{};  // 32 unless configured
    Backend backend = Backend::BUILTIN;
    std::string solver_command;  // EXTERNAL only
    int timeout_ms = 5000;
    int jobs = 1;

    void validate() const;  // DomainError on contradiction
};

// One reported vulnerability. finding_id is the first 16 hex digits of
// SHA-256("<artifact_id>|<detector_id>|<line>") so reports, overlap
// comparison, and PoC emission can name findings stably across runs.
struct Finding {
    std::string finding_id;
    std::string artifact_id;
    std::string detector_id;
    CweId cwe{190};
    int line = 0;
    FindingStatus status = FindingStatus::PATTERN_MATCH;
    Severity severity;
    std::optional<smt::Witness> witness;  // present iff SOLVER_SAT
    std::optional<std::string> smtlib;    // query text when one was built
    std::string evidence;
    json site;  // serialized candidate site that produced this finding
};

struct ArtifactResult {
    std::string artifact_id;
    // Provenance echoed from the manifest so downstream aggregation can run
    // from the results file alone.
    std::string model_id;
    std::string prompt_id;
    Category category = Category::MEM;
    Language language = Language::C;
    PromptVariant prompt_variant = PromptVariant::BASELINE;
    std::vector<Finding> findings;
    bool vulnerable = false;
    // Set when the artifact could not be analyzed (unreadable file, solver
    // infrastructure failure); findings empty, vulnerable false.
    std::optional<std::string> error;
};

std::string make_finding_id(const std::string& artifact_id, const std::string& detector_id,
                            int line);

// Frontend -> encode -> solve -> classify for one artifact. Deterministic
// given the config; pure except for external solver processes.
ArtifactResult analyze_artifact(const Artifact& artifact, const AnalysisConfig& config);

// One manifest row; path is relative to the corpus root.
struct CorpusEntry {
    std::string artifact_id;
    std::string model_id;
    std::string prompt_id;
    Category category = Category::MEM;
    Language language = Language::C;
    PromptVariant prompt_variant = PromptVariant::BASELINE;
    std::string path;
};

// Reads and validates <root>/manifest.json. Malformed entries are all
// reported in one DomainError, not just the first.
std::vector<CorpusEntry> load_manifest(const std::filesystem::path& corpus_root);

// Loads the entry's source file and assembles the Artifact.
Artifact load_corpus_artifact(const std::filesystem::path& corpus_root, const CorpusEntry& entry);

// Analyzes every manifest entry, fanning out across config.jobs workers.
// Results are ordered by (model_id, prompt_id) and bit-identical for any
// jobs value. A missing or unanalyzable artifact becomes an error record and
// the run continues.
std::vector<ArtifactResult> run_corpus(const std::filesystem::path& corpus_root,
                                       const AnalysisConfig& config);

void to_json(json& j, const Finding& f);
void from_json(const json& j, Finding& f);
void to_json(json& j, const ArtifactResult& r);
void from_json(const json& j, ArtifactResult& r);

// Results-file round-trip (JSON array of ArtifactResult).
json results_to_json(const std::vector<ArtifactResult>& results);
std::vector<ArtifactResult> results_from_json(const json& j);

}  // namespace cobalt::pipeline
