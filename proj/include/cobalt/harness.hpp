#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cobalt/core.hpp"
#include "cobalt/pipeline.hpp"

namespace cobalt::harness {

enum class Mode { LIVE, REPLAY };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct ProviderConfig {
    std::string provider_id;
    std::string endpoint;        // chat-completion URL (LIVE only)
    std::string model;           // default model identifier
    std::string credential_env;  // env var holding the API key (LIVE only)
    double temperature = 0.0;    // pinned; anything else is a DomainError
    int max_retries = 2;
    int request_delay_ms = 0;

    void validate() const;
};

ProviderConfig provider_from_json(const json& j);
ProviderConfig load_provider_config(const std::filesystem::path& path);

struct PromptSpec {
    std::string prompt_id;
    Category category = Category::MEM;
    Language language = Language::C;
    std::string text;
    PromptVariant system_prompt_variant = PromptVariant::BASELINE;
};

void from_json(const json& j, PromptSpec& p);
std::vector<PromptSpec> prompts_from_json(const json& j);
std::vector<PromptSpec> load_prompts(const std::filesystem::path& path);

// The versioned system prompts the generator sends (plain vs. security-
// explicit instructions).
const std::string& system_prompt(PromptVariant v);

// Single chat-completion request shape shared by every provider; the
// temperature field is unconditionally zero.
json build_chat_request(const ProviderConfig& provider, const std::string& model,
                        const std::string& system_text, const std::string& user_text);

// One JSON file per exchange at <root>/<provider>/<model>/<key>.json with
// {request, response, timestamp} (or {request, error, timestamp} for a
// recorded provider failure).
class ReplayStore {
public:
    explicit ReplayStore(std::filesystem::path root);
    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path entry_path(const std::string& provider_id, const std::string& model,
                                     const std::string& key) const;
    std::optional<json> load(const std::string& provider_id, const std::string& model,
                             const std::string& key) const;
    void save(const std::string& provider_id, const std::string& model, const std::string& key,
              const json& request, const json& response) const;
    void save_error(const std::string& provider_id, const std::string& model,
                    const std::string& key, const json& request,
                    const std::string& error) const;

private:
    std::filesystem::path root_;
};

// LIVE posts to the provider endpoint (recording every exchange); REPLAY
// serves exclusively from the store and treats a miss as InfraError.
class ChatClient {
public:
    ChatClient(ProviderConfig provider, Mode mode, std::filesystem::path store_root);

    // Returns the assistant message text for one exchange. `key` names the
    // replay entry; `model` may differ per call (self-review addresses each
    // artifact's own generator).
    std::string chat(const std::string& key, const std::string& model,
                     const std::string& system_text, const std::string& user_text);

    const ProviderConfig& provider() const { return provider_; }
    Mode mode() const { return mode_; }

private:
    ProviderConfig provider_;
    Mode mode_;
    ReplayStore store_;
};

// First fenced code block, or the whole response when no fence opens one
// (second element: true iff a fence was found).
std::pair<std::string, bool> extract_code_block(const std::string& response);

// Artifact ids are path-safe: anything outside [A-Za-z0-9._-] becomes '-'.
std::string sanitize_artifact_id(const std::string& raw);

struct GenerationError {
    std::string prompt_id;
    std::string variant;
    std::string message;
    int retries = 0;
};

struct GenerationResult {
    std::vector<Artifact> artifacts;
    std::vector<GenerationError> errors;
};

GenerationResult generate_artifacts(const std::vector<PromptSpec>& prompts,
                                    const ProviderConfig& provider, Mode mode,
                                    const std::filesystem::path& replay_store);

struct ReviewVerdict {
    std::string artifact_id;
    std::string model_id;
    bool detected = false;
    std::optional<CweId> matched_cwe;
    std::string raw_response;
};

struct ReviewExclusion {
    std::string artifact_id;
    std::string model_id;
    std::string message;
};

struct ModelReviewRate {
    std::string model_id;
    int detected = 0;
    int reviewed = 0;
    double rate = 0.0;  // percent, one decimal
};

struct ReviewSummary {
    std::vector<ModelReviewRate> per_model;  // model_id ascending
    int detected_total = 0;
    int reviewed_total = 0;
    double detection_rate = 0.0;
    double false_negative_rate = 0.0;  // 100 - detection_rate
};

struct ReviewResult {
    std::vector<ReviewVerdict> verdicts;
    std::vector<ReviewExclusion> excluded;
    ReviewSummary summary;
};

// Detection rubric: the response must label the code vulnerable/insecure
// AND name one of the finding CWEs, by number or by class keyword.
bool review_detects(const std::string& response, const std::vector<CweId>& cwes,
                    std::optional<CweId>* matched = nullptr);

// Optional source resolver for LIVE review prompts; REPLAY needs none (the
// recorded key is the artifact id). Falls back to finding evidence.
using SourceLookup = std::function<std::optional<std::string>(const std::string& artifact_id)>;

// Reviews every artifact that carries at least one solver-proven finding,
// asking its generating model. A provider failure excludes the artifact and
// is recorded; rates cover the remainder.
ReviewResult self_review(const std::vector<pipeline::ArtifactResult>& results,
                         const ProviderConfig& provider, Mode mode,
                         const std::filesystem::path& replay_store,
                         const SourceLookup& source_lookup = {});

void to_json(json& j, const GenerationError& e);
void to_json(json& j, const GenerationResult& r);
void to_json(json& j, const ReviewVerdict& v);
void to_json(json& j, const ReviewExclusion& e);
void to_json(json& j, const ModelReviewRate& r);
void to_json(json& j, const ReviewSummary& s);
void to_json(json& j, const ReviewResult& r);

}  // namespace cobalt::harness
