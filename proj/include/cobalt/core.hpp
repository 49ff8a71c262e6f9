#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace cobalt {

using json = nlohmann::ordered_json;

// Caller handed us something invalid (bad enum string, out-of-range score,
// malformed input file, ...). Exit code 2 at the CLI boundary.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The environment failed us (process spawn, unreadable store, lying solver).
// Exit code 3 at the CLI boundary.
struct InfraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Category { MEM, INT, AUTH, CRYPTO, INP };
enum class Language { C, PYTHON };
enum class PromptVariant { BASELINE, SECURE };
enum class Grade { A, B, C, D, F };
enum class SeverityLevel { CRITICAL, HIGH, MEDIUM };
// SOLVER_SAT: proven reachable by a verified solver witness. PATTERN_MATCH:
// structural evidence only.
enum class FindingStatus { SOLVER_SAT, PATTERN_MATCH };

std::string to_string(Category c);
std::string to_string(Language l);
std::string to_string(PromptVariant v);
std::string to_string(Grade g);
std::string to_string(SeverityLevel s);
std::string to_string(FindingStatus s);

Category category_from_string(const std::string& s);
Language language_from_string(const std::string& s);
PromptVariant prompt_variant_from_string(const std::string& s);
Grade grade_from_string(const std::string& s);
SeverityLevel severity_level_from_string(const std::string& s);
FindingStatus finding_status_from_string(const std::string& s);

// One of the ten weakness classes the pipeline can report. Anything else is
// rejected at construction.
class CweId {
public:
    explicit CweId(int value);
    int value() const { return value_; }
    static bool is_valid(int value);
    friend auto operator<=>(const CweId&, const CweId&) = default;

private:
    int value_;
};

struct Severity {
    SeverityLevel level = SeverityLevel::MEDIUM;
    double cvss_score = 0.0;
};

// A single generated artifact: one function, one file.
struct Artifact {
    std::string artifact_id;
    std::string model_id;
    std::string prompt_id;
    Category category = Category::MEM;
    Language language = Language::C;
    std::string source;
    PromptVariant prompt_variant = PromptVariant::BASELINE;
    // Set when provenance is shaky (e.g. the model reply had no code fence).
    bool low_confidence = false;
};

// Letter grade for a vulnerability rate in percent. Buckets are half-open:
// [0,10) A, [10,30) B, [30,45) C, [45,60) D, [60,100] F.
Grade grade_from_rate(double rate_percent);

// Maps a CVSS 3.1 base score in [4.0, 10.0] to a bucket:
// [4,7) MEDIUM, [7,9) HIGH, [9,10] CRITICAL. Outside the range: DomainError.
Severity severity_from_cvss(double score);

// Fixed base score per weakness class (no per-finding rescoring).
double cvss_score_for(CweId cwe);

// ---- exact percentage arithmetic -------------------------------------------
// All 1-decimal percentages are computed in integer tenths with half-up
// rounding so report figures are reproducible bit-for-bit.

// round(num/den) with ties going up; num, den >= 0, den > 0.
std::int64_t round_half_up_div(std::int64_t num, std::int64_t den);

// Percentage of part/whole in tenths, e.g. 312/500 -> 624 (62.4%).
std::int64_t percent_tenths(std::int64_t part, std::int64_t whole);

// Tenths -> double with one decimal (624 -> 62.4).
double tenths_to_percent(std::int64_t tenths);

// Classic half-up rounding of an already-computed double to 1 decimal.
double round1(double v);

void to_json(json& j, const Artifact& a);
void from_json(const json& j, Artifact& a);
void to_json(json& j, const Severity& s);
void from_json(const json& j, Severity& s);

}  // namespace cobalt
