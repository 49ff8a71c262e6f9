#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cobalt/core.hpp"
#include "cobalt/pipeline.hpp"
#include "cobalt/pyfront.hpp"

namespace cobalt::poc {

enum class Fault { HEAP_BUFFER_OVERFLOW, ALLOC_SIZE_TOO_BIG, OOB_READ, NONE, BLOCKED };

std::string to_string(Fault f);

struct PocOutcome {
    std::string finding_id;
    bool ran = false;
    Fault fault = Fault::NONE;
    std::string raw_output;
};

// Renders a standalone sanitizer-ready C harness for a solver-proven C
// finding: the artifact source rides along in a comment block, and main
// replays the proven size computation with the witness inputs, then performs
// the access the artifact would. Non-SAT finding, missing witness, or a
// non-C artifact: DomainError.
std::string emit_poc_c(const pipeline::Finding& finding, const Artifact& artifact);

// Classifies a sanitizer/interpreter transcript by its summary content.
// Unrecognized output is NONE; the caller keeps the raw text either way.
Fault triage_sanitizer_output(const std::string& output);

// emit -> write -> compile -> run -> triage. `toolchain` defaults to
// gcc -fsanitize=address,undefined -g -O1. Compile failures are InfraError;
// the harness process itself is expected to crash.
PocOutcome compile_and_run(const pipeline::Finding& finding, const Artifact& artifact,
                           const std::filesystem::path& workdir,
                           const std::vector<std::string>& toolchain = {});

// First wordlist entry whose SHA-256 digest matches. Digest must be 64 hex
// characters (DomainError otherwise); comparison is case-insensitive.
std::optional<std::string> crack_fast_hash(const std::string& hex_digest,
                                           const std::vector<std::string>& wordlist);

struct InjectionDemo {
    std::string payload;
    std::string resulting_query;
};

// Builds a tautology payload for a SQL-concatenation site and shows the
// query it produces. The site evidence must expose the interpolation slot
// (f-string brace, %s/%d, .format brace, or string concatenation).
InjectionDemo derive_injection_payload(const pyfront::PySite& site);

void to_json(json& j, const PocOutcome& o);

}  // namespace cobalt::poc
