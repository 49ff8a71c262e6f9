#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cobalt/core.hpp"

namespace cobalt::pyfront {

enum class PySiteKind { SQL_CONCAT, SHELL_CONCAT, PATH_TRAVERSAL, FAST_PASSWORD_HASH, WEAK_RANDOM };

std::string to_string(PySiteKind k);

struct PySite {
    std::string artifact_id;  // stamped by the pipeline
    std::string detector_id;
    CweId cwe{89};
    int line = 0;  // 1-based, first physical line of the statement
    PySiteKind kind = PySiteKind::SQL_CONCAT;
    std::string evidence;  // the full offending (logical) statement
};

// Statement-level structural scan; total on arbitrary UTF-8 text, no Python
// execution or AST.
std::vector<PySite> extract_py_sites(std::string_view source);

void to_json(json& j, const PySite& s);

}  // namespace cobalt::pyfront
