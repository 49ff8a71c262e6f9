#include "cobalt/pyfront.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <regex>
#include <optional>
#include <set>

namespace cobalt::pyfront {

std::string to_string(PySiteKind k) {
    switch (k) {
        case PySiteKind::SQL_CONCAT: return "SQL_CONCAT";
        case PySiteKind::SHELL_CONCAT: return "SHELL_CONCAT";
        case PySiteKind::PATH_TRAVERSAL: return "PATH_TRAVERSAL";
        case PySiteKind::FAST_PASSWORD_HASH: return "FAST_PASSWORD_HASH";
        case PySiteKind::WEAK_RANDOM: return "WEAK_RANDOM";
    }
    throw DomainError("invalid PySiteKind value");
}

namespace {

struct Statement {
    int line = 0;  // first physical line, 1-based
    std::string text;
};

// Drops a trailing comment, respecting string quoting.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (size_t i = 0; i < line.size(); i++) {
        char c = line[i];
        if (quote) {
            if (c == '\\') i++;
            else if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

int bracket_delta(const std::string& text) {
    int delta = 0;
    char quote = 0;
    for (size_t i = 0; i < text.size(); i++) {
        char c = text[i];
        if (quote) {
            if (c == '\\') i++;
            else if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '(' || c == '[' || c == '{') {
            delta++;
        } else if (c == ')' || c == ']' || c == '}') {
            delta--;
        }
    }
    return delta;
}

std::string rstrip(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

// Physical lines joined into logical statements (open brackets and trailing
// backslashes continue a statement).
std::vector<Statement> split_statements(std::string_view source) {
    std::vector<Statement> out;
    Statement current;
    int depth = 0;
    bool continuation = false;
    int lineno = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t eol = source.find('\n', pos);
        if (eol == std::string_view::npos) eol = source.size();
        lineno++;
        std::string raw = strip_comment(std::string(source.substr(pos, eol - pos)));
        std::string line = rstrip(raw);
        pos = eol + 1;

        bool backslash = !line.empty() && line.back() == '\\';
        if (backslash) line.pop_back();

        if (current.text.empty() && !continuation && depth == 0) {
            current.line = lineno;
            current.text = line;
        } else {
            current.text += " " + line;
        }
        depth += bracket_delta(line);
        if (depth < 0) depth = 0;
        continuation = backslash;
        if (!backslash && depth == 0) {
            if (!rstrip(current.text).empty()) out.push_back({current.line, rstrip(current.text)});
            current = {};
        }
        if (eol == source.size()) break;
    }
    if (!rstrip(current.text).empty()) out.push_back({current.line, rstrip(current.text)});
    return out;
}

bool contains_ci(const std::string& haystack, const char* needle) {
    auto it = std::search(haystack.begin(), haystack.end(), needle, needle + strlen(needle),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

bool word_in(const std::string& text, const std::string& word) {
    size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) ||
                                     text[pos - 1] == '_');
        size_t after = pos + word.size();
        bool right_ok = after >= text.size() ||
                        !(std::isalnum(static_cast<unsigned char>(text[after])) ||
                          text[after] == '_');
        if (left_ok && right_ok) return true;
        pos++;
    }
    return false;
}

bool has_sql_keyword(const std::string& text) {
    std::string upper;
    upper.reserve(text.size());
    for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return word_in(upper, "SELECT") || word_in(upper, "INSERT") || word_in(upper, "UPDATE") ||
           word_in(upper, "DELETE");
}

// Does this expression build a string by interpolation/concatenation?
bool is_interpolated(const std::string& rhs) {
    static const std::regex fstring(R"((^|[^A-Za-z0-9_])[fF][rR]?["'])");
    static const std::regex fmt(R"(["']\s*\.\s*format\s*\()");
    static const std::regex pct(R"(["']\s*%)");
    static const std::regex concat(R"(["']\s*\+|\+\s*[fF]?["'])");
    if (std::regex_search(rhs, fstring) && rhs.find('{') != std::string::npos) return true;
    if (std::regex_search(rhs, fmt)) return true;
    if (std::regex_search(rhs, pct)) return true;
    if (std::regex_search(rhs, concat)) return true;
    return false;
}

// Plain quoted literal with nothing applied to it (no prefix interpolation,
// no %, +, .format afterwards).
bool is_pure_literal(const std::string& arg) {
    std::string s = rstrip(arg);
    size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) i++;
    if (i >= s.size()) return false;
    if (s[i] != '"' && s[i] != '\'') return false;
    char quote = s[i];
    i++;
    while (i < s.size()) {
        if (s[i] == '\\') i += 2;
        else if (s[i] == quote) break;
        else i++;
    }
    if (i >= s.size()) return false;
    i++;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) i++;
    return i == s.size();
}

// Argument region of the first call to `name...(`, up to the matching close.
std::optional<std::string> call_args_text(const std::string& stmt, const std::regex& call_re) {
    std::smatch m;
    if (!std::regex_search(stmt, m, call_re)) return std::nullopt;
    size_t open = static_cast<size_t>(m.position(0) + m.length(0)) - 1;  // the '('
    int depth = 0;
    char quote = 0;
    for (size_t i = open; i < stmt.size(); i++) {
        char c = stmt[i];
        if (quote) {
            if (c == '\\') i++;
            else if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '(') {
            depth++;
        } else if (c == ')') {
            if (--depth == 0) return stmt.substr(open + 1, i - open - 1);
        }
    }
    return stmt.substr(open + 1);
}

std::string first_arg(const std::string& args) {
    int depth = 0;
    char quote = 0;
    for (size_t i = 0; i < args.size(); i++) {
        char c = args[i];
        if (quote) {
            if (c == '\\') i++;
            else if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '(' || c == '[' || c == '{') {
            depth++;
        } else if (c == ')' || c == ']' || c == '}') {
            depth--;
        } else if (c == ',' && depth == 0) {
            return args.substr(0, i);
        }
    }
    return args;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

bool name_component_matches(const std::string& name, const std::set<std::string>& words) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    size_t start = 0;
    while (start <= lower.size()) {
        size_t us = lower.find('_', start);
        std::string part = lower.substr(start, us == std::string::npos ? us : us - start);
        if (words.count(part) || (!part.empty() && part.back() == 's' &&
                                  words.count(part.substr(0, part.size() - 1))))
            return true;
        if (us == std::string::npos) break;
        start = us + 1;
    }
    return false;
}

bool mentions_passwordish(const std::string& text) {
    return contains_ci(text, "password") || contains_ci(text, "passwd") ||
           word_in(text, "pwd") || contains_ci(text, "secret");
}

}  // namespace

std::vector<PySite> extract_py_sites(std::string_view source) {
    const std::string whole(source);
    const std::vector<Statement> statements = split_statements(source);

    // Artifact-level context.
    const bool kdf_present = contains_ci(whole, "bcrypt") || contains_ci(whole, "scrypt") ||
                             contains_ci(whole, "argon2") || contains_ci(whole, "pbkdf2");
    const bool normalizes = whole.find("normpath") != std::string::npos ||
                            whole.find("realpath") != std::string::npos ||
                            whole.find("abspath") != std::string::npos ||
                            whole.find(".resolve(") != std::string::npos;
    const bool prefix_checked = whole.find(".startswith(") != std::string::npos ||
                                whole.find("commonpath") != std::string::npos;
    const bool traversal_suppressed = normalizes && prefix_checked;

    static const std::regex assign_re(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$)");
    static const std::regex execute_re(R"((\.|^|\s)execute(many)?\s*\()");
    static const std::regex os_system_re(R"(\bos\s*\.\s*system\s*\()");
    static const std::regex subprocess_re(
        R"(\bsubprocess\s*\.\s*(call|run|Popen|check_output|check_call)\s*\()");
    static const std::regex weak_random_re(
        R"(\brandom\s*\.\s*(random|randint|randrange|choice|choices|getrandbits|uniform|sample|shuffle|randbytes)\b)");
    static const std::regex hash_re(R"((hashlib\s*\.\s*)?\b(md5|sha1|sha256)\s*\()");
    static const std::regex join_re(R"(\bos\s*\.\s*path\s*\.\s*join\s*\()");
    static const std::regex extract_re(R"(\.\s*(extract|extractall)\s*\()");
    static const std::regex member_loop_re(
        R"(\bfor\s+([A-Za-z_][A-Za-z0-9_]*)\s+in\b.*(namelist|infolist|getmembers|\.members))");
    static const std::regex archive_open_re(
        R"((?:\bwith\s+)?(?:zipfile\s*\.\s*ZipFile|tarfile\s*\.\s*open|tarfile\s*\.\s*TarFile)\s*\(.*?\)\s*(?:as\s+([A-Za-z_][A-Za-z0-9_]*)|$))");
    static const std::regex archive_assign_re(
        R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?:zipfile\s*\.\s*ZipFile|tarfile\s*\.\s*open|tarfile\s*\.\s*TarFile)\s*\()");

    static const std::set<std::string> keyish = {"token", "key", "secret", "nonce", "iv",
                                                "session"};

    // Single-assignment forward-pass taint state.
    std::map<std::string, Statement> sql_tainted;     // var -> building statement
    std::map<std::string, Statement> interp_tainted;  // var -> building statement
    std::set<std::string> random_tainted;
    std::set<std::string> password_derived;
    std::set<std::string> member_vars;
    std::set<std::string> archive_vars;

    std::vector<PySite> sites;
    std::set<std::pair<int, PySiteKind>> seen;
    auto emit = [&](PySiteKind kind, CweId cwe, const char* detector, const Statement& at) {
        if (!seen.emplace(at.line, kind).second) return;
        PySite s;
        s.detector_id = detector;
        s.cwe = cwe;
        s.line = at.line;
        s.kind = kind;
        s.evidence = at.text;
        sites.push_back(std::move(s));
    };

    for (const Statement& stmt : statements) {
        std::smatch m;

        if (std::regex_search(stmt.text, m, member_loop_re)) member_vars.insert(m[1].str());
        if (std::regex_search(stmt.text, m, archive_open_re) && m[1].matched)
            archive_vars.insert(m[1].str());
        if (std::regex_search(stmt.text, m, archive_assign_re)) archive_vars.insert(m[1].str());

        // Assignment bookkeeping (skip ==, !=, <=, >=, += and friends).
        std::string target, rhs;
        if (std::regex_match(stmt.text, m, assign_re)) {
            size_t eq = stmt.text.find('=', stmt.text.find(m[1].str()));
            char before = eq > 0 ? stmt.text[eq - 1] : ' ';
            char after = eq + 1 < stmt.text.size() ? stmt.text[eq + 1] : ' ';
            if (after != '=' && std::strchr("+-*/%&|^<>!", before) == nullptr) {
                target = m[1].str();
                rhs = m[2].str();
            }
        }

        if (!target.empty()) {
            const bool interpolated = is_interpolated(rhs);
            if (interpolated) {
                interp_tainted[target] = stmt;
                if (has_sql_keyword(rhs)) sql_tainted[target] = stmt;
            }
            bool weak_rng = std::regex_search(rhs, weak_random_re);
            if (!weak_rng) {
                for (const auto& v : random_tainted)
                    if (word_in(rhs, v)) weak_rng = true;
            }
            if (rhs.find("secrets.") != std::string::npos ||
                rhs.find("SystemRandom") != std::string::npos ||
                rhs.find("os.urandom") != std::string::npos)
                weak_rng = false;
            if (weak_rng) {
                random_tainted.insert(target);
                if (name_component_matches(target, keyish))
                    emit(PySiteKind::WEAK_RANDOM, CweId(330), "py.weak_random", stmt);
            }
            bool pw = mentions_passwordish(rhs);
            if (!pw) {
                for (const auto& v : password_derived)
                    if (word_in(rhs, v)) pw = true;
            }
            if (pw) password_derived.insert(target);
        }

        // SQL reaching execute/executemany.
        if (auto args = call_args_text(stmt.text, execute_re)) {
            std::string arg0 = trim(first_arg(*args));
            if (!is_pure_literal(arg0)) {
                if (is_identifier(arg0)) {
                    if (auto it = sql_tainted.find(arg0); it != sql_tainted.end())
                        emit(PySiteKind::SQL_CONCAT, CweId(89), "py.sql_concat", it->second);
                } else if (is_interpolated(arg0) && has_sql_keyword(arg0)) {
                    emit(PySiteKind::SQL_CONCAT, CweId(89), "py.sql_concat", stmt);
                }
            }
        }

        // Shell composition.
        if (auto args = call_args_text(stmt.text, os_system_re)) {
            std::string arg0 = trim(first_arg(*args));
            if (!is_pure_literal(arg0)) {
                if (is_identifier(arg0)) {
                    if (auto it = interp_tainted.find(arg0); it != interp_tainted.end())
                        emit(PySiteKind::SHELL_CONCAT, CweId(78), "py.shell_concat", it->second);
                } else if (is_interpolated(arg0)) {
                    emit(PySiteKind::SHELL_CONCAT, CweId(78), "py.shell_concat", stmt);
                }
            }
        }
        if (std::regex_search(stmt.text, subprocess_re) &&
            stmt.text.find("shell=True") != std::string::npos) {
            if (auto args = call_args_text(stmt.text, subprocess_re)) {
                std::string arg0 = trim(first_arg(*args));
                if (!is_pure_literal(arg0)) {
                    if (is_identifier(arg0)) {
                        if (auto it = interp_tainted.find(arg0); it != interp_tainted.end())
                            emit(PySiteKind::SHELL_CONCAT, CweId(78), "py.shell_concat",
                                 it->second);
                    } else if (is_interpolated(arg0)) {
                        emit(PySiteKind::SHELL_CONCAT, CweId(78), "py.shell_concat", stmt);
                    }
                }
            }
        }

        // Path traversal: archive members / request input joined into paths,
        // or direct extraction calls, minus normalize-and-check artifacts.
        if (!traversal_suppressed) {
            bool flagged = false;
            if (auto args = call_args_text(stmt.text, join_re)) {
                static const std::set<std::string> memberish = {"member", "filename", "fname",
                                                                "arcname", "entry", "member_name"};
                std::string rest = *args;
                size_t start = 0;
                while (start <= rest.size() && !flagged) {
                    size_t comma = rest.find(',', start);
                    std::string piece =
                        trim(rest.substr(start, comma == std::string::npos ? comma : comma - start));
                    if (is_identifier(piece) &&
                        (member_vars.count(piece) || name_component_matches(piece, memberish)))
                        flagged = true;
                    if (piece.find("request.") != std::string::npos ||
                        piece.find(".args") != std::string::npos ||
                        piece.find(".params") != std::string::npos)
                        flagged = true;
                    if (comma == std::string::npos) break;
                    start = comma + 1;
                }
            }
            if (!flagged && std::regex_search(stmt.text, extract_re)) {
                bool archive_receiver = stmt.text.find("zip") != std::string::npos ||
                                        stmt.text.find("tar") != std::string::npos ||
                                        !member_vars.empty();
                for (const auto& v : archive_vars)
                    if (word_in(stmt.text, v)) archive_receiver = true;
                if (archive_receiver) flagged = true;
            }
            if (flagged)
                emit(PySiteKind::PATH_TRAVERSAL, CweId(22), "py.path_traversal", stmt);
        }

        // Fast hashing of password material.
        if (!kdf_present && std::regex_search(stmt.text, m, hash_re)) {
            if (auto args = call_args_text(stmt.text, hash_re)) {
                bool pw = mentions_passwordish(*args);
                if (!pw) {
                    for (const auto& v : password_derived)
                        if (word_in(*args, v)) pw = true;
                }
                // `hashlib.sha256(password.encode())` and hash-of-derived both count.
                if (pw)
                    emit(PySiteKind::FAST_PASSWORD_HASH, CweId(916), "py.fast_password_hash",
                         stmt);
            }
        }
    }

    std::stable_sort(sites.begin(), sites.end(), [](const PySite& a, const PySite& b) {
        if (a.line != b.line) return a.line < b.line;
        return a.detector_id < b.detector_id;
    });
    return sites;
}

void to_json(json& j, const PySite& s) {
    j = json{{"kind", to_string(s.kind)},
             {"detector_id", s.detector_id},
             {"cwe", s.cwe.value()},
             {"line", s.line},
             {"evidence", s.evidence}};
}

}  // namespace cobalt::pyfront
