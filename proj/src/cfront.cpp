#include "cobalt/cfront.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <map>
#include <set>

namespace cobalt::cfront {

// ---- tokenizer -------------------------------------------------------------

namespace {

const std::set<std::string>& c_keywords() {
    static const std::set<std::string> kw = {
        "auto",     "break",    "case",     "char",   "const",    "continue", "default",
        "do",       "double",   "else",     "enum",   "extern",   "float",    "for",
        "goto",     "if",       "inline",   "int",    "long",     "register", "restrict",
        "return",   "short",    "signed",   "sizeof", "static",   "struct",   "switch",
        "typedef",  "union",    "unsigned", "void",   "volatile", "while",    "_Bool",
        "_Alignas", "_Alignof", "_Atomic",  "_Noreturn"};
    return kw;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const char* three_char_puncts[] = {"<<=", ">>=", "..."};
const char* two_char_puncts[] = {"->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
                                 "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
                                 "^=", "##"};

bool is_integer_literal(const std::string& text) {
    size_t i = 0, n = text.size();
    while (n > i && (std::strchr("uUlL", text[n - 1]) != nullptr)) n--;
    if (n == i) return false;
    if (text[i] == '0' && n > i + 1 && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
        for (size_t j = i + 2; j < n; j++)
            if (!std::isxdigit(static_cast<unsigned char>(text[j]))) return false;
        return n > i + 2;
    }
    for (size_t j = i; j < n; j++)
        if (!std::isdigit(static_cast<unsigned char>(text[j]))) return false;
    return true;
}

}  // namespace

std::vector<Token> tokenize_c(std::string_view source) {
    std::vector<Token> tokens;
    size_t pos = 0;
    int line = 1, col = 1;
    bool line_has_content = false;  // anything but whitespace seen on this line

    auto advance = [&](size_t n) {
        for (size_t i = 0; i < n; i++) {
            if (source[pos] == '\n') {
                line++;
                col = 1;
                line_has_content = false;
            } else {
                col++;
            }
            pos++;
        }
    };

    auto push = [&](TokenKind kind, size_t begin, int tline, int tcol) {
        tokens.push_back({kind, std::string(source.substr(begin, pos - begin)), tline, tcol,
                          begin, pos});
    };

    while (pos < source.size()) {
        char c = source[pos];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
            advance(1);
            continue;
        }
        const size_t begin = pos;
        const int tline = line, tcol = col;

        // Preprocessor directive: first non-whitespace on the line is '#'.
        if (c == '#' && !line_has_content) {
            while (pos < source.size()) {
                if (source[pos] == '\n') {
                    if (pos > begin && source[pos - 1] == '\\') {
                        advance(1);
                        continue;
                    }
                    break;
                }
                advance(1);
            }
            push(TokenKind::OTHER, begin, tline, tcol);
            line_has_content = true;
            continue;
        }
        line_has_content = true;

        if (c == '/' && pos + 1 < source.size() && source[pos + 1] == '/') {
            while (pos < source.size() && source[pos] != '\n') advance(1);
            push(TokenKind::OTHER, begin, tline, tcol);
            continue;
        }
        if (c == '/' && pos + 1 < source.size() && source[pos + 1] == '*') {
            advance(2);
            while (pos < source.size() &&
                   !(source[pos] == '*' && pos + 1 < source.size() && source[pos + 1] == '/'))
                advance(1);
            if (pos < source.size()) advance(2);
            push(TokenKind::OTHER, begin, tline, tcol);
            continue;
        }
        if (c == '"' || c == '\'') {
            const char quote = c;
            advance(1);
            while (pos < source.size() && source[pos] != quote) {
                if (source[pos] == '\\' && pos + 1 < source.size())
                    advance(2);
                else
                    advance(1);
            }
            if (pos < source.size()) advance(1);
            push(quote == '"' ? TokenKind::STRING : TokenKind::CHAR, begin, tline, tcol);
            continue;
        }
        if (ident_start(c)) {
            while (pos < source.size() && ident_char(source[pos])) advance(1);
            std::string text(source.substr(begin, pos - begin));
            push(c_keywords().count(text) ? TokenKind::KEYWORD : TokenKind::IDENT, begin, tline,
                 tcol);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            // Consume the whole numeric pp-token; floats degrade to OTHER.
            while (pos < source.size()) {
                char d = source[pos];
                if (ident_char(d) || d == '.') {
                    advance(1);
                } else if ((d == '+' || d == '-') && pos > begin &&
                           std::strchr("eEpP", source[pos - 1])) {
                    advance(1);
                } else {
                    break;
                }
            }
            std::string text(source.substr(begin, pos - begin));
            push(is_integer_literal(text) ? TokenKind::INT_LITERAL : TokenKind::OTHER, begin,
                 tline, tcol);
            continue;
        }
        bool matched = false;
        for (const char* p : three_char_puncts) {
            if (source.substr(pos, 3) == p) {
                advance(3);
                push(TokenKind::PUNCT, begin, tline, tcol);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        for (const char* p : two_char_puncts) {
            if (source.substr(pos, 2) == p) {
                advance(2);
                push(TokenKind::PUNCT, begin, tline, tcol);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::strchr("{}()[];,.*+-/%<>=!&|^~?:", c)) {
            advance(1);
            push(TokenKind::PUNCT, begin, tline, tcol);
            continue;
        }
        advance(1);
        push(TokenKind::OTHER, begin, tline, tcol);
    }
    return tokens;
}

// ---- SizeExpr --------------------------------------------------------------

SizeExpr SizeExpr::var(std::string name) {
    SizeExpr e;
    e.kind = Kind::Var;
    e.name = std::move(name);
    return e;
}

SizeExpr SizeExpr::constant(std::uint64_t value) {
    SizeExpr e;
    e.kind = Kind::Const;
    e.value = value;
    return e;
}

SizeExpr SizeExpr::size_of(std::string type_name, std::uint64_t bytes) {
    SizeExpr e;
    e.kind = Kind::SizeOf;
    e.name = std::move(type_name);
    e.value = bytes;
    return e;
}

SizeExpr SizeExpr::mul(SizeExpr lhs, SizeExpr rhs) {
    SizeExpr e;
    e.kind = Kind::Mul;
    e.kids.push_back(std::move(lhs));
    e.kids.push_back(std::move(rhs));
    return e;
}

SizeExpr SizeExpr::add(SizeExpr lhs, SizeExpr rhs) {
    SizeExpr e;
    e.kind = Kind::Add;
    e.kids.push_back(std::move(lhs));
    e.kids.push_back(std::move(rhs));
    return e;
}

SizeExpr SizeExpr::cast(int width, bool is_unsigned, SizeExpr inner) {
    SizeExpr e;
    e.kind = Kind::Cast;
    e.cast_width = width;
    e.cast_is_unsigned = is_unsigned;
    e.kids.push_back(std::move(inner));
    return e;
}

bool SizeExpr::contains_var() const {
    if (kind == Kind::Var) return true;
    for (const auto& k : kids)
        if (k.contains_var()) return true;
    return false;
}

bool SizeExpr::contains_mul_or_add() const {
    if (kind == Kind::Mul || kind == Kind::Add) return true;
    for (const auto& k : kids)
        if (k.contains_mul_or_add()) return true;
    return false;
}

smt::u128 SizeExpr::eval_with_vars(std::uint64_t var_value) const {
    switch (kind) {
        case Kind::Var: return var_value;
        case Kind::Const:
        case Kind::SizeOf: return value;
        case Kind::Mul: return kids[0].eval_with_vars(var_value) * kids[1].eval_with_vars(var_value);
        case Kind::Add: return kids[0].eval_with_vars(var_value) + kids[1].eval_with_vars(var_value);
        case Kind::Cast:
            return kids[0].eval_with_vars(var_value) & smt::bv_mask(cast_width);
    }
    throw DomainError("invalid SizeExpr kind");
}

std::string to_string(SiteKind k) {
    switch (k) {
        case SiteKind::ALLOC_ARITH: return "ALLOC_ARITH";
        case SiteKind::CAST_SIGN: return "CAST_SIGN";
        case SiteKind::INDEX_UNCHECKED: return "INDEX_UNCHECKED";
        case SiteKind::UNSAFE_STRCOPY: return "UNSAFE_STRCOPY";
    }
    throw DomainError("invalid SiteKind value");
}

// ---- extraction ------------------------------------------------------------

namespace {

struct TypeInfo {
    bool is_integer = false;
    bool is_signed = false;
    int width = 0;  // bits
};

// Fixed-width typedefs plus size-ish aliases; size_t tracks the analysis width.
std::optional<TypeInfo> typedef_info(const std::string& name, int width_bits) {
    static const std::map<std::string, std::pair<int, bool>> fixed = {
        {"int8_t", {8, true}},    {"int16_t", {16, true}},  {"int32_t", {32, true}},
        {"int64_t", {64, true}},  {"uint8_t", {8, false}},  {"uint16_t", {16, false}},
        {"uint32_t", {32, false}}, {"uint64_t", {64, false}}};
    if (auto it = fixed.find(name); it != fixed.end())
        return TypeInfo{true, it->second.second, it->second.first};
    if (name == "size_t" || name == "uintptr_t") return TypeInfo{true, false, width_bits};
    if (name == "ssize_t" || name == "ptrdiff_t" || name == "intptr_t")
        return TypeInfo{true, true, width_bits};
    return std::nullopt;
}

bool is_type_start(const std::vector<Token>& toks, size_t i, int width_bits) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::KEYWORD) {
        static const std::set<std::string> type_kw = {"char", "short", "int",      "long",
                                                      "signed", "unsigned", "float",  "double",
                                                      "void", "struct", "union",   "enum",
                                                      "const", "volatile", "_Bool"};
        return type_kw.count(t.text) > 0;
    }
    return t.kind == TokenKind::IDENT && typedef_info(t.text, width_bits).has_value();
}

// Parses a run of type tokens starting at i; returns the resolved TypeInfo and
// leaves `i` one past the run. Returns nullopt for non-type starts.
std::optional<TypeInfo> parse_type_run(const std::vector<Token>& toks, size_t& i,
                                       int width_bits) {
    if (i >= toks.size() || !is_type_start(toks, i, width_bits)) return std::nullopt;
    bool saw_unsigned = false, saw_signed = false, saw_char = false, saw_short = false;
    bool saw_int = false, saw_other = false, saw_typedef = false;
    int longs = 0;
    TypeInfo typedef_ti;
    while (i < toks.size()) {
        const Token& t = toks[i];
        if (t.kind == TokenKind::KEYWORD) {
            const std::string& w = t.text;
            if (w == "const" || w == "volatile") {
                i++;
                continue;
            }
            if (w == "unsigned") saw_unsigned = true;
            else if (w == "signed") saw_signed = true;
            else if (w == "char") saw_char = true;
            else if (w == "short") saw_short = true;
            else if (w == "int") saw_int = true;
            else if (w == "long") longs++;
            else if (w == "struct" || w == "union" || w == "enum") {
                saw_other = true;
                i++;                                            // keyword
                if (i < toks.size() && toks[i].kind == TokenKind::IDENT) i++;  // tag
                continue;
            } else if (w == "float" || w == "double" || w == "void" || w == "_Bool") {
                saw_other = true;
            } else {
                break;  // not part of a type
            }
            i++;
            continue;
        }
        if (t.kind == TokenKind::IDENT && !saw_char && !saw_short && !saw_int && !longs &&
            !saw_unsigned && !saw_signed && !saw_other && !saw_typedef) {
            if (auto ti = typedef_info(t.text, width_bits)) {
                typedef_ti = *ti;
                saw_typedef = true;
                i++;
                continue;
            }
        }
        break;
    }
    if (saw_typedef) return typedef_ti;
    if (saw_other) return TypeInfo{false, false, 0};
    TypeInfo ti;
    ti.is_integer = true;
    ti.is_signed = !saw_unsigned;
    if (saw_char) ti.width = 8;
    else if (saw_short) ti.width = 16;
    else if (longs > 0) ti.width = 64;
    else ti.width = 32;  // bare int / signed / unsigned
    return ti;
}

struct VarInfo {
    TypeInfo type;
    bool is_pointer = false;
    bool is_array = false;
};

struct FunctionScope {
    size_t param_begin = 0, param_end = 0;  // token range inside the signature parens
    size_t body_begin = 0, body_end = 0;    // tokens inside the braces
    std::map<std::string, VarInfo> vars;
};

size_t matching_close(const std::vector<Token>& toks, size_t open, const char* open_p,
                      const char* close_p) {
    int depth = 0;
    for (size_t i = open; i < toks.size(); i++) {
        if (toks[i].kind != TokenKind::PUNCT) continue;
        if (toks[i].text == open_p) depth++;
        else if (toks[i].text == close_p && --depth == 0) return i;
    }
    return toks.size();
}

bool is_punct(const Token& t, const char* p) {
    return t.kind == TokenKind::PUNCT && t.text == p;
}

// Records declarations found in [begin, end) into vars. Walks linearly; a
// type run followed by declarators is a declaration, anything else is
// skipped. In a parameter list a comma starts a fresh type; in a body it
// continues the declarator list of the current type.
void scan_declarations(const std::vector<Token>& toks, size_t begin, size_t end,
                       int width_bits, bool param_list, std::map<std::string, VarInfo>& vars) {
    size_t i = begin;
    while (i < end) {
        size_t probe = i;
        auto ti = parse_type_run(toks, probe, width_bits);
        if (!ti) {
            i++;
            continue;
        }
        size_t j = probe;
        for (;;) {
            bool pointer = false;
            while (j < end && is_punct(toks[j], "*")) {
                pointer = true;
                j++;
            }
            if (j >= end || toks[j].kind != TokenKind::IDENT) break;
            const std::string& name = toks[j].text;
            size_t after = j + 1;
            if (after < end && is_punct(toks[after], "(")) break;  // function name, not a var
            bool array = after < end && is_punct(toks[after], "[");
            if (array) after = matching_close(toks, after, "[", "]") + 1;
            vars[name] = VarInfo{*ti, pointer, array};
            // Skip any initializer: to the next top-level ',' / ';' / ')'.
            int depth = 0;
            while (after < end) {
                const Token& t = toks[after];
                if (is_punct(t, "(") || is_punct(t, "[") || is_punct(t, "{")) depth++;
                else if (is_punct(t, ")") || is_punct(t, "]") || is_punct(t, "}")) {
                    if (depth == 0) break;
                    depth--;
                } else if (depth == 0 && (is_punct(t, ",") || is_punct(t, ";"))) {
                    break;
                }
                after++;
            }
            j = after;
            if (!param_list && j < end && is_punct(toks[j], ",")) {
                j++;  // same type, next declarator
                continue;
            }
            break;
        }
        i = std::max(j, probe);
        if (i <= probe) i = probe;
        i++;
    }
}

std::vector<FunctionScope> find_functions(const std::vector<Token>& toks, int width_bits) {
    std::vector<FunctionScope> out;
    int depth = 0;
    for (size_t i = 0; i < toks.size(); i++) {
        if (toks[i].kind != TokenKind::PUNCT) continue;
        if (toks[i].text == "{") {
            if (depth == 0) {
                FunctionScope fs;
                size_t close = matching_close(toks, i, "{", "}");
                fs.body_begin = i + 1;
                fs.body_end = close;
                // Walk back over the signature: ')' ... matching '('.
                if (i > 0 && is_punct(toks[i - 1], ")")) {
                    int pd = 0;
                    for (size_t j = i - 1;; j--) {
                        if (is_punct(toks[j], ")")) pd++;
                        else if (is_punct(toks[j], "(") && --pd == 0) {
                            fs.param_begin = j + 1;
                            fs.param_end = i - 1;
                            break;
                        }
                        if (j == 0) break;
                    }
                }
                scan_declarations(toks, fs.param_begin, fs.param_end, width_bits, true, fs.vars);
                scan_declarations(toks, fs.body_begin, fs.body_end, width_bits, false, fs.vars);
                out.push_back(std::move(fs));
                i = close;
                continue;
            }
            depth++;
        } else if (toks[i].text == "}") {
            if (depth > 0) depth--;
        }
    }
    if (out.empty() && !toks.empty()) {
        // Headerless fragment with no function definition: treat the whole
        // token stream as one body so declaration and guard scanning still
        // apply.
        FunctionScope fs;
        fs.body_begin = 0;
        fs.body_end = toks.size();
        scan_declarations(toks, fs.body_begin, fs.body_end, width_bits, false, fs.vars);
        out.push_back(std::move(fs));
    }
    return out;
}

std::uint64_t int_literal_value(const std::string& text) {
    std::string body = text;
    while (!body.empty() && std::strchr("uUlL", body.back())) body.pop_back();
    return std::stoull(body, nullptr, 0);
}

struct ExprParse {
    std::optional<SizeExpr> expr;
    bool low_confidence = false;
};

struct SizeExprParser {
    const std::vector<Token>& toks;
    size_t pos, end;
    int width_bits;
    bool low_confidence = false;
    bool failed = false;

    const Token* peek() const { return pos < end ? &toks[pos] : nullptr; }

    bool eat_punct(const char* p) {
        if (pos < end && is_punct(toks[pos], p)) {
            pos++;
            return true;
        }
        return false;
    }

    std::optional<SizeExpr> parse_sizeof() {
        // 'sizeof' already consumed; only the parenthesized type form is in
        // the fragment.
        if (!eat_punct("(")) return std::nullopt;
        size_t run_begin = pos;
        bool pointer = false;
        std::string type_text;
        while (pos < end && !is_punct(toks[pos], ")")) {
            if (is_punct(toks[pos], "*")) pointer = true;
            if (!type_text.empty()) type_text += " ";
            type_text += toks[pos].text;
            pos++;
        }
        if (!eat_punct(")") || type_text.empty()) return std::nullopt;
        if (pointer) return SizeExpr::constant(8);
        size_t probe = run_begin;
        auto ti = parse_type_run(toks, probe, width_bits);
        if (ti && ti->is_integer && probe == pos - 1) return SizeExpr::constant(ti->width / 8);
        if (type_text == "float") return SizeExpr::constant(4);
        if (type_text == "double") return SizeExpr::constant(8);
        // Unknown aggregate or typedef: keep the site but cap it at pattern
        // tier via the low-confidence flag; 16 is a stand-in byte count.
        low_confidence = true;
        return SizeExpr::size_of(type_text, 16);
    }

    std::optional<SizeExpr> parse_unary() {
        const Token* t = peek();
        if (!t) return std::nullopt;
        if (is_punct(*t, "(")) {
            // Cast or parenthesized expression.
            size_t probe = pos + 1;
            auto ti = parse_type_run(toks, probe, width_bits);
            if (ti && probe < end && is_punct(toks[probe], ")")) {
                if (!ti->is_integer) return std::nullopt;
                pos = probe + 1;
                auto inner = parse_unary();
                if (!inner) return std::nullopt;
                return SizeExpr::cast(ti->width, !ti->is_signed, std::move(*inner));
            }
            pos++;
            auto inner = parse_add();
            if (!inner || !eat_punct(")")) return std::nullopt;
            return inner;
        }
        if (t->kind == TokenKind::KEYWORD && t->text == "sizeof") {
            pos++;
            return parse_sizeof();
        }
        if (t->kind == TokenKind::IDENT) {
            pos++;
            return SizeExpr::var(t->text);
        }
        if (t->kind == TokenKind::INT_LITERAL) {
            pos++;
            try {
                return SizeExpr::constant(int_literal_value(t->text));
            } catch (const std::exception&) {
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

    std::optional<SizeExpr> parse_mul() {
        auto lhs = parse_unary();
        if (!lhs) return std::nullopt;
        while (pos < end && is_punct(toks[pos], "*")) {
            pos++;
            auto rhs = parse_unary();
            if (!rhs) return std::nullopt;
            lhs = SizeExpr::mul(std::move(*lhs), std::move(*rhs));
        }
        return lhs;
    }

    std::optional<SizeExpr> parse_add() {
        auto lhs = parse_mul();
        if (!lhs) return std::nullopt;
        while (pos < end && is_punct(toks[pos], "+")) {
            pos++;
            auto rhs = parse_mul();
            if (!rhs) return std::nullopt;
            lhs = SizeExpr::add(std::move(*lhs), std::move(*rhs));
        }
        return lhs;
    }
};

ExprParse parse_size_expr(const std::vector<Token>& toks, size_t begin, size_t end,
                          int width_bits) {
    SizeExprParser p{toks, begin, end, width_bits};
    auto expr = p.parse_add();
    if (!expr || p.pos != end) return {};
    return {std::move(expr), p.low_confidence};
}

// First Var name in left-to-right order.
std::optional<std::string> first_var(const SizeExpr& e) {
    if (e.kind == SizeExpr::Kind::Var) return e.name;
    for (const auto& k : e.kids)
        if (auto v = first_var(k)) return v;
    return std::nullopt;
}

// Product of the constant factors when the expression is Mul-rooted; used to
// judge whether a guard's bound is tight enough for this site.
std::uint64_t const_factor(const SizeExpr& e) {
    smt::u128 k = e.eval_with_vars(1);
    if (k == 0 || k > ~0ull) return 1;
    return static_cast<std::uint64_t>(k);
}

// Splits the argument tokens of the call whose '(' is at lparen; returns
// top-level comma-separated ranges and the index of the closing paren.
std::vector<std::pair<size_t, size_t>> call_args(const std::vector<Token>& toks, size_t lparen,
                                                 size_t& rparen) {
    rparen = matching_close(toks, lparen, "(", ")");
    std::vector<std::pair<size_t, size_t>> args;
    size_t start = lparen + 1;
    int depth = 0;
    for (size_t i = lparen + 1; i < rparen; i++) {
        if (is_punct(toks[i], "(") || is_punct(toks[i], "[")) depth++;
        else if (is_punct(toks[i], ")") || is_punct(toks[i], "]")) depth--;
        else if (depth == 0 && is_punct(toks[i], ",")) {
            args.emplace_back(start, i);
            start = i + 1;
        }
    }
    if (rparen > start) args.emplace_back(start, rparen);
    else if (rparen == start && rparen > lparen + 1) args.emplace_back(start, rparen);
    return args;
}

// The enclosing statement, clipped to the site's own line.
std::string statement_evidence(std::string_view source, const Token& site) {
    size_t line_start = source.rfind('\n', site.begin == 0 ? 0 : site.begin - 1);
    line_start = line_start == std::string_view::npos ? 0 : line_start + 1;
    size_t line_end = source.find('\n', site.begin);
    if (line_end == std::string_view::npos) line_end = source.size();

    size_t start = line_start;
    for (size_t i = site.begin; i > line_start; i--) {
        char c = source[i - 1];
        if (c == ';' || c == '{' || c == '}') {
            start = i;
            break;
        }
    }
    size_t stop = line_end;
    for (size_t i = site.begin; i < line_end; i++) {
        if (source[i] == ';') {
            stop = i + 1;
            break;
        }
    }
    auto text = source.substr(start, stop - start);
    size_t a = text.find_first_not_of(" \t");
    size_t b = text.find_last_not_of(" \t\r");
    if (a == std::string_view::npos) return "";
    return std::string(text.substr(a, b - a + 1));
}

// if (V > SIZE_MAX / K) / if (V > C) style pre-checks with an early exit in
// the taken branch, scanned between the function's opening brace and the
// allocation site.
bool guard_before(const std::vector<Token>& toks, const FunctionScope& fs, size_t site,
                  const std::string& var, std::uint64_t k_site, int width_bits) {
    const std::uint64_t width_max =
        width_bits >= 64 ? ~0ull : ((1ull << width_bits) - 1);
    const std::uint64_t safe_bound = width_max / std::max<std::uint64_t>(1, k_site);

    for (size_t i = fs.body_begin; i + 4 < site; i++) {
        if (!(toks[i].kind == TokenKind::KEYWORD && toks[i].text == "if")) continue;
        if (!is_punct(toks[i + 1], "(")) continue;
        size_t rparen = matching_close(toks, i + 1, "(", ")");
        if (rparen >= site) continue;
        // Condition shape: V > RHS or V >= RHS.
        size_t c = i + 2;
        if (c >= rparen || toks[c].kind != TokenKind::IDENT || toks[c].text != var) continue;
        c++;
        if (c >= rparen || toks[c].kind != TokenKind::PUNCT ||
            (toks[c].text != ">" && toks[c].text != ">="))
            continue;
        c++;
        bool bound_ok = false;
        if (c < rparen && toks[c].kind == TokenKind::IDENT &&
            (toks[c].text == "SIZE_MAX" || toks[c].text == "UINT_MAX" ||
             toks[c].text == "ULONG_MAX")) {
            if (c + 1 < rparen && is_punct(toks[c + 1], "/")) {
                // Divisor must cover the site's element size.
                size_t dpos = c + 2;
                std::uint64_t divisor = 0;
                if (dpos < rparen && toks[dpos].kind == TokenKind::INT_LITERAL &&
                    dpos + 1 == rparen) {
                    try {
                        divisor = int_literal_value(toks[dpos].text);
                    } catch (const std::exception&) {
                        divisor = 0;
                    }
                } else if (dpos < rparen && toks[dpos].kind == TokenKind::KEYWORD &&
                           toks[dpos].text == "sizeof") {
                    SizeExprParser p{toks, dpos + 1, rparen, width_bits};
                    if (auto sz = p.parse_sizeof(); sz && p.pos == rparen)
                        divisor = static_cast<std::uint64_t>(sz->eval_with_vars(1));
                }
                bound_ok = divisor >= k_site && divisor > 0;
            }
        } else if (c < rparen && toks[c].kind == TokenKind::INT_LITERAL && c + 1 == rparen) {
            try {
                bound_ok = int_literal_value(toks[c].text) <= safe_bound;
            } catch (const std::exception&) {
                bound_ok = false;
            }
        }
        if (!bound_ok) continue;
        // The taken branch must bail out: return/goto/exit/abort.
        size_t body_start = rparen + 1;
        size_t body_end;
        if (body_start < site && is_punct(toks[body_start], "{")) {
            body_end = matching_close(toks, body_start, "{", "}");
        } else {
            body_end = body_start;
            while (body_end < site && !is_punct(toks[body_end], ";")) body_end++;
        }
        for (size_t b = body_start; b <= body_end && b < site; b++) {
            if ((toks[b].kind == TokenKind::KEYWORD &&
                 (toks[b].text == "return" || toks[b].text == "goto")) ||
                (toks[b].kind == TokenKind::IDENT &&
                 (toks[b].text == "exit" || toks[b].text == "_exit" || toks[b].text == "abort")))
                return true;
        }
    }
    return false;
}

bool is_signed_int_var(const FunctionScope& fs, const std::string& name) {
    auto it = fs.vars.find(name);
    return it != fs.vars.end() && it->second.type.is_integer && it->second.type.is_signed &&
           !it->second.is_pointer && !it->second.is_array;
}

bool is_unsigned_int_var(const FunctionScope& fs, const std::string& name) {
    auto it = fs.vars.find(name);
    return it != fs.vars.end() && it->second.type.is_integer && !it->second.type.is_signed &&
           !it->second.is_pointer && !it->second.is_array;
}

int var_width(const FunctionScope& fs, const std::string& name) {
    auto it = fs.vars.find(name);
    return it == fs.vars.end() ? 0 : it->second.type.width;
}

struct SiteBuilder {
    std::string_view source;
    std::vector<CandidateSite> sites;
    std::set<std::tuple<int, int, SiteKind>> seen;

    void push(CandidateSite site, const Token& at) {
        site.line = at.line;
        site.col = at.col;
        site.evidence = statement_evidence(source, at);
        if (seen.emplace(site.line, site.col, site.kind).second)
            sites.push_back(std::move(site));
    }
};

// Size-taking library calls: argument position -> treated as a size_t sink.
const std::map<std::string, std::vector<size_t>>& size_arg_positions() {
    static const std::map<std::string, std::vector<size_t>> table = {
        {"malloc", {0}},  {"alloca", {0}},  {"calloc", {0, 1}}, {"realloc", {1}},
        {"memset", {2}},  {"memcpy", {2}},  {"memmove", {2}},   {"strncpy", {2}},
        {"snprintf", {1}}};
    return table;
}

}  // namespace

std::vector<CandidateSite> extract_c_sites(const std::vector<Token>& tokens,
                                           std::string_view source, int width_bits) {
    SiteBuilder out{source};
    const std::set<std::string> alloc_fns = {"malloc", "calloc", "realloc", "alloca"};
    const std::set<std::string> strcopy_fns = {"strcat", "strcpy", "sprintf", "gets"};

    for (const FunctionScope& fs : find_functions(tokens, width_bits)) {
        for (size_t i = fs.body_begin; i < fs.body_end; i++) {
            const Token& t = tokens[i];

            // ---- call-shaped detectors -------------------------------------
            if (t.kind == TokenKind::IDENT && i + 1 < fs.body_end &&
                is_punct(tokens[i + 1], "(")) {
                const std::string& fn = t.text;

                if (strcopy_fns.count(fn)) {
                    CandidateSite site;
                    site.detector_id = "c.unsafe_strcopy";
                    site.cwe = CweId(131);
                    site.kind = SiteKind::UNSAFE_STRCOPY;
                    out.push(std::move(site), t);
                }

                size_t rparen = 0;
                auto args = call_args(tokens, i + 1, rparen);

                if (alloc_fns.count(fn)) {
                    std::optional<std::pair<size_t, size_t>> size_range;
                    ExprParse parsed;
                    if (fn == "calloc" && args.size() == 2) {
                        auto a = parse_size_expr(tokens, args[0].first, args[0].second, width_bits);
                        auto b = parse_size_expr(tokens, args[1].first, args[1].second, width_bits);
                        if (a.expr && b.expr) {
                            parsed.expr = SizeExpr::mul(std::move(*a.expr), std::move(*b.expr));
                            parsed.low_confidence = a.low_confidence || b.low_confidence;
                        }
                    } else if ((fn == "malloc" || fn == "alloca") && args.size() == 1) {
                        size_range = args[0];
                    } else if (fn == "realloc" && args.size() == 2) {
                        size_range = args[1];
                    }
                    if (size_range)
                        parsed = parse_size_expr(tokens, size_range->first, size_range->second,
                                                 width_bits);
                    if (parsed.expr && parsed.expr->contains_var() &&
                        parsed.expr->contains_mul_or_add()) {
                        CandidateSite site;
                        site.detector_id = "c.alloc_arith";
                        site.cwe = CweId(190);
                        site.kind = SiteKind::ALLOC_ARITH;
                        site.low_confidence = parsed.low_confidence;
                        if (auto var = first_var(*parsed.expr))
                            site.guard_found = guard_before(tokens, fs, i, *var,
                                                            const_factor(*parsed.expr),
                                                            width_bits);
                        site.expr = std::move(parsed.expr);
                        out.push(std::move(site), t);
                    }
                }

                // Signed identifier passed straight into a size parameter.
                if (auto it = size_arg_positions().find(fn); it != size_arg_positions().end()) {
                    for (size_t argpos : it->second) {
                        if (argpos >= args.size()) continue;
                        auto [ab, ae] = args[argpos];
                        if (ae - ab != 1 || tokens[ab].kind != TokenKind::IDENT) continue;
                        if (!is_signed_int_var(fs, tokens[ab].text)) continue;
                        CandidateSite site;
                        site.detector_id = "c.cast_sign";
                        site.cwe = CweId(195);
                        site.kind = SiteKind::CAST_SIGN;
                        site.signed_width = var_width(fs, tokens[ab].text);
                        site.expr =
                            SizeExpr::cast(width_bits, true, SizeExpr::var(tokens[ab].text));
                        out.push(std::move(site), tokens[ab]);
                    }
                }
            }

            // ---- unsigned = signed assignment ------------------------------
            if (t.kind == TokenKind::IDENT && i + 2 < fs.body_end && is_punct(tokens[i + 1], "=") &&
                tokens[i + 2].kind == TokenKind::IDENT && i + 3 <= fs.body_end &&
                (i + 3 == fs.body_end || is_punct(tokens[i + 3], ";") ||
                 is_punct(tokens[i + 3], ",") || is_punct(tokens[i + 3], ")"))) {
                if (is_unsigned_int_var(fs, t.text) && is_signed_int_var(fs, tokens[i + 2].text)) {
                    CandidateSite site;
                    site.detector_id = "c.cast_sign";
                    site.cwe = CweId(195);
                    site.kind = SiteKind::CAST_SIGN;
                    site.signed_width = var_width(fs, tokens[i + 2].text);
                    site.expr = SizeExpr::cast(var_width(fs, t.text), true,
                                               SizeExpr::var(tokens[i + 2].text));
                    out.push(std::move(site), t);
                }
            }

            // ---- explicit (unsigned)signed cast ----------------------------
            if (is_punct(t, "(")) {
                size_t probe = i + 1;
                auto ti = parse_type_run(tokens, probe, width_bits);
                if (ti && ti->is_integer && !ti->is_signed && probe < fs.body_end &&
                    is_punct(tokens[probe], ")") && probe + 1 < fs.body_end &&
                    tokens[probe + 1].kind == TokenKind::IDENT &&
                    is_signed_int_var(fs, tokens[probe + 1].text)) {
                    CandidateSite site;
                    site.detector_id = "c.cast_sign";
                    site.cwe = CweId(195);
                    site.kind = SiteKind::CAST_SIGN;
                    site.signed_width = var_width(fs, tokens[probe + 1].text);
                    site.expr = SizeExpr::cast(ti->width, true,
                                               SizeExpr::var(tokens[probe + 1].text));
                    out.push(std::move(site), t);
                }
            }

            // ---- unchecked indexing ----------------------------------------
            if (t.kind == TokenKind::IDENT && i + 3 < fs.body_end && is_punct(tokens[i + 1], "[") &&
                tokens[i + 2].kind == TokenKind::IDENT && is_punct(tokens[i + 3], "]")) {
                // Skip declarations: `char buf[n]` has a type run right before.
                bool declaration = false;
                if (i > 0) {
                    size_t back = i;
                    while (back > fs.param_begin && is_punct(tokens[back - 1], "*")) back--;
                    if (back > 0 && is_type_start(tokens, back - 1, width_bits))
                        declaration = true;
                }
                const std::string& idx = tokens[i + 2].text;
                bool checked = false;
                for (size_t j = fs.body_begin; j + 2 < i && !checked; j++) {
                    if (tokens[j].kind == TokenKind::IDENT && tokens[j].text == idx &&
                        tokens[j + 1].kind == TokenKind::PUNCT &&
                        (tokens[j + 1].text == "<" || tokens[j + 1].text == "<=") &&
                        tokens[j + 2].kind == TokenKind::IDENT)
                        checked = true;
                    if (tokens[j].kind == TokenKind::IDENT &&
                        tokens[j + 1].kind == TokenKind::PUNCT &&
                        (tokens[j + 1].text == ">" || tokens[j + 1].text == ">=") &&
                        tokens[j + 2].kind == TokenKind::IDENT && tokens[j + 2].text == idx)
                        checked = true;
                }
                if (!declaration && !checked) {
                    CandidateSite site;
                    site.detector_id = "c.index_unchecked";
                    site.cwe = CweId(131);
                    site.kind = SiteKind::INDEX_UNCHECKED;
                    out.push(std::move(site), t);
                }
            }
        }
    }

    std::stable_sort(out.sites.begin(), out.sites.end(),
                     [](const CandidateSite& a, const CandidateSite& b) {
                         if (a.line != b.line) return a.line < b.line;
                         if (a.col != b.col) return a.col < b.col;
                         return a.detector_id < b.detector_id;
                     });
    return out.sites;
}

// ---- JSON ------------------------------------------------------------------

void to_json(json& j, const SizeExpr& e) {
    switch (e.kind) {
        case SizeExpr::Kind::Var:
            j = json{{"kind", "var"}, {"name", e.name}};
            return;
        case SizeExpr::Kind::Const:
            j = json{{"kind", "const"}, {"value", e.value}};
            return;
        case SizeExpr::Kind::SizeOf:
            j = json{{"kind", "sizeof"}, {"type_name", e.name}, {"bytes", e.value}};
            return;
        case SizeExpr::Kind::Mul:
        case SizeExpr::Kind::Add: {
            json lhs, rhs;
            to_json(lhs, e.kids[0]);
            to_json(rhs, e.kids[1]);
            j = json{{"kind", e.kind == SizeExpr::Kind::Mul ? "mul" : "add"},
                     {"lhs", lhs},
                     {"rhs", rhs}};
            return;
        }
        case SizeExpr::Kind::Cast: {
            json inner;
            to_json(inner, e.kids[0]);
            j = json{{"kind", "cast"},
                     {"width", e.cast_width},
                     {"is_unsigned", e.cast_is_unsigned},
                     {"inner", inner}};
            return;
        }
    }
    throw DomainError("invalid SizeExpr kind");
}

void from_json(const json& j, SizeExpr& e) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "var") {
        e = SizeExpr::var(j.at("name").get<std::string>());
    } else if (kind == "const") {
        e = SizeExpr::constant(j.at("value").get<std::uint64_t>());
    } else if (kind == "sizeof") {
        e = SizeExpr::size_of(j.at("type_name").get<std::string>(),
                              j.at("bytes").get<std::uint64_t>());
    } else if (kind == "mul" || kind == "add") {
        SizeExpr lhs = j.at("lhs").get<SizeExpr>();
        SizeExpr rhs = j.at("rhs").get<SizeExpr>();
        e = kind == "mul" ? SizeExpr::mul(std::move(lhs), std::move(rhs))
                          : SizeExpr::add(std::move(lhs), std::move(rhs));
    } else if (kind == "cast") {
        e = SizeExpr::cast(j.at("width").get<int>(), j.at("is_unsigned").get<bool>(),
                           j.at("inner").get<SizeExpr>());
    } else {
        throw DomainError("unknown SizeExpr kind: " + kind);
    }
}

void to_json(json& j, const CandidateSite& s) {
    j = json{{"kind", to_string(s.kind)},
             {"detector_id", s.detector_id},
             {"cwe", s.cwe.value()},
             {"line", s.line},
             {"col", s.col},
             {"guard_found", s.guard_found},
             {"low_confidence", s.low_confidence},
             {"evidence", s.evidence},
             {"expr", nullptr}};
    if (s.expr) {
        json e;
        to_json(e, *s.expr);
        j["expr"] = e;
    }
    if (s.kind == SiteKind::CAST_SIGN) j["signed_width"] = s.signed_width;
}

}  // namespace cobalt::cfront
