#pragma once

// Internal s-expression scanner shared by the SMT-LIB subset parser and the
// external-solver model reader. Not installed; include from src/ only.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cobalt/core.hpp"
#include "cobalt/smt.hpp"

namespace cobalt::smt::detail {

struct Sexp {
    bool is_atom = true;
    std::string atom;
    std::vector<Sexp> kids;
};

struct SexpReader {
    std::string_view text;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') {  // comment to end of line
                while (pos < text.size() && text[pos] != '\n') pos++;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                pos++;
            } else {
                break;
            }
        }
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    Sexp next() {
        skip_ws();
        if (pos >= text.size()) throw DomainError("unexpected end of smtlib text");
        if (text[pos] == '(') {
            pos++;
            Sexp list;
            list.is_atom = false;
            for (;;) {
                skip_ws();
                if (pos >= text.size()) throw DomainError("unbalanced '(' in smtlib text");
                if (text[pos] == ')') {
                    pos++;
                    return list;
                }
                list.kids.push_back(next());
            }
        }
        if (text[pos] == ')') throw DomainError("unbalanced ')' in smtlib text");
        size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            pos++;
        Sexp a;
        a.atom = std::string(text.substr(start, pos - start));
        return a;
    }
};

inline u128 parse_u128_dec(const std::string& s) {
    if (s.empty()) throw DomainError("empty numeral");
    u128 v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw DomainError("bad decimal numeral: " + s);
        v = v * 10 + static_cast<u128>(c - '0');
    }
    return v;
}

// #x/#b literal or (_ bvN w) value form -> (value, width)
inline std::optional<std::pair<u128, int>> parse_bv_literal(const Sexp& s) {
    if (s.is_atom) {
        const std::string& a = s.atom;
        if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
            u128 v = 0;
            for (size_t i = 2; i < a.size(); i++) {
                char c = static_cast<char>(std::tolower(static_cast<unsigned char>(a[i])));
                int d = c >= '0' && c <= '9'   ? c - '0'
                        : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                               : -1;
                if (d < 0) throw DomainError("bad hex literal: " + a);
                v = (v << 4) | static_cast<u128>(d);
            }
            return {{v, static_cast<int>((a.size() - 2) * 4)}};
        }
        if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
            u128 v = 0;
            for (size_t i = 2; i < a.size(); i++) {
                if (a[i] != '0' && a[i] != '1') throw DomainError("bad binary literal: " + a);
                v = (v << 1) | static_cast<u128>(a[i] - '0');
            }
            return {{v, static_cast<int>(a.size() - 2)}};
        }
        return std::nullopt;
    }
    if (s.kids.size() == 3 && s.kids[0].is_atom && s.kids[0].atom == "_" && s.kids[1].is_atom &&
        s.kids[1].atom.rfind("bv", 0) == 0 && s.kids[2].is_atom) {
        u128 v = parse_u128_dec(s.kids[1].atom.substr(2));
        int w = static_cast<int>(parse_u128_dec(s.kids[2].atom));
        return {{v, w}};
    }
    return std::nullopt;
}

}  // namespace cobalt::smt::detail
