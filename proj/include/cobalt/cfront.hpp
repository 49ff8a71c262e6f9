#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cobalt/core.hpp"
#include "cobalt/smt.hpp"

namespace cobalt::cfront {

enum class TokenKind { IDENT, INT_LITERAL, PUNCT, KEYWORD, STRING, CHAR, OTHER };

struct Token {
    TokenKind kind = TokenKind::OTHER;
    std::string text;
    int line = 1;  // 1-based
    int col = 1;   // 1-based
    size_t begin = 0;  // byte offsets into the source, [begin, end)
    size_t end = 0;
};

// Total tokenizer: comments and preprocessor lines come out as single OTHER
// tokens, unrecognized bytes degrade to OTHER, and spans are lossless.
std::vector<Token> tokenize_c(std::string_view source);

// Allocation-size expression: the fragment of C arithmetic the encoder can
// turn into a wrap predicate. Anything else fails to parse (no site).
struct SizeExpr {
    enum class Kind { Var, Const, SizeOf, Mul, Add, Cast };

    Kind kind = Kind::Const;
    std::string name;             // Var name or SizeOf type name
    std::uint64_t value = 0;      // Const value, or SizeOf resolved byte count
    int cast_width = 0;           // Cast target width in bits
    bool cast_is_unsigned = true;
    std::vector<SizeExpr> kids;

    static SizeExpr var(std::string name);
    static SizeExpr constant(std::uint64_t value);
    static SizeExpr size_of(std::string type_name, std::uint64_t bytes);
    static SizeExpr mul(SizeExpr lhs, SizeExpr rhs);
    static SizeExpr add(SizeExpr lhs, SizeExpr rhs);
    static SizeExpr cast(int width, bool is_unsigned, SizeExpr inner);

    bool contains_var() const;
    bool contains_mul_or_add() const;
    // Exact evaluation with every Var bound to var_value; Cast masks to its
    // target width, mirroring the encoder's semantics.
    smt::u128 eval_with_vars(std::uint64_t var_value) const;
};

enum class SiteKind { ALLOC_ARITH, CAST_SIGN, INDEX_UNCHECKED, UNSAFE_STRCOPY };

std::string to_string(SiteKind k);

struct CandidateSite {
    std::string artifact_id;  // stamped by the pipeline, empty at extraction
    std::string detector_id;
    CweId cwe{190};
    int line = 0;
    int col = 0;
    SiteKind kind = SiteKind::ALLOC_ARITH;
    std::optional<SizeExpr> expr;  // non-null for ALLOC_ARITH / CAST_SIGN
    bool guard_found = false;
    bool low_confidence = false;   // e.g. sizeof over an unknown struct
    std::string evidence;          // offending statement, clipped to its line
    int signed_width = 0;          // CAST_SIGN: width of the signed source
};

// Scans a token stream (plus its source, for evidence lines) for candidate
// sites. width_bits fixes sizeof(size_t) and the guard-bound arithmetic.
std::vector<CandidateSite> extract_c_sites(const std::vector<Token>& tokens,
                                           std::string_view source, int width_bits = 32);

void to_json(json& j, const SizeExpr& e);
void from_json(const json& j, SizeExpr& e);
void to_json(json& j, const CandidateSite& s);

}  // namespace cobalt::cfront
