#include "cobalt/encode.hpp"

#include <set>

namespace cobalt::encode {

using smt::Cond;
using smt::Formula;
using smt::Term;
using smt::u128;

Width::Width(int bits) : bits_(bits) {
    if (bits != 8 && bits != 16 && bits != 32 && bits != 64)
        throw DomainError("analysis width must be one of 8/16/32/64, got " +
                          std::to_string(bits));
}

namespace {

void collect_expr_vars(const cfront::SizeExpr& e, std::set<std::string>& names) {
    if (e.kind == cfront::SizeExpr::Kind::Var) names.insert(e.name);
    for (const auto& k : e.kids) collect_expr_vars(k, names);
}

// Translate a SizeExpr into a 2w-bit term: variables live at w bits and are
// zero-extended, so the double-width value is the exact mathematical result
// of the w-bit source expression.
Term translate(const cfront::SizeExpr& e, int w) {
    const int w2 = 2 * w;
    switch (e.kind) {
        case cfront::SizeExpr::Kind::Var:
            return Term::zero_extend(Term::var(e.name, w), w);
        case cfront::SizeExpr::Kind::Const:
        case cfront::SizeExpr::Kind::SizeOf:
            return Term::constant(static_cast<u128>(e.value) & smt::bv_mask(w2), w2);
        case cfront::SizeExpr::Kind::Mul:
            return Term::mul(translate(e.kids[0], w), translate(e.kids[1], w));
        case cfront::SizeExpr::Kind::Add:
            return Term::add(translate(e.kids[0], w), translate(e.kids[1], w));
        case cfront::SizeExpr::Kind::Cast: {
            // A cast to the analysis width of a bare variable is the identity
            // (the variable already lives at w bits). Anything else truncates
            // at the cast width, which pushes the formula out of the builtin
            // fragment and downgrades the site to pattern tier.
            if (e.cast_width == w && e.kids[0].kind == cfront::SizeExpr::Kind::Var)
                return translate(e.kids[0], w);
            Term inner = translate(e.kids[0], w);
            if (e.cast_width >= w2) return inner;
            return Term::zero_extend(Term::truncate(std::move(inner), e.cast_width),
                                     w2 - e.cast_width);
        }
    }
    throw DomainError("invalid SizeExpr kind");
}

}  // namespace

Formula encode_overflow(const cfront::SizeExpr& expr, Width width,
                        std::optional<GuardBound> guard) {
    std::set<std::string> names;
    collect_expr_vars(expr, names);
    if (names.empty())
        throw DomainError("size expression has no variable; nothing to solve");

    const int w = width.bits();
    Formula f;
    for (const auto& n : names) f.decls.push_back({n, w});

    std::vector<Cond> parts;
    parts.push_back(Cond::uge(translate(expr, w),
                              Term::constant(static_cast<u128>(1) << w, 2 * w)));
    if (guard) {
        if (!names.count(guard->var))
            throw DomainError("guard bound names unknown variable '" + guard->var + "'");
        parts.push_back(Cond::uge(Term::constant(guard->bound, w), Term::var(guard->var, w)));
    }
    f.assertion = Cond::conj(std::move(parts));
    return f;
}

Formula encode_sign_conversion(Width var_width, Width target_width,
                               const std::string& var_name) {
    const int vw = var_width.bits();
    const int tw = target_width.bits();
    if (var_name.empty()) throw DomainError("sign-conversion variable needs a name");

    Formula f;
    f.decls.push_back({var_name, tw});
    Term v = Term::var(var_name, tw);

    std::vector<Cond> parts;
    // Negative as signed...
    parts.push_back(Cond::slt(Term::signed_view(v), Term::constant(0, tw)));
    if (vw < tw) {
        // ... within the narrower source's value range ...
        const u128 lower = (smt::bv_mask(tw) ^ smt::bv_mask(vw - 1));  // -2^(vw-1) two's-compl
        parts.push_back(Cond::negate(
            Cond::slt(Term::signed_view(v), Term::constant(lower & smt::bv_mask(tw), tw))));
    }
    // ... and huge as unsigned.
    parts.push_back(
        Cond::ult(Term::constant(static_cast<u128>(1) << (tw - 1), tw), v));
    f.assertion = Cond::conj(std::move(parts));
    return f;
}

}  // namespace cobalt::encode
