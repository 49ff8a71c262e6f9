#include <doctest.h>

#include <string>

#include "cobalt/smt.hpp"

using namespace cobalt;
using namespace cobalt::smt;

namespace {

// n zero-extended to 2w, times k, must reach 2^w: the w-bit product wraps.
Formula wrap_formula(int w, std::uint64_t k) {
    Term n = Term::var("n", w);
    Term product = Term::mul(Term::zero_extend(n, w), Term::constant(k, 2 * w));
    Formula f;
    f.decls = {{"n", w}};
    f.assertion = Cond::uge(product, Term::constant(u128(1) << w, 2 * w));
    return f;
}

Formula guarded_wrap(int w, std::uint64_t k, std::uint64_t bound) {
    Formula f = wrap_formula(w, k);
    f.assertion = Cond::conj(
        {f.assertion, Cond::uge(Term::constant(bound, w), Term::var("n", w))});
    return f;
}

const std::string kToolDir = COBALT_TEST_TOOL_DIR;

}  // namespace

TEST_CASE("term constructors enforce width discipline") {
    CHECK_THROWS_AS(Term::constant(256, 8), DomainError);  // value needs 9 bits
    CHECK_THROWS_AS(Term::mul(Term::var("a", 8), Term::var("b", 16)), DomainError);
    CHECK_THROWS_AS(Term::var("", 8), DomainError);
    CHECK_THROWS_AS(Term::var("x", 0), DomainError);
    CHECK(Term::zero_extend(Term::var("a", 8), 8).width == 16);
    CHECK(Term::truncate(Term::var("a", 16), 8).width == 8);
}

TEST_CASE("emit_smtlib produces the documented deterministic text") {
    const std::string text = emit_smtlib(wrap_formula(8, 4));
    CHECK(text ==
          "(set-logic QF_BV)\n"
          "(declare-const n (_ BitVec 8))\n"
          "(assert (bvuge (bvmul ((_ zero_extend 8) n) #x0004) #x0100))\n"
          "(check-sat)\n"
          "(get-model)\n");
}

TEST_CASE("emit_smtlib sorts declarations by name") {
    Formula f;
    f.decls = {{"zeta", 8}, {"alpha", 8}};
    f.assertion = Cond::ult(Term::var("alpha", 8), Term::var("zeta", 8));
    const std::string text = emit_smtlib(f);
    CHECK(text.find("(declare-const alpha") < text.find("(declare-const zeta"));
}

TEST_CASE("parse_smtlib round-trips the emitted subset") {
    Formula f = guarded_wrap(16, 6, 20000);
    Formula back = parse_smtlib(emit_smtlib(f));
    CHECK(back.decls.size() == 1);
    CHECK(back.decls[0].name == "n");
    CHECK(back.decls[0].width == 16);
    // Same semantics: equal evaluation on probe points.
    for (std::uint64_t probe : {0ull, 10922ull, 10923ull, 20000ull, 20001ull, 65535ull}) {
        Witness w{{"n", probe}};
        CHECK(eval_concrete(f, w) == eval_concrete(back, w));
    }
    CHECK_THROWS_AS(parse_smtlib("(assert (bvxyz a b))"), DomainError);
}

TEST_CASE("eval_concrete computes exact modular arithmetic") {
    Formula f = wrap_formula(8, 4);
    CHECK(eval_concrete(f, {{"n", 64}}));       // 64*4 = 256
    CHECK(eval_concrete(f, {{"n", 255}}));
    CHECK_FALSE(eval_concrete(f, {{"n", 63}}));  // 252 < 256
    CHECK_FALSE(eval_concrete(f, {{"n", 0}}));
    CHECK_THROWS_AS(eval_concrete(f, {}), DomainError);            // unbound var
    CHECK_THROWS_AS(eval_concrete(f, {{"n", 256}}), DomainError);  // exceeds width
}

TEST_CASE("solve_builtin decides the wrap family by enumeration at small width") {
    auto v = solve_builtin(wrap_formula(8, 4));
    REQUIRE(v.outcome == Outcome::SAT);
    CHECK(v.witness.at("n") == 64);  // smallest wrapping count
    CHECK(eval_concrete(wrap_formula(8, 4), v.witness));

    CHECK(solve_builtin(wrap_formula(8, 0)).outcome == Outcome::UNSAT);  // 0*n never wraps
    CHECK(solve_builtin(guarded_wrap(8, 4, 63)).outcome == Outcome::UNSAT);
    auto boundary = solve_builtin(guarded_wrap(8, 4, 64));
    REQUIRE(boundary.outcome == Outcome::SAT);
    CHECK(boundary.witness.at("n") == 64);
}

TEST_CASE("solve_builtin covers wide widths constructively") {
    auto v32 = solve_builtin(wrap_formula(32, 4));
    REQUIRE(v32.outcome == Outcome::SAT);
    CHECK(v32.witness.at("n") == 1073741824);  // 2^30
    CHECK(eval_concrete(wrap_formula(32, 4), v32.witness));

    auto v64 = solve_builtin(wrap_formula(64, 4));
    REQUIRE(v64.outcome == Outcome::SAT);
    CHECK(eval_concrete(wrap_formula(64, 4), v64.witness));
}

TEST_CASE("solve_builtin degrades to UNKNOWN outside its fragment") {
    // Two 32-bit variables: too wide to enumerate, no constructive shape.
    Formula f;
    f.decls = {{"a", 32}, {"b", 32}};
    Term product = Term::mul(Term::zero_extend(Term::var("a", 32), 32),
                             Term::zero_extend(Term::var("b", 32), 32));
    f.assertion = Cond::uge(product, Term::constant(u128(1) << 32, 64));
    CHECK(solve_builtin(f).outcome == Outcome::UNKNOWN);
}

TEST_CASE("solve_builtin never throws: open formulas degrade to UNKNOWN") {
    Formula f;
    f.assertion = Cond::ult(Term::var("ghost", 8), Term::constant(5, 8));
    CHECK_FALSE(f.is_closed());
    CHECK(solve_builtin(f).outcome == Outcome::UNKNOWN);
}

TEST_CASE("constructive tier is guard-aware at wide widths") {
    CHECK(solve_builtin(guarded_wrap(32, 4, (1u << 30) - 1)).outcome == Outcome::UNSAT);
    auto v = solve_builtin(guarded_wrap(32, 4, 1u << 30));
    REQUIRE(v.outcome == Outcome::SAT);
    CHECK(v.witness.at("n") == (1u << 30));
}

TEST_CASE("external solver: agreement with an independent brute-force oracle") {
    const std::string cmd = "python3 " + kToolDir + "/mini_qfbv.py";
    for (std::uint64_t k : {0ull, 1ull, 3ull, 4ull, 7ull}) {
        Formula f = wrap_formula(8, k);
        auto ours = solve_builtin(f);
        auto theirs = solve_external(f, cmd, 20000);
        CHECK(ours.outcome == theirs.outcome);
        if (theirs.outcome == Outcome::SAT)
            CHECK(eval_concrete(f, theirs.witness));
    }
}

TEST_CASE("external solver: timeout yields UNKNOWN, not an error") {
    auto v = solve_external(wrap_formula(8, 4), kToolDir + "/slow_solver.sh", 300);
    CHECK(v.outcome == Outcome::UNKNOWN);
    CHECK(v.elapsed_ms >= 300);
}

TEST_CASE("external solver: non-answers and lying models are infrastructure errors") {
    CHECK_THROWS_AS(
        solve_external(wrap_formula(8, 4), kToolDir + "/garbage_solver.sh", 5000),
        InfraError);
    // Claims sat with an all-zero model; zero does not wrap, so the mandatory
    // witness check must reject the verdict.
    CHECK_THROWS_AS(
        solve_external(wrap_formula(8, 4), kToolDir + "/lying_solver.sh", 5000),
        InfraError);
    CHECK_THROWS_AS(solve_external(wrap_formula(8, 4), "", 5000), DomainError);
}

TEST_CASE("external solver accepts the SMT-LIB text entry point") {
    const std::string cmd = "python3 " + kToolDir + "/mini_qfbv.py";
    auto v = solve_external(emit_smtlib(wrap_formula(8, 4)), cmd, 20000);
    REQUIRE(v.outcome == Outcome::SAT);
    CHECK(v.witness.at("n") == 64);
}

TEST_CASE("solver verdict JSON") {
    auto v = solve_builtin(wrap_formula(8, 4));
    json j;
    to_json(j, v);
    CHECK(j["outcome"] == "SAT");
    CHECK(j["witness"]["n"] == 64);
}
