#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobalt/core.hpp"

namespace cobalt::smt {

// Constants at double width can reach 2^64, so term values carry 128 bits.
using u128 = unsigned __int128;
using i128 = __int128;

// All-ones mask for a width in [1,128].
u128 bv_mask(int width);

// Fixed-width bit-vector term. Width consistency is enforced at construction:
// binary ops require equal operand widths, extend/truncate produce the
// stated width. Violations throw DomainError.
struct Term {
    enum class Kind { Const, Var, ZeroExtend, Mul, Add, Sub, Truncate, SignedView };

    Kind kind = Kind::Const;
    int width = 0;
    u128 value = 0;     // Const payload (always < 2^width)
    std::string name;   // Var payload
    std::vector<Term> kids;

    static Term constant(u128 value, int width);
    static Term var(std::string name, int width);
    static Term zero_extend(Term inner, int extra_bits);
    static Term mul(Term lhs, Term rhs);
    static Term add(Term lhs, Term rhs);
    static Term sub(Term lhs, Term rhs);
    static Term truncate(Term inner, int to_width);
    // Marks that comparisons see this term as two's-complement signed; the
    // bits are unchanged.
    static Term signed_view(Term inner);
};

// Boolean condition over terms.
struct Cond {
    enum class Kind { True, Ult, Uge, Eq, Slt, And, Or, Not };

    Kind kind = Kind::True;
    std::vector<Term> terms;  // the two comparison operands
    std::vector<Cond> kids;   // And/Or/Not operands

    static Cond always_true();
    static Cond ult(Term lhs, Term rhs);  // unsigned <
    static Cond uge(Term lhs, Term rhs);  // unsigned >=
    static Cond eq(Term lhs, Term rhs);
    static Cond slt(Term lhs, Term rhs);  // signed <
    static Cond conj(std::vector<Cond> parts);
    static Cond disj(std::vector<Cond> parts);
    static Cond negate(Cond inner);
};

struct Decl {
    std::string name;
    int width = 0;
};

// A closed QF_BV satisfiability query: every variable used in the assertion
// must be declared.
struct Formula {
    std::vector<Decl> decls;
    Cond assertion = Cond::always_true();

    bool is_closed() const;  // no undeclared variables in the assertion
};

enum class Outcome { SAT, UNSAT, UNKNOWN };

std::string to_string(Outcome o);

using Witness = std::map<std::string, std::uint64_t>;

struct SolverVerdict {
    Outcome outcome = Outcome::UNKNOWN;
    Witness witness;  // populated exactly when outcome == SAT
    std::string solver_id;
    std::int64_t elapsed_ms = 0;
};

// SMT-LIB 2.6 rendering: QF_BV logic line, declarations sorted by variable
// name, a single assert, check-sat, get-model. Deterministic text.
std::string emit_smtlib(const Formula& f);

// Parses the subset of SMT-LIB that emit_smtlib produces (round-trip
// companion, also used to verify external-solver answers against the original
// query). Unsupported constructs throw DomainError.
Formula parse_smtlib(const std::string& text);

// Evaluates the assertion under a full assignment. Bindings must cover every
// declared variable and respect its width; otherwise DomainError.
bool eval_concrete(const Formula& f, const Witness& bindings);

// Decision procedure for the fragment the encoders produce. Outside the
// fragment it degrades to UNKNOWN; it never returns an unverified SAT.
SolverVerdict solve_builtin(const Formula& f);

// Runs `solver_command <tmpfile.smt2>` (command split on whitespace, no
// shell), parses sat/unsat/unknown plus a model, and verifies any model with
// eval_concrete before reporting SAT. Timeout gives UNKNOWN; spawn failures,
// unparseable output, and models that fail verification throw InfraError.
SolverVerdict solve_external(const Formula& f, const std::string& solver_command,
                             int timeout_ms);

// Same, starting from SMT-LIB text in the emitted subset (re-parsed so the
// witness check still runs).
SolverVerdict solve_external(const std::string& smtlib, const std::string& solver_command,
                             int timeout_ms);

void to_json(json& j, const SolverVerdict& v);

}  // namespace cobalt::smt
