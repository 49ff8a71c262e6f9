#pragma once

#include <optional>
#include <string>

#include "cobalt/cfront.hpp"
#include "cobalt/smt.hpp"

namespace cobalt::encode {

// Analysis bit width; size_t and SIZE_MAX follow it.
class Width {
public:
    Width() = default;  // analysis default: 32
    explicit Width(int bits);
    int bits() const { return bits_; }

private:
    int bits_ = 32;
};

// Upper bound already established for one variable (e.g. by a rejected-input
// check the guard recognizer could not prove tight enough to discard).
struct GuardBound {
    std::string var;
    std::uint64_t bound = 0;
};

// Wrap predicate for an allocation-size expression: evaluate expr with every
// variable zero-extended to 2w and assert the exact result reaches 2^w, i.e.
// the w-bit computation wraps. Guard conjoins var <= bound.
// expr must contain at least one Var (DomainError otherwise).
smt::Formula encode_overflow(const cfront::SizeExpr& expr, Width width,
                             std::optional<GuardBound> guard = std::nullopt);

// Signed-to-unsigned size conversion predicate: a negative source value whose
// unsigned reinterpretation at the target width exceeds 2^(target-1). The
// caller guarantees the source really is signed.
smt::Formula encode_sign_conversion(Width var_width, Width target_width,
                                    const std::string& var_name = "v");

}  // namespace cobalt::encode
