#pragma once

#include <stdexcept>
#include <string>

namespace corrspec {

// Every rejectable condition carries one of these codes so callers (CLI, bindings,
// tests) can tell input problems apart from verdicts without parsing messages.
enum class Err {
    NegativeEntry,       // mass entry below zero
    SumNotOne,           // total mass off by more than the validation tolerance
    ZeroMarginal,        // marginal entry at/below the zero-mass threshold
    AlphabetMismatch,    // label/dimension disagreement between operands
    UnknownAxis,         // axis name not present in a factored distribution
    ZeroEvent,           // conditioning event has (near) zero probability
    SizeOverflow,        // product alphabet would exceed the cell cap
    SubsetExplosion,     // too many subset pairs requested
    CapExceeded,         // enumeration larger than the configured budget
    BudgetExceeded,      // random sweep asked for more samples than the budget cap
    DegenerateSource,    // source distribution has a zero/one mass where positivity is required
    DegenerateMarginal,  // binary scenario needs marginals strictly inside (0,1)
    NotBinary,           // operation defined only for 2x2 joints
    NonIntegralCount,    // 2^n*a^2 (or b^2) not an integer where required
    InvalidTilde,        // candidate matrix fails the tilde-matrix contract
    SingularScaling,     // diagonal scaling not invertible
    ConvergenceFailure,  // iterative search failed to meet its tolerance
    ParseError,          // malformed JSON / file contents
    UsageError,          // bad CLI flags
    Internal,            // broken internal invariant (a bug, not bad input)
};

const char* to_string(Err e);

class Error : public std::runtime_error {
  public:
    Error(Err code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    Err code() const { return code_; }

  private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

} // namespace corrspec
