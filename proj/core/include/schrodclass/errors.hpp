#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace schrodclass {

/// Input text does not conform to the expression grammar.
class GrammarError : public std::runtime_error {
public:
    GrammarError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Numeric evaluation hit a division by zero, a log of a nonpositive value,
/// or produced a non-finite number.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A probabilistic check could not gather enough valid sample points.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A result exists mathematically but cannot be written in the grammar
/// (antiderivative, inverse time map, ODE solution).
class NotRepresentableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller-side contract violation (e.g. span without M and I).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Potential outside the family the symbolic x-splitting supports.
class UnsplittableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace schrodclass
