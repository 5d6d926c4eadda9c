#ifndef DUCTWARP_ERRORS_HPP
#define DUCTWARP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ductwarp {

/// Bad user input: malformed files, invariant violations, precondition failures.
/// The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure at runtime: no modes found, bracketing failed, cutoff hit.
/// The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ductwarp

#endif
