#pragma once

#include <stdexcept>
#include <string>

namespace manakov {

/// Malformed input: bad files, invalid arguments, unsupported parameters.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: overflow, singular matrices, non-convergence.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The scattering data violates the assumptions of the requested case
/// (e.g. a near-real zero of s11 while solving a Case II problem).
class CaseViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace manakov
