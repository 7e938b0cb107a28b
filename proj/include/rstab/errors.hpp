#pragma once

#include <stdexcept>
#include <string>

namespace rstab {

// Root of every error raised by the library. Callers that only need a
// one-line diagnostic can catch this and print what().
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class UnsupportedFieldError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// iwI - A could not be factored (A not stable or extremely ill-conditioned).
class SingularShiftError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// sigma_2 is not simple at the requested point, so mu is not differentiable there.
class NonsmoothPointError : public Error {
public:
    using Error::Error;
};

/// The reduced resolvent iwI - A_V is numerically singular.
class DegenerateReductionError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class OptimizerStarvedError : public Error {
public:
    using Error::Error;
};

class SizeGuardError : public Error {
public:
    using Error::Error;
};

} // namespace rstab
