#pragma once

#include <stdexcept>
#include <string>

namespace enaqt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The steady-state linear solve broke down; optimizers skip the trial point.
class SolverFailure : public Error {
public:
    using Error::Error;
};

/// The Liouvillian has more than one (numerically) zero eigenvalue.
class NonUniqueSteadyState : public Error {
public:
    using Error::Error;
};

class StepSizeUnderflow : public Error {
public:
    using Error::Error;
};

class UnderdeterminedFit : public Error {
public:
    using Error::Error;
};

/// Malformed or unknown entry in a key = value configuration.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

} // namespace enaqt
