#pragma once

#include <stdexcept>
#include <string>

namespace gapforge {

enum class ErrorKind { validation, numerical };

// Base of every error raised by the library. `code` is a stable, machine
// readable name (e.g. "DegenerateA") that the CLI echoes in its error JSON.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message, std::string field = {})
        : std::runtime_error(message), kind_(kind), code_(std::move(code)), field_(std::move(field)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorKind kind_;
    std::string code_;
    std::string field_;
};

// Bad input: malformed files, violated hypotheses, inconsistent sizes.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message, std::string field = {})
        : Error(ErrorKind::validation, "ValidationError", message, std::move(field)) {}

protected:
    ValidationError(std::string code, const std::string& message, std::string field)
        : Error(ErrorKind::validation, std::move(code), message, std::move(field)) {}
};

// The inputs were acceptable but a numerical procedure could not deliver.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message)
        : Error(ErrorKind::numerical, "NumericalError", message) {}

protected:
    NumericalError(std::string code, const std::string& message)
        : Error(ErrorKind::numerical, std::move(code), message) {}
};

#define GAPFORGE_VALIDATION_ERROR(Name)                                      \
    class Name : public ValidationError {                                    \
    public:                                                                  \
        explicit Name(const std::string& message, std::string field = {})    \
            : ValidationError(#Name, message, std::move(field)) {}           \
    };

#define GAPFORGE_NUMERICAL_ERROR(Name)                                       \
    class Name : public NumericalError {                                     \
    public:                                                                  \
        explicit Name(const std::string& message)                            \
            : NumericalError(#Name, message) {}                              \
    };

GAPFORGE_VALIDATION_ERROR(InvalidInput)
GAPFORGE_VALIDATION_ERROR(InvalidCell)
GAPFORGE_VALIDATION_ERROR(InvalidDecomposition)
GAPFORGE_VALIDATION_ERROR(InvalidCoupling)
GAPFORGE_VALIDATION_ERROR(DegenerateA)
GAPFORGE_VALIDATION_ERROR(InvalidTargets)
GAPFORGE_VALIDATION_ERROR(InvalidFiberSpec)

GAPFORGE_NUMERICAL_ERROR(NonpositiveRadicand)
GAPFORGE_NUMERICAL_ERROR(RootNotBracketed)
GAPFORGE_NUMERICAL_ERROR(SymmetryViolation)
GAPFORGE_NUMERICAL_ERROR(SolverFailure)
GAPFORGE_NUMERICAL_ERROR(GapCountMismatch)
GAPFORGE_NUMERICAL_ERROR(BracketingFailed)
GAPFORGE_NUMERICAL_ERROR(NotConverged)

#undef GAPFORGE_VALIDATION_ERROR
#undef GAPFORGE_NUMERICAL_ERROR

}  // namespace gapforge
