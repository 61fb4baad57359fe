#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chemokin {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind {
    BadConfig,
    AssumptionViolation,
    CflViolation,
    SpecViolation,
    NonFiniteInput,
    LeftDomain,
    NoContraction,
    NoSignChange,
    EmptyField,
    IoError,
    VerificationFailed,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::BadConfig: return "bad-config";
    case ErrorKind::AssumptionViolation: return "assumption-violation";
    case ErrorKind::CflViolation: return "cfl-violation";
    case ErrorKind::SpecViolation: return "spec-violation";
    case ErrorKind::NonFiniteInput: return "non-finite-input";
    case ErrorKind::LeftDomain: return "left-domain";
    case ErrorKind::NoContraction: return "no-contraction";
    case ErrorKind::NoSignChange: return "no-sign-change";
    case ErrorKind::EmptyField: return "empty-field";
    case ErrorKind::IoError: return "io-error";
    case ErrorKind::VerificationFailed: return "verification-failed";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace chemokin
