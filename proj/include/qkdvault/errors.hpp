#pragma once

#include <stdexcept>
#include <string>

namespace qkdvault {

// Error categories used across the library. Protocol aborts are not errors:
// they come back as QkdSessionResult statuses. Exceptions are for contract
// violations, broken inputs and resource problems.
enum class Errc {
    InvalidArgument,
    ContractViolation,    // e.g. measuring a destroyed photon
    KeyLengthMismatch,
    KeyReuseRefused,
    WrongKey,
    InsufficientKey,      // maps to AbortedLength inside a session
    KeyExhausted,         // pool has fewer bits than requested
    SessionCorruption,
    ReconciliationFailure,
    CounterExhausted,
    Conflict,
    ValidationFailed,
    AuthenticationFailed,
    NotFound,
    TokenInvalid,
    ChecksumMismatch,
    DemoInapplicable,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline const char* errc_name(Errc code) {
    switch (code) {
        case Errc::InvalidArgument: return "invalid_argument";
        case Errc::ContractViolation: return "contract_violation";
        case Errc::KeyLengthMismatch: return "key_length_mismatch";
        case Errc::KeyReuseRefused: return "key_reuse_refused";
        case Errc::WrongKey: return "wrong_key";
        case Errc::InsufficientKey: return "insufficient_key";
        case Errc::KeyExhausted: return "key_exhausted";
        case Errc::SessionCorruption: return "session_corruption";
        case Errc::ReconciliationFailure: return "reconciliation_failure";
        case Errc::CounterExhausted: return "counter_exhausted";
        case Errc::Conflict: return "conflict";
        case Errc::ValidationFailed: return "validation_failed";
        case Errc::AuthenticationFailed: return "authentication_failed";
        case Errc::NotFound: return "not_found";
        case Errc::TokenInvalid: return "token_invalid";
        case Errc::ChecksumMismatch: return "checksum_mismatch";
        case Errc::DemoInapplicable: return "demo_inapplicable";
        case Errc::Io: return "io_error";
    }
    return "unknown";
}

} // namespace qkdvault
