#pragma once

#include <stdexcept>

namespace ultisim {

// Fatal misconfiguration: bad flags, malformed config file, mismatched run
// header. Aborts the operation that raised it.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data violates the documented file schema or a record invariant.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Transport gave up after exhausting the retry policy, or hit a
// non-retryable response.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Credentials rejected; retrying cannot help.
struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Replay backend has no recording for the requested key.
struct ReplayMissError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A metric or curve operation received inputs the protocol rules out
// (empty distribution, coverage gap).
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ultisim
