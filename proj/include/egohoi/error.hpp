#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace egohoi {

// Base class for recoverable pipeline errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: bad flags, malformed config file, bad experiment spec.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Corpus schema violation or inconsistent annotations; message carries file/frame context.
class CorpusError : public Error {
public:
    using Error::Error;
};

// Inference backend failure; carries frame context when known.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(what) {}
    BackendError(const std::string& what, std::int64_t frame)
        : Error(what + " (frame " + std::to_string(frame) + ")"), frame_(frame) {}

    std::optional<std::int64_t> frame() const { return frame_; }

private:
    std::optional<std::int64_t> frame_;
};

// Malformed message or framing on an external-backend connection.
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

// Version/role mismatch during the external-backend handshake.
class HandshakeError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

// Non-monotone frame stream fed to the cascade; signals an upstream batching bug.
class StreamOrderError : public Error {
public:
    using Error::Error;
};

// Misuse of a module contract (programming error, not input error).
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace egohoi
