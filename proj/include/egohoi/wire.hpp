#pragma once

// External-backend wire protocol: netstring-framed canonical JSON over a
// local TCP socket or a child process's standard streams, one in-flight
// request per connection. Documented byte-exactly in docs/wire_protocol.md;
// tests/data/wire_vectors.json freezes conformance vectors.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "egohoi/backends.hpp"
#include "egohoi/geometry.hpp"

namespace egohoi::wire {

inline constexpr int kProtocolVersion = 1;

enum class Role { Recognizer, Detector };
const char* to_string(Role role);

// ---- framing ----

// payload -> "<decimal length>:<payload>,"
std::string encode_netstring(std::string_view payload);

// Incremental netstring reader; throws ProtocolError on malformed framing.
class NetstringDecoder {
public:
    void feed(std::string_view bytes);
    std::optional<std::string> next();

private:
    std::string buffer_;
};

// ---- messages (canonical JSON: nlohmann dump, keys sorted, compact) ----

using json = nlohmann::json;

json hello_message(Role role);
json hello_ack_message(Role role);
json infer_message(std::int64_t frame_index, std::span<const std::uint8_t> image_bytes,
                   const std::optional<std::string>& image_path);
json recognizer_result_message(std::int64_t frame_index, double contact_confidence);
json detector_result_message(std::int64_t frame_index, const std::vector<Detection>& detections);
json error_message(std::int64_t frame_index, const std::string& message);

std::string encode_message(const json& message);  // canonical dump + netstring

json parse_message(const std::string& payload);  // throws ProtocolError on bad JSON

// Response validation; ProtocolError / HandshakeError / BackendError.
void check_hello_ack(const json& message, Role expected_role);
double parse_recognizer_result(const json& message, std::int64_t expected_frame);
std::vector<Detection> parse_detector_result(const json& message, std::int64_t expected_frame);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// ---- transports ----

class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(std::string_view bytes) = 0;
    // Some bytes, 0 on orderly EOF; BackendError on timeout or I/O failure.
    virtual std::size_t recv(char* buf, std::size_t cap) = 0;
};

std::unique_ptr<Transport> connect_tcp(const std::string& host, int port,
                                       std::chrono::milliseconds timeout);
std::unique_ptr<Transport> spawn_stdio(const std::string& command,
                                       std::chrono::milliseconds timeout);

// "tcp:HOST:PORT" or "stdio:COMMAND ..."
struct Endpoint {
    enum class Scheme { Tcp, Stdio } scheme = Scheme::Tcp;
    std::string host;
    int port = 0;
    std::string command;

    static Endpoint parse(const std::string& text);  // ConfigError on bad syntax
    std::unique_ptr<Transport> connect(std::chrono::milliseconds timeout) const;
};

// Lockstep request/response client; performs the handshake on construction.
class ExternalClient {
public:
    ExternalClient(std::unique_ptr<Transport> transport, Role role);

    json request(const json& message);

private:
    json read_message();

    std::unique_ptr<Transport> transport_;
    NetstringDecoder decoder_;
};

struct ExternalOptions {
    std::chrono::milliseconds timeout{5000};
    // When set, frames are referenced by file path instead of inline bytes.
    std::optional<std::string> image_path_pattern;
    double recognizer_threshold = 0.5;
};

std::unique_ptr<Recognizer> make_external_recognizer(const std::string& endpoint,
                                                     const ExternalOptions& options = {});
std::unique_ptr<Detector> make_external_detector(const std::string& endpoint,
                                                 const ExternalOptions& options = {});

}  // namespace egohoi::wire
