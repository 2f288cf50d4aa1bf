#include "egohoi/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

#include "egohoi/error.hpp"
#include "egohoi/serialization.hpp"

namespace egohoi::wire {

const char* to_string(Role role) { return role == Role::Recognizer ? "recognizer" : "detector"; }

std::string encode_netstring(std::string_view payload) {
    std::string out = std::to_string(payload.size());
    out += ':';
    out += payload;
    out += ',';
    return out;
}

void NetstringDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<std::string> NetstringDecoder::next() {
    if (buffer_.empty()) return std::nullopt;
    const std::size_t colon = buffer_.find(':');
    if (colon == std::string::npos) {
        if (buffer_.size() > 20) throw ProtocolError("netstring length field too long");
        for (const char c : buffer_)
            if (c < '0' || c > '9') throw ProtocolError("netstring length is not a decimal number");
        return std::nullopt;  // length still incomplete
    }
    if (colon == 0) throw ProtocolError("netstring with empty length field");
    std::size_t length = 0;
    for (std::size_t i = 0; i < colon; ++i) {
        const char c = buffer_[i];
        if (c < '0' || c > '9') throw ProtocolError("netstring length is not a decimal number");
        length = length * 10 + static_cast<std::size_t>(c - '0');
        if (length > (1u << 30)) throw ProtocolError("netstring payload exceeds 1 GiB");
    }
    const std::size_t total = colon + 1 + length + 1;
    if (buffer_.size() < total) return std::nullopt;
    if (buffer_[colon + 1 + length] != ',')
        throw ProtocolError("netstring missing the trailing comma");
    std::string payload = buffer_.substr(colon + 1, length);
    buffer_.erase(0, total);
    return payload;
}

json hello_message(Role role) {
    return json{{"protocol", kProtocolVersion}, {"role", to_string(role)}, {"type", "hello"}};
}

json hello_ack_message(Role role) {
    return json{{"protocol", kProtocolVersion}, {"role", to_string(role)}, {"type", "hello_ack"}};
}

json infer_message(std::int64_t frame_index, std::span<const std::uint8_t> image_bytes,
                   const std::optional<std::string>& image_path) {
    json image;
    if (image_path) {
        image = json{{"encoding", "path"}, {"path", *image_path}};
    } else if (!image_bytes.empty()) {
        image = json{{"data", base64_encode(image_bytes)}, {"encoding", "b64"}};
    } else {
        image = json{{"encoding", "none"}};
    }
    return json{{"frame_index", frame_index}, {"image", image}, {"type", "infer"}};
}

json recognizer_result_message(std::int64_t frame_index, double contact_confidence) {
    return json{{"contact_confidence", contact_confidence},
                {"frame_index", frame_index},
                {"type", "result"}};
}

json detector_result_message(std::int64_t frame_index, const std::vector<Detection>& detections) {
    return json{
        {"detections", detections}, {"frame_index", frame_index}, {"type", "result"}};
}

json error_message(std::int64_t frame_index, const std::string& message) {
    return json{{"frame_index", frame_index}, {"message", message}, {"type", "error"}};
}

std::string encode_message(const json& message) { return encode_netstring(message.dump()); }

json parse_message(const std::string& payload) {
    json msg = json::parse(payload, nullptr, false);
    if (msg.is_discarded()) throw ProtocolError("message payload is not valid JSON");
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        throw ProtocolError("message must be a JSON object with a string 'type'");
    return msg;
}

void check_hello_ack(const json& message, Role expected_role) {
    if (message.value("type", "") != "hello_ack")
        throw HandshakeError("expected hello_ack, got '" + message.value("type", "") + "'");
    const int protocol = message.value("protocol", -1);
    if (protocol != kProtocolVersion)
        throw HandshakeError("protocol version mismatch: peer speaks " +
                             std::to_string(protocol) + ", expected " +
                             std::to_string(kProtocolVersion));
    const std::string role = message.value("role", "");
    if (role != to_string(expected_role))
        throw HandshakeError("role mismatch: peer answered as '" + role + "', expected '" +
                             std::string(to_string(expected_role)) + "'");
}

namespace {

void check_result_frame(const json& message, std::int64_t expected_frame) {
    if (message.value("type", "") == "error")
        throw BackendError("backend error: " + message.value("message", "<unspecified>"),
                           expected_frame);
    if (message.value("type", "") != "result")
        throw ProtocolError("expected result, got '" + message.value("type", "") + "'",
                            expected_frame);
    if (!message.contains("frame_index") || !message["frame_index"].is_number_integer())
        throw ProtocolError("result is missing an integer frame_index", expected_frame);
    const auto frame = message["frame_index"].get<std::int64_t>();
    if (frame != expected_frame)
        throw ProtocolError("result frame_index " + std::to_string(frame) +
                                " does not match the in-flight request",
                            expected_frame);
}

}  // namespace

double parse_recognizer_result(const json& message, std::int64_t expected_frame) {
    check_result_frame(message, expected_frame);
    if (!message.contains("contact_confidence") || !message["contact_confidence"].is_number())
        throw ProtocolError("recognizer result is missing contact_confidence", expected_frame);
    const double c = message["contact_confidence"].get<double>();
    if (!(c >= 0.0 && c <= 1.0))
        throw ProtocolError("contact_confidence outside [0,1]", expected_frame);
    return c;
}

std::vector<Detection> parse_detector_result(const json& message, std::int64_t expected_frame) {
    check_result_frame(message, expected_frame);
    if (!message.contains("detections") || !message["detections"].is_array())
        throw ProtocolError("detector result is missing a detections array", expected_frame);
    std::vector<Detection> out;
    try {
        out = message["detections"].get<std::vector<Detection>>();
    } catch (const std::exception& e) {
        throw ProtocolError(std::string("malformed detection record: ") + e.what(),
                            expected_frame);
    }
    for (const Detection& d : out) {
        if (!d.bbox.valid()) throw ProtocolError("detection box violates invariants", expected_frame);
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
            throw ProtocolError("detection confidence outside [0,1]", expected_frame);
    }
    return out;
}

namespace {

constexpr char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += kB64Alphabet[v & 63];
        i += 3;
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kB64Alphabet[(v >> 18) & 63];
        out += kB64Alphabet[(v >> 12) & 63];
        out += kB64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    static constexpr auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (text.size() % 4 != 0) throw ProtocolError("base64 payload length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4] = {0, 0, 0, 0};
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                ++pad;
                continue;
            }
            if (pad > 0) throw ProtocolError("base64 padding in the middle of the payload");
            vals[k] = value_of(c);
            if (vals[k] < 0) throw ProtocolError("invalid base64 character");
        }
        const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

namespace {

class TcpTransport final : public Transport {
public:
    TcpTransport(int fd, std::chrono::milliseconds timeout) : fd_(fd), timeout_(timeout) {}
    ~TcpTransport() override {
        if (fd_ >= 0) ::close(fd_);
    }

    void send(std::string_view bytes) override {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError(std::string("socket send failed: ") + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::size_t recv(char* buf, std::size_t cap) override {
        struct pollfd pfd {fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_.count()));
        if (rc == 0) throw BackendError("external backend timed out");
        if (rc < 0) throw BackendError(std::string("poll failed: ") + std::strerror(errno));
        const ssize_t n = ::recv(fd_, buf, cap, 0);
        if (n < 0) throw BackendError(std::string("socket recv failed: ") + std::strerror(errno));
        return static_cast<std::size_t>(n);
    }

private:
    int fd_;
    std::chrono::milliseconds timeout_;
};

class StdioTransport final : public Transport {
public:
    StdioTransport(pid_t pid, int write_fd, int read_fd, std::chrono::milliseconds timeout)
        : pid_(pid), write_fd_(write_fd), read_fd_(read_fd), timeout_(timeout) {}

    ~StdioTransport() override {
        if (write_fd_ >= 0) ::close(write_fd_);  // EOF tells the child to exit
        if (read_fd_ >= 0) ::close(read_fd_);
        if (pid_ > 0) {
            int status = 0;
            // Give the child a moment, then insist.
            for (int i = 0; i < 50; ++i) {
                if (::waitpid(pid_, &status, WNOHANG) != 0) return;
                ::usleep(10'000);
            }
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
        }
    }

    void send(std::string_view bytes) override {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const ssize_t n = ::write(write_fd_, bytes.data() + sent, bytes.size() - sent);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError(std::string("backend process write failed: ") +
                                   std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::size_t recv(char* buf, std::size_t cap) override {
        struct pollfd pfd {read_fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(timeout_.count()));
        if (rc == 0) throw BackendError("external backend timed out");
        if (rc < 0) throw BackendError(std::string("poll failed: ") + std::strerror(errno));
        const ssize_t n = ::read(read_fd_, buf, cap);
        if (n < 0) throw BackendError(std::string("backend process read failed: ") +
                                      std::strerror(errno));
        return static_cast<std::size_t>(n);
    }

private:
    pid_t pid_;
    int write_fd_;
    int read_fd_;
    std::chrono::milliseconds timeout_;
};

}  // namespace

std::unique_ptr<Transport> connect_tcp(const std::string& host, int port,
                                       std::chrono::milliseconds timeout) {
    struct addrinfo hints {};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
    if (rc != 0)
        throw BackendError("cannot resolve " + host + ": " + gai_strerror(rc));

    int fd = -1;
    std::string last_error = "no addresses";
    for (struct addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw BackendError("cannot connect to " + host + ":" + std::to_string(port) + ": " +
                           last_error);
    return std::make_unique<TcpTransport>(fd, timeout);
}

std::unique_ptr<Transport> spawn_stdio(const std::string& command,
                                       std::chrono::milliseconds timeout) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
        throw BackendError(std::string("pipe failed: ") + std::strerror(errno));

    const pid_t pid = ::fork();
    if (pid < 0) throw BackendError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::close(to_child[0]);
        ::close(to_child[1]);
        ::close(from_child[0]);
        ::close(from_child[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    return std::make_unique<StdioTransport>(pid, to_child[1], from_child[0], timeout);
}

Endpoint Endpoint::parse(const std::string& text) {
    Endpoint e;
    if (text.rfind("tcp:", 0) == 0) {
        e.scheme = Scheme::Tcp;
        const std::string rest = text.substr(4);
        const std::size_t colon = rest.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size())
            throw ConfigError("tcp endpoint must be tcp:HOST:PORT, got '" + text + "'");
        e.host = rest.substr(0, colon);
        try {
            e.port = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad port in endpoint '" + text + "'");
        }
        return e;
    }
    if (text.rfind("stdio:", 0) == 0) {
        e.scheme = Scheme::Stdio;
        e.command = text.substr(6);
        if (e.command.empty()) throw ConfigError("stdio endpoint needs a command");
        return e;
    }
    throw ConfigError("endpoint must start with tcp: or stdio:, got '" + text + "'");
}

std::unique_ptr<Transport> Endpoint::connect(std::chrono::milliseconds timeout) const {
    if (scheme == Scheme::Tcp) return connect_tcp(host, port, timeout);
    return spawn_stdio(command, timeout);
}

ExternalClient::ExternalClient(std::unique_ptr<Transport> transport, Role role)
    : transport_(std::move(transport)) {
    transport_->send(encode_message(hello_message(role)));
    check_hello_ack(read_message(), role);
}

json ExternalClient::read_message() {
    for (;;) {
        if (auto payload = decoder_.next()) return parse_message(*payload);
        char buf[4096];
        const std::size_t n = transport_->recv(buf, sizeof buf);
        if (n == 0) throw ProtocolError("external backend closed the connection mid-message");
        decoder_.feed(std::string_view(buf, n));
    }
}

json ExternalClient::request(const json& message) {
    transport_->send(encode_message(message));
    return read_message();
}

namespace {

std::optional<std::string> image_path_for(const ExternalOptions& options, std::int64_t frame) {
    if (!options.image_path_pattern) return std::nullopt;
    // Same single-%d convention as the corpus frame patterns.
    const std::string& p = *options.image_path_pattern;
    const std::size_t pos = p.find('%');
    if (pos == std::string::npos)
        throw ConfigError("image path pattern needs a %d conversion: " + p);
    std::string digits = std::to_string(frame);
    std::size_t i = pos + 1;
    bool zero = false;
    int width = 0;
    if (i < p.size() && p[i] == '0') {
        zero = true;
        ++i;
    }
    while (i < p.size() && p[i] >= '0' && p[i] <= '9') width = width * 10 + (p[i++] - '0');
    if (static_cast<int>(digits.size()) < width)
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), zero ? '0' : ' ');
    return p.substr(0, pos) + digits + p.substr(i + 1);
}

class ExternalRecognizer final : public Recognizer {
public:
    ExternalRecognizer(const std::string& endpoint, ExternalOptions options)
        : options_(std::move(options)),
          client_(Endpoint::parse(endpoint).connect(options_.timeout), Role::Recognizer) {}

    ContactPrediction feed(const Frame& frame) override {
        const json reply = client_.request(infer_message(
            frame.frame_index, frame.payload, image_path_for(options_, frame.frame_index)));
        const double confidence = parse_recognizer_result(reply, frame.frame_index);
        return ContactPrediction{frame.frame_index, confidence,
                                 confidence >= options_.recognizer_threshold
                                     ? ContactLabel::Contact
                                     : ContactLabel::Background};
    }

private:
    ExternalOptions options_;
    ExternalClient client_;
};

class ExternalDetector final : public Detector {
public:
    ExternalDetector(const std::string& endpoint, ExternalOptions options)
        : options_(std::move(options)),
          client_(Endpoint::parse(endpoint).connect(options_.timeout), Role::Detector) {}

private:
    std::vector<Detection> do_detect(const Frame& frame) override {
        const json reply = client_.request(infer_message(
            frame.frame_index, frame.payload, image_path_for(options_, frame.frame_index)));
        return parse_detector_result(reply, frame.frame_index);
    }

    ExternalOptions options_;
    ExternalClient client_;
};

}  // namespace

std::unique_ptr<Recognizer> make_external_recognizer(const std::string& endpoint,
                                                     const ExternalOptions& options) {
    return std::make_unique<ExternalRecognizer>(endpoint, options);
}

std::unique_ptr<Detector> make_external_detector(const std::string& endpoint,
                                                 const ExternalOptions& options) {
    return std::make_unique<ExternalDetector>(endpoint, options);
}

}  // namespace egohoi::wire
