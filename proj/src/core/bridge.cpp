#include "viltwin/core/bridge.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>

#include "viltwin/core/error.hpp"
#include "viltwin/core/json_text.hpp"

namespace viltwin {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

bool send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

std::string msg_record(const Message& msg) {
    return to_json_line(json{{"op", "msg"},
                             {"t", msg.t},
                             {"topic", msg.topic},
                             {"kind", to_string(msg.kind())},
                             {"data", payload_to_json(msg.payload)}});
}

}  // namespace

struct BridgeServer::Session {
    std::size_t id = 0;
    int fd = -1;
    bool open = true;                 // guarded by BridgeServer::mu_
    std::set<std::string> topics;     // guarded by BridgeServer::mu_
    std::mutex write_mu;
    std::jthread reader;
};

BridgeServer::BridgeServer(MessageBus& bus, std::uint16_t port) : bus_(bus) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 8) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw IoError("cannot listen on port " + std::to_string(port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    tap_ = bus_.add_tap([this](const Message& msg) { forward(msg); });
    acceptor_ = std::jthread([this](std::stop_token stop) { accept_loop(stop); });
}

BridgeServer::~BridgeServer() {
    bus_.remove_tap(tap_);
    acceptor_.request_stop();
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    std::vector<Session*> all;
    {
        std::lock_guard lock(mu_);
        for (auto& s : sessions_) {
            s->open = false;
            ::shutdown(s->fd, SHUT_RDWR);
            all.push_back(s.get());
        }
    }
    for (Session* s : all) {
        if (s->reader.joinable()) s->reader.join();
        ::close(s->fd);
    }
}

void BridgeServer::accept_loop(std::stop_token stop) {
    while (!stop.stop_requested()) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 50);
        if (ready <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        set_nodelay(fd);
        std::lock_guard lock(mu_);
        auto session = std::make_unique<Session>();
        session->id = sessions_.size();
        session->fd = fd;
        Session& ref = *session;
        sessions_.push_back(std::move(session));
        ref.reader = std::jthread([this, &ref] { read_loop(ref); });
        cv_.notify_all();
    }
}

void BridgeServer::read_loop(Session& session) {
    std::string buffer;
    char chunk[4096];
    for (;;) {
        const ssize_t n = ::recv(session.fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
            handle_line(session, buffer.substr(start, nl - start));
            std::lock_guard lock(mu_);
            if (!session.open) return;
        }
        buffer.erase(0, start);
        if (buffer.size() > kMaxLine) {
            close_session(session, "line exceeds " + std::to_string(kMaxLine) + " bytes");
            return;
        }
    }
    std::lock_guard lock(mu_);
    if (session.open) {
        session.open = false;
        diagnostics_.push_back("session " + std::to_string(session.id) + ": client disconnected");
    }
    cv_.notify_all();
}

void BridgeServer::handle_line(Session& session, const std::string& raw) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
        const json j = json::parse(line);
        if (!j.is_object()) throw ProtocolError("record must be a JSON object");
        const auto op = j.find("op");
        const auto topic = j.find("topic");
        if (op == j.end() || !op->is_string()) throw ProtocolError("missing 'op'");
        if (topic == j.end() || !topic->is_string()) throw ProtocolError("missing 'topic'");
        if (*op == "sub") {
            std::lock_guard lock(mu_);
            session.topics.insert(topic->get<std::string>());
            cv_.notify_all();
        } else if (*op == "pub") {
            const auto kind = j.find("kind");
            const auto data = j.find("data");
            if (kind == j.end() || !kind->is_string()) throw ProtocolError("missing 'kind'");
            if (data == j.end()) throw ProtocolError("missing 'data'");
            Payload payload = payload_from_json(message_kind_from_string(kind->get<std::string>()), *data);
            std::lock_guard lock(mu_);
            inbound_.push_back({session.id, topic->get<std::string>(), std::move(payload)});
            cv_.notify_all();
        } else {
            throw ProtocolError("unknown op '" + op->get<std::string>() + "'");
        }
    } catch (const json::exception& e) {
        close_session(session, std::string("malformed line: ") + e.what());
    } catch (const Error& e) {
        close_session(session, std::string("protocol violation: ") + e.what());
    }
}

void BridgeServer::close_session(Session& session, const std::string& reason) {
    {
        std::lock_guard lock(mu_);
        if (!session.open) return;
        session.open = false;
        diagnostics_.push_back("session " + std::to_string(session.id) + ": " + reason);
        cv_.notify_all();
    }
    std::cerr << "viltwin bridge: session " << session.id << " closed: " << reason << '\n';
    ::shutdown(session.fd, SHUT_RDWR);
}

void BridgeServer::send_line(Session& session, const std::string& line) {
    bool ok;
    {
        std::lock_guard wl(session.write_mu);
        ok = send_all(session.fd, line + '\n');
    }
    if (!ok) close_session(session, "write failed");
}

void BridgeServer::forward(const Message& msg) {
    std::vector<Session*> targets;
    {
        std::lock_guard lock(mu_);
        for (auto& s : sessions_) {
            if (s->open && s->topics.count(msg.topic)) targets.push_back(s.get());
        }
    }
    if (targets.empty()) return;
    const std::string line = msg_record(msg);
    for (Session* s : targets) send_line(*s, line);
}

void BridgeServer::tick(double t) {
    std::vector<Session*> targets;
    {
        std::lock_guard lock(mu_);
        for (auto& s : sessions_) {
            if (s->open) targets.push_back(s.get());
        }
    }
    const std::string line = to_json_line(json{{"op", "tick"}, {"t", t}});
    for (Session* s : targets) send_line(*s, line);
}

std::size_t BridgeServer::pump() {
    std::deque<InboundMessage> batch;
    {
        std::lock_guard lock(mu_);
        batch.swap(inbound_);
    }
    std::size_t published = 0;
    for (auto& in : batch) {
        Session* origin = nullptr;
        {
            std::lock_guard lock(mu_);
            if (in.session < sessions_.size()) origin = sessions_[in.session].get();
        }
        try {
            bus_.publish(in.topic, std::move(in.payload));
            ++published;
        } catch (const ValidationError& e) {
            if (origin) close_session(*origin, std::string("rejected publish: ") + e.what());
        }
    }
    return published;
}

bool BridgeServer::wait_for_subscriber(const std::string& topic, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] {
        for (const auto& s : sessions_) {
            if (s->open && s->topics.count(topic)) return true;
        }
        return false;
    });
}

bool BridgeServer::wait_for_inbound(const std::function<bool(const InboundMessage&)>& pred,
                                    std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    bool found = false;
    cv_.wait_for(lock, timeout, [&] {
        for (const auto& in : inbound_) {
            if (pred(in)) {
                found = true;
                return true;
            }
        }
        // Give up early only once every accepted session has closed.
        if (sessions_.empty()) return false;
        for (const auto& s : sessions_) {
            if (s->open) return false;
        }
        return true;
    });
    return found;
}

std::size_t BridgeServer::open_sessions() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& s : sessions_) n += s->open ? 1 : 0;
    return n;
}

std::vector<std::string> BridgeServer::diagnostics() const {
    std::lock_guard lock(mu_);
    return diagnostics_;
}

// ---------------------------------------------------------------------------

BridgeClient BridgeClient::connect(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
        throw IoError("cannot resolve host '" + host + "'");
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw IoError(std::string("socket: ") + std::strerror(errno));
    }
    const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc < 0) {
        const std::string err = std::strerror(errno);
        ::close(fd);
        throw IoError("connect to " + host + ":" + std::to_string(port) + " failed: " + err);
    }
    set_nodelay(fd);
    return BridgeClient(fd);
}

BridgeClient::BridgeClient(BridgeClient&& other) noexcept : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
    other.fd_ = -1;
}

BridgeClient& BridgeClient::operator=(BridgeClient&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        buffer_ = std::move(other.buffer_);
        other.fd_ = -1;
    }
    return *this;
}

BridgeClient::~BridgeClient() { close(); }

void BridgeClient::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void BridgeClient::send_raw(const std::string& line) {
    if (fd_ < 0) throw IoError("bridge client is closed");
    if (!send_all(fd_, line + '\n')) throw IoError(std::string("bridge send failed: ") + std::strerror(errno));
}

void BridgeClient::subscribe(const std::string& topic) {
    send_raw(to_json_line(json{{"op", "sub"}, {"topic", topic}}));
}

void BridgeClient::publish(const std::string& topic, const Payload& payload) {
    send_raw(to_json_line(
        json{{"op", "pub"}, {"topic", topic}, {"kind", to_string(kind_of(payload))}, {"data", payload_to_json(payload)}}));
}

std::optional<BridgeEvent> BridgeClient::receive(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            const std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            try {
                const json j = json::parse(line);
                BridgeEvent ev;
                ev.t = j.at("t").get<double>();
                const std::string op = j.at("op").get<std::string>();
                if (op == "tick") {
                    ev.type = BridgeEvent::Type::tick;
                } else if (op == "msg") {
                    ev.type = BridgeEvent::Type::message;
                    const MessageKind kind = message_kind_from_string(j.at("kind").get<std::string>());
                    ev.message = Message{ev.t, j.at("topic").get<std::string>(), payload_from_json(kind, j.at("data"))};
                } else {
                    throw ProtocolError("unknown op '" + op + "'");
                }
                return ev;
            } catch (const json::exception& e) {
                throw ProtocolError(std::string("malformed server line: ") + e.what());
            } catch (const ValidationError& e) {
                throw ProtocolError(std::string("malformed server line: ") + e.what());
            }
        }
        if (fd_ < 0) return BridgeEvent{};
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) return std::nullopt;
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(1, left.count())));
        if (ready < 0 && errno == EINTR) continue;
        if (ready <= 0) continue;
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            close();
            return BridgeEvent{};
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace viltwin
