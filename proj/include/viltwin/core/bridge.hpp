#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "viltwin/core/bus.hpp"

namespace viltwin {

/// A message received from an external target, not yet stamped.
struct InboundMessage {
    std::size_t session = 0;
    std::string topic;
    Payload payload;
};

/// TCP bridge that exposes the bus to external processes.
///
/// Wire protocol: newline-delimited JSON.
///   client -> server  {"op":"sub","topic":T}
///                     {"op":"pub","topic":T,"kind":K,"data":{...}}
///   server -> client  {"op":"msg","t":..,"topic":T,"kind":K,"data":{...}}
///                     {"op":"tick","t":..}
///
/// Listener and per-session reader threads only parse and enqueue. Everything
/// that touches the bus (`pump`, the publish tap, `tick`) runs on the engine
/// thread; inbound messages are stamped with the sim clock when pumped.
/// A malformed line closes that session and is recorded in `diagnostics()`.
class BridgeServer {
public:
    /// Listens on 127.0.0.1:`port` (0 picks a free port). Throws IoError if
    /// the port cannot be bound.
    BridgeServer(MessageBus& bus, std::uint16_t port);
    ~BridgeServer();

    BridgeServer(const BridgeServer&) = delete;
    BridgeServer& operator=(const BridgeServer&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    /// Publishes all queued inbound messages, in arrival order. Returns the
    /// number published.
    std::size_t pump();

    /// Sends a tick record to every open session.
    void tick(double t);

    /// Blocks until some open session subscribes to `topic`.
    bool wait_for_subscriber(const std::string& topic, std::chrono::milliseconds timeout);

    /// Blocks until a queued inbound message satisfies `pred`. Returns false
    /// on timeout, or as soon as no session is left open and nothing queued
    /// matches.
    bool wait_for_inbound(const std::function<bool(const InboundMessage&)>& pred,
                          std::chrono::milliseconds timeout);

    std::size_t open_sessions() const;
    std::vector<std::string> diagnostics() const;

private:
    struct Session;

    void accept_loop(std::stop_token stop);
    void read_loop(Session& session);
    void handle_line(Session& session, const std::string& line);
    void close_session(Session& session, const std::string& reason);
    void forward(const Message& msg);
    void send_line(Session& session, const std::string& line);

    MessageBus& bus_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::size_t tap_ = 0;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::vector<std::unique_ptr<Session>> sessions_;
    std::deque<InboundMessage> inbound_;
    std::vector<std::string> diagnostics_;

    std::jthread acceptor_;
};

/// Event delivered to a bridge client.
struct BridgeEvent {
    enum class Type { message, tick, closed };
    Type type = Type::closed;
    double t = 0.0;
    std::optional<Message> message;
};

/// Client side of the bridge protocol, used by external targets and tests.
class BridgeClient {
public:
    /// Throws IoError when the connection is refused.
    static BridgeClient connect(const std::string& host, std::uint16_t port);

    BridgeClient(BridgeClient&& other) noexcept;
    BridgeClient& operator=(BridgeClient&& other) noexcept;
    BridgeClient(const BridgeClient&) = delete;
    BridgeClient& operator=(const BridgeClient&) = delete;
    ~BridgeClient();

    void subscribe(const std::string& topic);
    void publish(const std::string& topic, const Payload& payload);
    /// Sends one raw line (a newline is appended).
    void send_raw(const std::string& line);

    /// Next event, or nullopt on timeout. Returns a `closed` event once the
    /// server hangs up. Throws ProtocolError for a malformed server line.
    std::optional<BridgeEvent> receive(std::chrono::milliseconds timeout);

    void close();
    bool is_open() const noexcept { return fd_ >= 0; }

private:
    explicit BridgeClient(int fd) : fd_(fd) {}

    int fd_ = -1;
    std::string buffer_;
};

}  // namespace viltwin
