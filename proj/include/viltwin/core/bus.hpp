#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "viltwin/core/message.hpp"
#include "viltwin/core/sampling.hpp"

namespace viltwin {

using SubscriberId = std::size_t;

/// In-process publish/subscribe fabric.
///
/// Every publish is stamped with the clock's current time and a global
/// sequence number. Each subscriber owns an unbounded FIFO queue; the bus also
/// keeps a log of all traffic that `drain` hands out in (t, sequence) order,
/// which is what the bag recorder consumes.
///
/// Single-threaded: only the engine thread may call into the bus.
class MessageBus {
public:
    explicit MessageBus(const SimClock& clock) : clock_(&clock) {}

    /// Declares a topic. Re-advertising with the same kind is a no-op; a
    /// different kind throws ValidationError.
    void advertise(const std::string& topic, MessageKind kind);
    bool advertised(const std::string& topic) const;

    /// Throws UnknownTopicError if the topic was never advertised.
    SubscriberId subscribe(const std::string& topic);

    /// Throws UnknownTopicError for an unadvertised topic and ValidationError
    /// when the payload kind differs from the advertised one.
    void publish(const std::string& topic, Payload payload);

    /// Removes and returns everything queued for one subscriber, oldest first.
    std::vector<Message> take(SubscriberId id);
    std::size_t pending(SubscriberId id) const;

    /// All logged messages with t <= until, sorted by (t, publish sequence).
    /// `until` may not move backwards past an earlier drain horizon.
    std::vector<Message> drain(double until);

    /// Observer called synchronously on every publish (the bridge uses this).
    std::size_t add_tap(std::function<void(const Message&)> tap);
    void remove_tap(std::size_t id);

    const SimClock& clock() const noexcept { return *clock_; }
    std::uint64_t published_count() const noexcept { return next_seq_; }

private:
    struct Logged {
        std::uint64_t seq;
        Message msg;
    };

    const SimClock* clock_;
    std::map<std::string, MessageKind> topics_;
    std::multimap<std::string, SubscriberId> topic_subscribers_;
    std::vector<std::deque<Message>> queues_;
    std::vector<Logged> log_;
    std::map<std::size_t, std::function<void(const Message&)>> taps_;
    std::size_t next_tap_ = 0;
    std::uint64_t next_seq_ = 0;
    double horizon_ = -1.0;
};

}  // namespace viltwin
