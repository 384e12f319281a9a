#include "viltwin/core/bus.hpp"

#include <algorithm>

#include "viltwin/core/error.hpp"

namespace viltwin {

void MessageBus::advertise(const std::string& topic, MessageKind kind) {
    auto [it, inserted] = topics_.emplace(topic, kind);
    if (!inserted && it->second != kind) {
        throw ValidationError("topic '" + topic + "' already advertised as " + std::string(to_string(it->second)));
    }
}

bool MessageBus::advertised(const std::string& topic) const { return topics_.count(topic) != 0; }

SubscriberId MessageBus::subscribe(const std::string& topic) {
    if (!advertised(topic)) throw UnknownTopicError("cannot subscribe to unknown topic '" + topic + "'");
    const SubscriberId id = queues_.size();
    queues_.emplace_back();
    topic_subscribers_.emplace(topic, id);
    return id;
}

void MessageBus::publish(const std::string& topic, Payload payload) {
    auto it = topics_.find(topic);
    if (it == topics_.end()) throw UnknownTopicError("cannot publish to unknown topic '" + topic + "'");
    if (kind_of(payload) != it->second) {
        throw ValidationError("topic '" + topic + "' carries " + std::string(to_string(it->second)) +
                              ", got " + std::string(to_string(kind_of(payload))));
    }
    Message msg{clock_->now(), topic, std::move(payload)};
    auto [first, last] = topic_subscribers_.equal_range(topic);
    for (auto sub = first; sub != last; ++sub) queues_[sub->second].push_back(msg);
    for (const auto& [id, tap] : taps_) tap(msg);
    log_.push_back({next_seq_++, std::move(msg)});
}

std::size_t MessageBus::add_tap(std::function<void(const Message&)> tap) {
    taps_.emplace(next_tap_, std::move(tap));
    return next_tap_++;
}

void MessageBus::remove_tap(std::size_t id) { taps_.erase(id); }

std::vector<Message> MessageBus::take(SubscriberId id) {
    if (id >= queues_.size()) throw ValidationError("unknown subscriber id");
    std::vector<Message> out(std::make_move_iterator(queues_[id].begin()),
                             std::make_move_iterator(queues_[id].end()));
    queues_[id].clear();
    return out;
}

std::size_t MessageBus::pending(SubscriberId id) const {
    if (id >= queues_.size()) throw ValidationError("unknown subscriber id");
    return queues_[id].size();
}

std::vector<Message> MessageBus::drain(double until) {
    if (until < horizon_) throw ValidationError("drain horizon may not move backwards");
    horizon_ = until;
    // Publish times come from a monotone clock, so the log is already in
    // (t, seq) order; the stable partition keeps that order for the output.
    auto split = std::stable_partition(log_.begin(), log_.end(),
                                       [until](const Logged& l) { return l.msg.t <= until; });
    std::vector<Logged> ready(std::make_move_iterator(log_.begin()), std::make_move_iterator(split));
    log_.erase(log_.begin(), split);
    std::stable_sort(ready.begin(), ready.end(), [](const Logged& a, const Logged& b) {
        return a.msg.t != b.msg.t ? a.msg.t < b.msg.t : a.seq < b.seq;
    });
    std::vector<Message> out;
    out.reserve(ready.size());
    for (auto& l : ready) out.push_back(std::move(l.msg));
    return out;
}

}  // namespace viltwin
