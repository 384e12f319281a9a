#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "viltwin/core/message.hpp"

namespace viltwin {

struct BagMetadata {
    std::uint64_t seed = 0;
    std::string scenario;
    int version = 1;
    /// Free-form creation stamp. Left empty by the engine so that bags stay a
    /// pure function of their inputs; written only when non-empty.
    std::string created;
    friend bool operator==(const BagMetadata&, const BagMetadata&) = default;
};

/// Append-only log of message traffic.
///
/// File format: UTF-8 text, one JSON object per line. Line 1 holds the
/// metadata {"seed", "scenario", "version"[, "created"]}; every further line
/// is {"t", "topic", "kind", "data"}. Floats carry 17 significant digits.
struct Bag {
    BagMetadata metadata;
    std::vector<Message> messages;
    friend bool operator==(const Bag&, const Bag&) = default;
};

/// Serialized text of a whole bag (what bag_write puts on disk).
std::string bag_to_string(const Bag& bag);
std::string bag_record_line(const Message& msg);

/// Throws IoError when the file cannot be written.
void bag_write(const Bag& bag, const std::filesystem::path& path);

/// Throws IoError when the file cannot be opened and ParseError (with the
/// 1-based line number) for malformed records or out-of-order timestamps.
Bag bag_read(const std::filesystem::path& path);
Bag bag_parse(std::istream& in);

/// Streams a bag to disk, flushing after every batch so that an aborted run
/// still leaves a readable prefix.
class BagWriter {
public:
    BagWriter(const std::filesystem::path& path, const BagMetadata& metadata);

    void append(const Message& msg);
    void append(const std::vector<Message>& msgs);

private:
    std::ofstream out_;
    std::filesystem::path path_;
    double last_t_ = 0.0;
};

}  // namespace viltwin
