#include "viltwin/core/bag.hpp"

#include <cmath>
#include <sstream>

#include "viltwin/core/error.hpp"
#include "viltwin/core/json_text.hpp"

namespace viltwin {

using nlohmann::json;

namespace {

std::string metadata_line(const BagMetadata& meta) {
    json j = {{"seed", meta.seed}, {"scenario", meta.scenario}, {"version", meta.version}};
    if (!meta.created.empty()) j["created"] = meta.created;
    return to_json_line(j);
}

BagMetadata parse_metadata(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(1, std::string("malformed metadata: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(1, "metadata must be a JSON object");
    BagMetadata meta;
    try {
        const auto& seed = j.at("seed");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
            throw ParseError(1, "metadata 'seed' must be a non-negative integer");
        }
        meta.seed = seed.get<std::uint64_t>();
        meta.scenario = j.at("scenario").get<std::string>();
        meta.version = j.at("version").get<int>();
        if (auto it = j.find("created"); it != j.end()) meta.created = it->get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(1, std::string("bad metadata: ") + e.what());
    }
    if (meta.version != 1) throw ParseError(1, "unsupported bag version " + std::to_string(meta.version));
    return meta;
}

Message parse_record(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(line_no, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record must be a JSON object");
    try {
        const auto& t = j.at("t");
        if (!t.is_number()) throw ParseError(line_no, "field 't' must be a number");
        Message msg;
        msg.t = t.get<double>();
        if (!std::isfinite(msg.t)) throw ParseError(line_no, "field 't' must be finite");
        msg.topic = j.at("topic").get<std::string>();
        const MessageKind kind = message_kind_from_string(j.at("kind").get<std::string>());
        msg.payload = payload_from_json(kind, j.at("data"));
        return msg;
    } catch (const ParseError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ParseError(line_no, e.what());
    } catch (const json::exception& e) {
        throw ParseError(line_no, e.what());
    }
}

}  // namespace

std::string bag_record_line(const Message& msg) {
    return to_json_line(json{{"t", msg.t},
                             {"topic", msg.topic},
                             {"kind", to_string(msg.kind())},
                             {"data", payload_to_json(msg.payload)}});
}

std::string bag_to_string(const Bag& bag) {
    std::string out = metadata_line(bag.metadata);
    out += '\n';
    for (const auto& m : bag.messages) {
        out += bag_record_line(m);
        out += '\n';
    }
    return out;
}

void bag_write(const Bag& bag, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << bag_to_string(bag);
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Bag bag_parse(std::istream& in) {
    Bag bag;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing metadata line");
    bag.metadata = parse_metadata(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(line_no, "empty record");
        Message msg = parse_record(line, line_no);
        if (!bag.messages.empty() && msg.t < bag.messages.back().t) {
            throw ParseError(line_no, "timestamp goes backwards");
        }
        bag.messages.push_back(std::move(msg));
    }
    return bag;
}

Bag bag_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return bag_parse(in);
}

BagWriter::BagWriter(const std::filesystem::path& path, const BagMetadata& metadata)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    out_ << metadata_line(metadata) << '\n';
    out_.flush();
}

void BagWriter::append(const Message& msg) {
    if (msg.t < last_t_) throw ValidationError("bag records must be appended in time order");
    last_t_ = msg.t;
    out_ << bag_record_line(msg) << '\n';
    out_.flush();
    if (!out_) throw IoError("write to '" + path_.string() + "' failed");
}

void BagWriter::append(const std::vector<Message>& msgs) {
    for (const auto& m : msgs) {
        if (m.t < last_t_) throw ValidationError("bag records must be appended in time order");
        last_t_ = m.t;
        out_ << bag_record_line(m) << '\n';
    }
    out_.flush();
    if (!out_) throw IoError("write to '" + path_.string() + "' failed");
}

}  // namespace viltwin
