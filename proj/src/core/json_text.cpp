#include "viltwin/core/json_text.hpp"

#include <cmath>
#include <cstdio>

#include "viltwin/core/error.hpp"

namespace viltwin {

namespace {

void write(const nlohmann::json& v, std::string& out) {
    using value_t = nlohmann::json::value_t;
    switch (v.type()) {
        case value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                write(it.value(), out);
            }
            out += '}';
            break;
        }
        case value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ',';
                first = false;
                write(e, out);
            }
            out += ']';
            break;
        }
        case value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw ValidationError("cannot serialize a non-finite number");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            out += buf;
            break;
        }
        default:
            out += v.dump();
            break;
    }
}

}  // namespace

std::string to_json_line(const nlohmann::json& value) {
    std::string out;
    write(value, out);
    return out;
}

}  // namespace viltwin
