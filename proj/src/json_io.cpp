#include "subdiff/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace subdiff {

namespace {

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void write(std::string& out, const nlohmann::ordered_json& v, int depth) {
    using value_t = nlohmann::ordered_json::value_t;
    switch (v.type()) {
        case value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                indent(out, depth + 1);
                out += nlohmann::ordered_json(it.key()).dump();
                out += ": ";
                write(out, it.value(), depth + 1);
            }
            out += '\n';
            indent(out, depth);
            out += '}';
            return;
        }
        case value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool flat = true;
            for (const auto& e : v) flat = flat && !e.is_structured();
            if (flat) {
                out += '[';
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) out += ", ";
                    write(out, v[i], depth + 1);
                }
                out += ']';
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                indent(out, depth + 1);
                write(out, v[i], depth + 1);
            }
            out += '\n';
            indent(out, depth);
            out += ']';
            return;
        }
        case value_t::number_float: {
            const double d = v.get<double>();
            out += std::isfinite(d) ? format_double(d) : "null";
            return;
        }
        default:
            out += v.dump();
            return;
    }
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string dump_json(const nlohmann::ordered_json& doc) {
    std::string out;
    write(out, doc, 0);
    out += '\n';
    return out;
}

}  // namespace subdiff
