#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "nehari/errors.hpp"

namespace nehari {

using Json = nlohmann::ordered_json;

namespace detail {

inline void dump_value(std::ostream& os, const Json& j, int indent);

inline void dump_number(std::ostream& os, double v) {
    // Report floats carry 17 significant digits so identical runs produce
    // byte-identical files. Non-finite values become strings.
    if (std::isnan(v)) {
        os << "\"nan\"";
        return;
    }
    if (std::isinf(v)) {
        os << (v > 0 ? "\"inf\"" : "\"-inf\"");
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

inline void dump_string(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
        switch (c) {
            case '"': os << "\\\""; break;
            case '\\': os << "\\\\"; break;
            case '\n': os << "\\n"; break;
            case '\t': os << "\\t"; break;
            default: os << c;
        }
    }
    os << '"';
}

inline void pad(std::ostream& os, int indent) {
    for (int i = 0; i < indent; ++i) os << ' ';
}

inline void dump_value(std::ostream& os, const Json& j, int indent) {
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            std::size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                pad(os, indent + 2);
                dump_string(os, it.key());
                os << ": ";
                dump_value(os, it.value(), indent + 2);
                if (k + 1 < j.size()) os << ',';
                os << '\n';
            }
            pad(os, indent);
            os << '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                pad(os, indent + 2);
                dump_value(os, j[k], indent + 2);
                if (k + 1 < j.size()) os << ',';
                os << '\n';
            }
            pad(os, indent);
            os << ']';
            return;
        }
        case Json::value_t::string: dump_string(os, j.get<std::string>()); return;
        case Json::value_t::boolean: os << (j.get<bool>() ? "true" : "false"); return;
        case Json::value_t::number_integer: os << j.get<long long>(); return;
        case Json::value_t::number_unsigned: os << j.get<unsigned long long>(); return;
        case Json::value_t::number_float: dump_number(os, j.get<double>()); return;
        default: os << "null"; return;
    }
}

} // namespace detail

inline void write_report(std::ostream& os, const Json& j) {
    detail::dump_value(os, j, 0);
    os << '\n';
}

inline void write_report(const std::string& path, const Json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    write_report(os, j);
}

inline std::string report_string(const Json& j) {
    std::ostringstream os;
    write_report(os, j);
    return os.str();
}

} // namespace nehari
