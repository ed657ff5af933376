#include "tiltcheck/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tiltcheck::json {

std::string format_double(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Value Value::array() {
    Value v;
    v.kind_ = Kind::Array;
    return v;
}

Value Value::object() {
    Value v;
    v.kind_ = Kind::Object;
    return v;
}

Value& Value::operator[](const std::string& key) {
    if (kind_ == Kind::Null) kind_ = Kind::Object;
    if (kind_ != Kind::Object) throw std::logic_error("json: not an object");
    return obj_[key];
}

void Value::push_back(Value v) {
    if (kind_ == Kind::Null) kind_ = Kind::Array;
    if (kind_ != Kind::Array) throw std::logic_error("json: not an array");
    arr_.push_back(std::move(v));
}

namespace {

void write_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void pad(std::string& out, int indent, int depth) {
    if (indent <= 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent) * depth, ' ');
}

}  // namespace

void Value::write(std::string& out, int indent, int depth) const {
    switch (kind_) {
        case Kind::Null: out += "null"; break;
        case Kind::Bool: out += bool_ ? "true" : "false"; break;
        case Kind::Int: out += std::to_string(int_); break;
        case Kind::Double: out += format_double(num_); break;
        case Kind::String: write_escaped(out, str_); break;
        case Kind::Array: {
            out += '[';
            bool first = true;
            for (const Value& v : arr_) {
                if (!first) out += ',';
                first = false;
                pad(out, indent, depth + 1);
                v.write(out, indent, depth + 1);
            }
            if (!arr_.empty()) pad(out, indent, depth);
            out += ']';
            break;
        }
        case Kind::Object: {
            out += '{';
            bool first = true;
            for (const auto& [k, v] : obj_) {
                if (!first) out += ',';
                first = false;
                pad(out, indent, depth + 1);
                write_escaped(out, k);
                out += indent > 0 ? ": " : ":";
                v.write(out, indent, depth + 1);
            }
            if (!obj_.empty()) pad(out, indent, depth);
            out += '}';
            break;
        }
    }
}

std::string Value::dump() const {
    std::string out;
    write(out, 0, 0);
    return out;
}

std::string Value::pretty() const {
    std::string out;
    write(out, 2, 0);
    out += '\n';
    return out;
}

}  // namespace tiltcheck::json
