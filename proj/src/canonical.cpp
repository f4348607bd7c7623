#include "rx/canonical.hpp"

#include <cstdio>

namespace rx::canonical {
namespace {

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len;
        if (c < 0x80) {
            len = 1;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            len = 2;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            len = 4;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        // Reject overlong / surrogate ranges.
        if (len == 3) {
            const auto c1 = static_cast<unsigned char>(s[i + 1]);
            if ((c == 0xE0 && c1 < 0xA0) || (c == 0xED && c1 >= 0xA0)) return false;
        }
        if (len == 4) {
            const auto c1 = static_cast<unsigned char>(s[i + 1]);
            if ((c == 0xF0 && c1 < 0x90) || (c == 0xF4 && c1 >= 0x90)) return false;
        }
        i += len;
    }
    return true;
}

void write_string(const std::string& s, std::string& out) {
    if (!valid_utf8(s)) throw CanonicalError("string is not valid UTF-8");
    out += '"';
    for (const char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

void write_value(const Json& v, std::string& out) {
    switch (v.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            // nlohmann's default object is a std::map keyed by std::string, so
            // iteration order is already lexicographic by UTF-8 bytes.
            for (const auto& [key, val] : v.items()) {
                if (!first) out += ',';
                first = false;
                write_string(key, out);
                out += ':';
                write_value(val, out);
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ',';
                first = false;
                write_value(item, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::string:
            write_string(v.get_ref<const std::string&>(), out);
            break;
        case Json::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            break;
        case Json::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            break;
        case Json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case Json::value_t::binary:
            write_string(to_base64url(v.get_binary()), out);
            break;
        case Json::value_t::number_float:
            throw CanonicalError("floating point values are not canonicalizable");
        case Json::value_t::null:
            throw CanonicalError("null is not canonicalizable");
        default:
            throw CanonicalError("unsupported value kind");
    }
}

}  // namespace

std::string encode(const Json& value) {
    std::string out;
    write_value(value, out);
    return out;
}

Bytes encode_bytes(const Json& value) {
    const std::string s = encode(value);
    return Bytes(s.begin(), s.end());
}

Json parse(std::string_view text) {
    Json v = Json::parse(text, nullptr, false);
    if (v.is_discarded()) throw CanonicalError("malformed JSON");
    return v;
}

}  // namespace rx::canonical
