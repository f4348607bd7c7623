#include "rx/bytes.hpp"

#include <sodium.h>

namespace rx {

std::string to_base64url(ByteSpan data) {
    const std::size_t max_len =
        sodium_base64_encoded_len(data.size(), sodium_base64_VARIANT_URLSAFE_NO_PADDING);
    std::string out(max_len, '\0');
    sodium_bin2base64(out.data(), max_len, data.data(), data.size(),
                      sodium_base64_VARIANT_URLSAFE_NO_PADDING);
    out.resize(out.find('\0') == std::string::npos ? out.size() : out.find('\0'));
    return out;
}

Bytes from_base64url(std::string_view text) {
    Bytes out(text.size() == 0 ? 1 : text.size());
    std::size_t written = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &written,
                          &end, sodium_base64_VARIANT_URLSAFE_NO_PADDING) != 0 ||
        end != text.data() + text.size()) {
        throw EncodingError("invalid base64url input");
    }
    out.resize(written);
    return out;
}

std::string to_hex(ByteSpan data) {
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.resize(data.size() * 2);
    return out;
}

Bytes from_hex(std::string_view text) {
    Bytes out(text.size() / 2 + 1);
    std::size_t written = 0;
    const char* end = nullptr;
    if (sodium_hex2bin(out.data(), out.size(), text.data(), text.size(), nullptr, &written,
                       &end) != 0 ||
        end != text.data() + text.size()) {
        throw EncodingError("invalid hex input");
    }
    out.resize(written);
    return out;
}

}  // namespace rx
