#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rx {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

class EncodingError : public std::runtime_error {
public:
    explicit EncodingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Base64url without padding (the textual form of every byte-string in this codebase).
std::string to_base64url(ByteSpan data);
Bytes from_base64url(std::string_view text);

std::string to_hex(ByteSpan data);
Bytes from_hex(std::string_view text);

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string bytes_to_string(ByteSpan b) {
    return std::string(b.begin(), b.end());
}

template <std::size_t N>
std::array<std::uint8_t, N> to_array(ByteSpan data) {
    if (data.size() != N) {
        throw EncodingError("expected " + std::to_string(N) + " bytes, got " +
                            std::to_string(data.size()));
    }
    std::array<std::uint8_t, N> out{};
    std::copy(data.begin(), data.end(), out.begin());
    return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> array_from_base64url(std::string_view text) {
    return to_array<N>(from_base64url(text));
}

}  // namespace rx
