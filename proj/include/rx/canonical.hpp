#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rx/bytes.hpp"

namespace rx::canonical {

using Json = nlohmann::json;

class CanonicalError : public std::runtime_error {
public:
    explicit CanonicalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unique byte encoding of a structured value. Supported kinds: maps with string
// keys, arrays, strings, integers, booleans, and byte-strings (emitted as
// base64url without padding). Map keys are ordered by UTF-8 bytes, output has
// no insignificant whitespace, integers print in shortest decimal form.
// Anything else (floats, null) is a CanonicalError.
std::string encode(const Json& value);
Bytes encode_bytes(const Json& value);

// Strict JSON parse for re-reading canonical documents.
Json parse(std::string_view text);

}  // namespace rx::canonical
