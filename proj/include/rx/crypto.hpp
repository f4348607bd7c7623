#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include "rx/bytes.hpp"
#include "rx/canonical.hpp"

namespace rx::crypto {

// Must run before any other call in this namespace; safe to call repeatedly.
void init();

class TamperError : public std::runtime_error {
public:
    explicit TamperError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PublicKey {
    std::array<std::uint8_t, 32> bytes{};

    static PublicKey from_bytes(ByteSpan raw);
    static PublicKey from_base64url(std::string_view text);
    std::string to_base64url() const { return rx::to_base64url(bytes); }

    auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
    std::array<std::uint8_t, 64> bytes{};

    static Signature from_bytes(ByteSpan raw);
    static Signature from_base64url(std::string_view text);
    std::string to_base64url() const { return rx::to_base64url(bytes); }

    auto operator<=>(const Signature&) const = default;
};

struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    static Digest from_bytes(ByteSpan raw);
    static Digest from_base64url(std::string_view text);
    std::string to_base64url() const { return rx::to_base64url(bytes); }
    std::string to_hex() const { return rx::to_hex(bytes); }

    auto operator<=>(const Digest&) const = default;
};

using Seed = std::array<std::uint8_t, 32>;
using Salt = std::array<std::uint8_t, 16>;
using ChannelKey = std::array<std::uint8_t, 32>;
using AeadNonce = std::array<std::uint8_t, 12>;
using ChannelNonce = std::array<std::uint8_t, 32>;

// Ed25519 keypair. The 32-byte seed is the serialized secret; the expanded
// form is cached so repeated signing does not re-derive it.
class KeyPair {
public:
    static KeyPair from_seed(const Seed& seed);

    const Seed& seed() const { return seed_; }
    const PublicKey& public_key() const { return public_key_; }
    ByteSpan expanded_secret() const { return expanded_; }

private:
    Seed seed_{};
    PublicKey public_key_{};
    std::array<std::uint8_t, 64> expanded_{};
};

KeyPair keygen(const Seed& seed);

Signature sign(const KeyPair& signer, ByteSpan message);

// Deterministic. Throws EncodingError if key or signature bytes are malformed
// (wrong length) — distinct from returning false.
bool verify(const PublicKey& key, ByteSpan message, const Signature& sig);
bool verify(ByteSpan key, ByteSpan message, ByteSpan sig);

Digest hash(ByteSpan data);
Digest hash(std::string_view data);

struct SaltedCommitment {
    Salt salt{};
    Digest value_digest{};
};

// value_digest = hash(canonical([name, value, base64url(salt)])).
SaltedCommitment commit(std::string_view name, std::string_view value, const Salt& salt);
Digest commitment_digest(std::string_view name, std::string_view value, const Salt& salt);

// ChaCha20-Poly1305 (IETF, 12-byte nonce). Tag appended to the ciphertext.
Bytes seal(const ChannelKey& key, const AeadNonce& nonce, ByteSpan plaintext,
           ByteSpan associated_data = {});
Bytes open(const ChannelKey& key, const AeadNonce& nonce, ByteSpan ciphertext,
           ByteSpan associated_data = {});

// Anonymous sealed box to an Ed25519 identity (used for handshake messages
// before a channel key exists).
Bytes sealed_box_seal(const PublicKey& recipient, ByteSpan plaintext);
Bytes sealed_box_open(const KeyPair& recipient, ByteSpan ciphertext);

// X25519 ephemeral exchange for channel establishment.
struct EphemeralKey {
    std::array<std::uint8_t, 32> public_key{};
    std::array<std::uint8_t, 32> secret_key{};
};

class Rng;
EphemeralKey make_ephemeral(Rng& rng);
std::array<std::uint8_t, 32> dh(const EphemeralKey& mine, const std::array<std::uint8_t, 32>& their_public);
ChannelKey derive_channel_key(const std::array<std::uint8_t, 32>& shared,
                              const ChannelNonce& inviter_nonce,
                              const ChannelNonce& responder_nonce);

// Entropy source. Simulation injects SeededRng for reproducible runs;
// production uses SystemRng (OS entropy via libsodium).
class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Seed seed32();
    Salt salt16();
    AeadNonce nonce12();
    ChannelNonce nonce32();
    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();
    // Uniform in [0, bound). bound must be nonzero.
    std::uint64_t below(std::uint64_t bound);
};

class SystemRng : public Rng {
public:
    void fill(std::span<std::uint8_t> out) override;
};

class SeededRng : public Rng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
    void fill(std::span<std::uint8_t> out) override;

private:
    std::mt19937_64 engine_;
};

}  // namespace rx::crypto
