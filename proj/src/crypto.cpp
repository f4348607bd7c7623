#include "rx/crypto.hpp"

#include <cstring>
#include <mutex>

#include <sodium.h>

namespace rx::crypto {

void init() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

PublicKey PublicKey::from_bytes(ByteSpan raw) {
    return PublicKey{to_array<32>(raw)};
}

PublicKey PublicKey::from_base64url(std::string_view text) {
    return PublicKey{array_from_base64url<32>(text)};
}

Signature Signature::from_bytes(ByteSpan raw) {
    return Signature{to_array<64>(raw)};
}

Signature Signature::from_base64url(std::string_view text) {
    return Signature{array_from_base64url<64>(text)};
}

Digest Digest::from_bytes(ByteSpan raw) {
    return Digest{to_array<32>(raw)};
}

Digest Digest::from_base64url(std::string_view text) {
    return Digest{array_from_base64url<32>(text)};
}

KeyPair KeyPair::from_seed(const Seed& seed) {
    init();
    KeyPair kp;
    kp.seed_ = seed;
    if (crypto_sign_seed_keypair(kp.public_key_.bytes.data(), kp.expanded_.data(),
                                 seed.data()) != 0) {
        throw std::runtime_error("keypair derivation failed");
    }
    return kp;
}

KeyPair keygen(const Seed& seed) {
    return KeyPair::from_seed(seed);
}

Signature sign(const KeyPair& signer, ByteSpan message) {
    init();
    Signature sig;
    if (crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                             signer.expanded_secret().data()) != 0) {
        throw std::runtime_error("signing failed");
    }
    return sig;
}

bool verify(const PublicKey& key, ByteSpan message, const Signature& sig) {
    init();
    return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                       key.bytes.data()) == 0;
}

bool verify(ByteSpan key, ByteSpan message, ByteSpan sig) {
    if (key.size() != 32) throw EncodingError("public key must be 32 bytes");
    if (sig.size() != 64) throw EncodingError("signature must be 64 bytes");
    return verify(PublicKey::from_bytes(key), message, Signature::from_bytes(sig));
}

Digest hash(ByteSpan data) {
    init();
    Digest out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

Digest hash(std::string_view data) {
    return hash(ByteSpan(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Digest commitment_digest(std::string_view name, std::string_view value, const Salt& salt) {
    const canonical::Json payload =
        canonical::Json::array({std::string(name), std::string(value), to_base64url(salt)});
    return hash(canonical::encode(payload));
}

SaltedCommitment commit(std::string_view name, std::string_view value, const Salt& salt) {
    return SaltedCommitment{salt, commitment_digest(name, value, salt)};
}

Bytes seal(const ChannelKey& key, const AeadNonce& nonce, ByteSpan plaintext,
           ByteSpan associated_data) {
    init();
    Bytes out(plaintext.size() + crypto_aead_chacha20poly1305_ietf_ABYTES);
    unsigned long long written = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &written, plaintext.data(),
                                              plaintext.size(), associated_data.data(),
                                              associated_data.size(), nullptr, nonce.data(),
                                              key.data());
    out.resize(written);
    return out;
}

Bytes open(const ChannelKey& key, const AeadNonce& nonce, ByteSpan ciphertext,
           ByteSpan associated_data) {
    init();
    if (ciphertext.size() < crypto_aead_chacha20poly1305_ietf_ABYTES) {
        throw TamperError("ciphertext too short");
    }
    Bytes out(ciphertext.size() - crypto_aead_chacha20poly1305_ietf_ABYTES);
    unsigned long long written = 0;
    if (crypto_aead_chacha20poly1305_ietf_decrypt(out.data(), &written, nullptr,
                                                  ciphertext.data(), ciphertext.size(),
                                                  associated_data.data(), associated_data.size(),
                                                  nonce.data(), key.data()) != 0) {
        throw TamperError("authenticated decryption failed");
    }
    out.resize(written);
    return out;
}

Bytes sealed_box_seal(const PublicKey& recipient, ByteSpan plaintext) {
    init();
    std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> curve_pk{};
    if (crypto_sign_ed25519_pk_to_curve25519(curve_pk.data(), recipient.bytes.data()) != 0) {
        throw EncodingError("public key is not convertible to curve25519");
    }
    Bytes out(plaintext.size() + crypto_box_SEALBYTES);
    if (crypto_box_seal(out.data(), plaintext.data(), plaintext.size(), curve_pk.data()) != 0) {
        throw std::runtime_error("sealed box encryption failed");
    }
    return out;
}

Bytes sealed_box_open(const KeyPair& recipient, ByteSpan ciphertext) {
    init();
    if (ciphertext.size() < crypto_box_SEALBYTES) throw TamperError("sealed box too short");
    std::array<std::uint8_t, crypto_box_PUBLICKEYBYTES> curve_pk{};
    std::array<std::uint8_t, crypto_box_SECRETKEYBYTES> curve_sk{};
    if (crypto_sign_ed25519_pk_to_curve25519(curve_pk.data(),
                                             recipient.public_key().bytes.data()) != 0 ||
        crypto_sign_ed25519_sk_to_curve25519(curve_sk.data(),
                                             recipient.expanded_secret().data()) != 0) {
        throw EncodingError("key is not convertible to curve25519");
    }
    Bytes out(ciphertext.size() - crypto_box_SEALBYTES);
    if (crypto_box_seal_open(out.data(), ciphertext.data(), ciphertext.size(), curve_pk.data(),
                             curve_sk.data()) != 0) {
        throw TamperError("sealed box authentication failed");
    }
    return out;
}

EphemeralKey make_ephemeral(Rng& rng) {
    init();
    EphemeralKey key;
    rng.fill(key.secret_key);
    crypto_scalarmult_base(key.public_key.data(), key.secret_key.data());
    return key;
}

std::array<std::uint8_t, 32> dh(const EphemeralKey& mine,
                                const std::array<std::uint8_t, 32>& their_public) {
    init();
    std::array<std::uint8_t, 32> shared{};
    if (crypto_scalarmult(shared.data(), mine.secret_key.data(), their_public.data()) != 0) {
        throw TamperError("invalid ephemeral public key");
    }
    return shared;
}

ChannelKey derive_channel_key(const std::array<std::uint8_t, 32>& shared,
                              const ChannelNonce& inviter_nonce,
                              const ChannelNonce& responder_nonce) {
    Bytes material;
    const std::string label = "rx/channel/v1";
    material.insert(material.end(), label.begin(), label.end());
    material.insert(material.end(), shared.begin(), shared.end());
    material.insert(material.end(), inviter_nonce.begin(), inviter_nonce.end());
    material.insert(material.end(), responder_nonce.begin(), responder_nonce.end());
    return hash(material).bytes;
}

Seed Rng::seed32() {
    Seed s{};
    fill(s);
    return s;
}

Salt Rng::salt16() {
    Salt s{};
    fill(s);
    return s;
}

AeadNonce Rng::nonce12() {
    AeadNonce n{};
    fill(n);
    return n;
}

ChannelNonce Rng::nonce32() {
    ChannelNonce n{};
    fill(n);
    return n;
}

Bytes Rng::bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

std::uint64_t Rng::next_u64() {
    std::array<std::uint8_t, 8> buf{};
    fill(buf);
    std::uint64_t v = 0;
    for (const auto b : buf) v = (v << 8) | b;
    return v;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // Rejection sampling keeps the distribution uniform.
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % bound;
}

void SystemRng::fill(std::span<std::uint8_t> out) {
    init();
    randombytes_buf(out.data(), out.size());
}

void SeededRng::fill(std::span<std::uint8_t> out) {
    std::size_t i = 0;
    while (i < out.size()) {
        std::uint64_t v = engine_();
        for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
            out[i] = static_cast<std::uint8_t>(v & 0xFF);
            v >>= 8;
        }
    }
}

}  // namespace rx::crypto
