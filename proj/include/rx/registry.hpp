#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rx/canonical.hpp"
#include "rx/crypto.hpp"

namespace rx::registry {

using canonical::Json;

enum class ErrorCode {
    duplicate_did,
    bad_proof,
    not_found,
    invalid_role,
    unknown_issuer,
    duplicate_creddef,
    stale_epoch,
    bit_clearing,
    bad_signature,
    unknown_registry,
    epoch_unavailable,
    bad_record,
};

std::string to_string(ErrorCode code);

class RegistryError : public std::runtime_error {
public:
    RegistryError(ErrorCode code, const std::string& msg)
        : std::runtime_error(to_string(code) + ": " + msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

enum class Role { doctor, pharmacy, patient };

std::string to_string(Role role);
Role role_from_string(std::string_view s);

struct Did {
    std::string value;  // "did:rx:<base64url of 16 bytes>"

    static Did generate(crypto::Rng& rng);
    static Did parse(std::string_view text);

    auto operator<=>(const Did&) const = default;
};

struct DidDocument {
    Did did;
    crypto::PublicKey verification_key;
    std::string service_endpoint;
    Role role = Role::patient;

    Json to_json() const;
    static DidDocument from_json(const Json& j);
    // Canonical bytes signed by the registration proof.
    Bytes signing_payload() const;
};

struct CredentialSchema {
    std::string name;
    std::string version;
    std::vector<std::string> attribute_names;  // kept sorted and unique

    static CredentialSchema make(std::string name, std::string version,
                                 std::vector<std::string> attribute_names);

    Json body_json() const;
    crypto::Digest id() const { return crypto::hash(canonical::encode(body_json())); }
    static CredentialSchema from_json(const Json& j);
    bool has_attribute(std::string_view name) const;
};

struct CredentialDefinition {
    crypto::Digest schema_id;
    Did issuer_did;
    crypto::PublicKey issuer_signing_key;
    crypto::Digest revocation_registry_id;

    Json body_json() const;
    crypto::Digest id() const { return crypto::hash(canonical::encode(body_json())); }
    static CredentialDefinition from_json(const Json& j);
};

// Deterministic derivation that breaks the creddef <-> registry id cycle.
crypto::Digest derive_revocation_registry_id(const Did& issuer_did,
                                             const crypto::Digest& schema_id);

struct RevocationState {
    crypto::Digest registry_id;
    crypto::Digest creddef_id;
    std::uint64_t epoch = 0;
    std::set<std::uint64_t> revoked;
    crypto::Signature issuer_signature;

    Json body_json() const;
    Json to_json() const;
    static RevocationState from_json(const Json& j);
    // Canonical bytes covered by issuer_signature: (registry_id, epoch, revoked).
    Bytes signing_payload() const;
};

Bytes revocation_signing_payload(const crypto::Digest& registry_id, std::uint64_t epoch,
                                 const std::set<std::uint64_t>& revoked);

struct NonRevocationCheck {
    std::uint64_t epoch = 0;
    bool non_revoked = false;
};

// Append-only log record: {seq, kind, body, signature?}.
struct Record {
    std::uint64_t seq = 0;
    std::string kind;
    Json body;
    std::optional<crypto::Signature> signature;

    Json to_json() const;
    static Record from_json(const Json& j);
};

// The verifiable data registry: public DIDs, schemas, credential definitions,
// and versioned revocation registries. Single-writer append; readers get
// immutable snapshots.
class Registry {
public:
    Registry() = default;

    Did register_did(const DidDocument& doc, const crypto::Signature& proof);
    DidDocument resolve_did(const Did& did) const;

    crypto::Digest register_schema(const CredentialSchema& schema);
    CredentialSchema schema(const crypto::Digest& schema_id) const;

    // genesis_revocation_signature covers the empty epoch-0 registry state
    // so every published epoch is issuer-signed.
    crypto::Digest register_creddef(const CredentialDefinition& creddef,
                                    const crypto::Signature& proof,
                                    const crypto::Signature& genesis_revocation_signature);
    CredentialDefinition creddef(const crypto::Digest& creddef_id) const;

    RevocationState publish_revocation(const crypto::Digest& creddef_id, std::uint64_t new_epoch,
                                       const std::set<std::uint64_t>& newly_revoked,
                                       const crypto::Signature& signature);
    NonRevocationCheck check_non_revoked(const crypto::Digest& creddef_id,
                                         std::uint64_t credential_index,
                                         std::uint64_t min_epoch) const;
    RevocationState revocation_head(const crypto::Digest& creddef_id) const;
    RevocationState revocation_at(const crypto::Digest& creddef_id, std::uint64_t epoch) const;

    std::vector<Record> records() const;
    std::vector<Record> records_of_kind(std::string_view kind) const;

    // Persistence: newline-delimited canonical JSON records, seq dense from 0.
    void attach_log(const std::filesystem::path& path);
    static Registry load(const std::filesystem::path& path);

private:
    struct State {
        std::map<std::string, DidDocument> dids;
        std::map<std::array<std::uint8_t, 32>, CredentialSchema> schemas;
        std::map<std::array<std::uint8_t, 32>, CredentialDefinition> creddefs;
        // All epochs per creddef, index = epoch.
        std::map<std::array<std::uint8_t, 32>, std::vector<RevocationState>> revocations;
        // (issuer did, schema id b64) -> creddef id, guards one-active-per-pair.
        std::map<std::pair<std::string, std::string>, std::array<std::uint8_t, 32>> active_creddefs;
        std::vector<Record> log;
    };

    std::shared_ptr<const State> snapshot() const;
    void append_record(State& state, std::string kind, Json body,
                       std::optional<crypto::Signature> signature);
    // Validates and applies a full revocation state (also the load/replay path).
    void apply_revocation_state(State& state, const RevocationState& next);

    mutable std::mutex mutex_;
    std::shared_ptr<const State> state_ = std::make_shared<State>();
    std::shared_ptr<std::ofstream> log_file_;
};

// Snapshot of creddefs/schemas for verifiers that refresh occasionally instead
// of reading live.
class CachedRegistryView {
public:
    explicit CachedRegistryView(const Registry& source) : source_(&source) { refresh(); }

    void refresh();
    CredentialDefinition creddef(const crypto::Digest& creddef_id) const;
    CredentialSchema schema(const crypto::Digest& schema_id) const;
    DidDocument resolve_did(const Did& did) const;

private:
    const Registry* source_;
    std::map<std::string, CredentialDefinition> creddefs_;
    std::map<std::string, CredentialSchema> schemas_;
    std::map<std::string, DidDocument> dids_;
};

}  // namespace rx::registry
