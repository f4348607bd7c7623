#include "rx/registry.hpp"

#include <algorithm>
#include <fstream>

namespace rx::registry {

std::string to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::duplicate_did: return "duplicate-did";
        case ErrorCode::bad_proof: return "bad-proof";
        case ErrorCode::not_found: return "not-found";
        case ErrorCode::invalid_role: return "invalid-role";
        case ErrorCode::unknown_issuer: return "unknown-issuer";
        case ErrorCode::duplicate_creddef: return "duplicate-creddef";
        case ErrorCode::stale_epoch: return "stale-epoch";
        case ErrorCode::bit_clearing: return "bit-clearing";
        case ErrorCode::bad_signature: return "bad-signature";
        case ErrorCode::unknown_registry: return "unknown-registry";
        case ErrorCode::epoch_unavailable: return "epoch-unavailable";
        case ErrorCode::bad_record: return "bad-record";
    }
    return "unknown-error";
}

std::string to_string(Role role) {
    switch (role) {
        case Role::doctor: return "doctor";
        case Role::pharmacy: return "pharmacy";
        case Role::patient: return "patient";
    }
    return "unknown";
}

Role role_from_string(std::string_view s) {
    if (s == "doctor") return Role::doctor;
    if (s == "pharmacy") return Role::pharmacy;
    if (s == "patient") return Role::patient;
    throw RegistryError(ErrorCode::bad_record, "unknown role '" + std::string(s) + "'");
}

Did Did::generate(crypto::Rng& rng) {
    std::array<std::uint8_t, 16> id{};
    rng.fill(id);
    return Did{"did:rx:" + to_base64url(id)};
}

Did Did::parse(std::string_view text) {
    constexpr std::string_view prefix = "did:rx:";
    if (!text.starts_with(prefix)) {
        throw RegistryError(ErrorCode::bad_record, "did must start with did:rx:");
    }
    const auto id = text.substr(prefix.size());
    if (from_base64url(id).size() != 16) {
        throw RegistryError(ErrorCode::bad_record, "did id must decode to 16 bytes");
    }
    return Did{std::string(text)};
}

Json DidDocument::to_json() const {
    return Json{{"did", did.value},
                {"verification_key", verification_key.to_base64url()},
                {"service_endpoint", service_endpoint},
                {"role", to_string(role)}};
}

DidDocument DidDocument::from_json(const Json& j) {
    DidDocument doc;
    doc.did = Did::parse(j.at("did").get<std::string>());
    doc.verification_key = crypto::PublicKey::from_base64url(j.at("verification_key").get<std::string>());
    doc.service_endpoint = j.at("service_endpoint").get<std::string>();
    doc.role = role_from_string(j.at("role").get<std::string>());
    return doc;
}

Bytes DidDocument::signing_payload() const {
    return canonical::encode_bytes(to_json());
}

CredentialSchema CredentialSchema::make(std::string name, std::string version,
                                        std::vector<std::string> attribute_names) {
    if (attribute_names.empty()) {
        throw RegistryError(ErrorCode::bad_record, "schema needs at least one attribute");
    }
    std::sort(attribute_names.begin(), attribute_names.end());
    if (std::adjacent_find(attribute_names.begin(), attribute_names.end()) !=
        attribute_names.end()) {
        throw RegistryError(ErrorCode::bad_record, "schema attribute names must be unique");
    }
    return CredentialSchema{std::move(name), std::move(version), std::move(attribute_names)};
}

Json CredentialSchema::body_json() const {
    return Json{{"name", name}, {"version", version}, {"attribute_names", attribute_names}};
}

CredentialSchema CredentialSchema::from_json(const Json& j) {
    return make(j.at("name").get<std::string>(), j.at("version").get<std::string>(),
                j.at("attribute_names").get<std::vector<std::string>>());
}

bool CredentialSchema::has_attribute(std::string_view name) const {
    return std::binary_search(attribute_names.begin(), attribute_names.end(), name);
}

Json CredentialDefinition::body_json() const {
    return Json{{"schema_id", schema_id.to_base64url()},
                {"issuer_did", issuer_did.value},
                {"issuer_signing_key", issuer_signing_key.to_base64url()},
                {"revocation_registry_id", revocation_registry_id.to_base64url()}};
}

CredentialDefinition CredentialDefinition::from_json(const Json& j) {
    CredentialDefinition def;
    def.schema_id = crypto::Digest::from_base64url(j.at("schema_id").get<std::string>());
    def.issuer_did = Did::parse(j.at("issuer_did").get<std::string>());
    def.issuer_signing_key =
        crypto::PublicKey::from_base64url(j.at("issuer_signing_key").get<std::string>());
    def.revocation_registry_id =
        crypto::Digest::from_base64url(j.at("revocation_registry_id").get<std::string>());
    return def;
}

crypto::Digest derive_revocation_registry_id(const Did& issuer_did,
                                             const crypto::Digest& schema_id) {
    const Json body{{"type", "revocation-registry"},
                    {"issuer_did", issuer_did.value},
                    {"schema_id", schema_id.to_base64url()}};
    return crypto::hash(canonical::encode(body));
}

Bytes revocation_signing_payload(const crypto::Digest& registry_id, std::uint64_t epoch,
                                 const std::set<std::uint64_t>& revoked) {
    const Json body{{"registry_id", registry_id.to_base64url()},
                    {"epoch", epoch},
                    {"revoked", std::vector<std::uint64_t>(revoked.begin(), revoked.end())}};
    return canonical::encode_bytes(body);
}

Json RevocationState::body_json() const {
    return Json{{"registry_id", registry_id.to_base64url()},
                {"creddef_id", creddef_id.to_base64url()},
                {"epoch", epoch},
                {"revoked", std::vector<std::uint64_t>(revoked.begin(), revoked.end())}};
}

Json RevocationState::to_json() const {
    Json j = body_json();
    j["issuer_signature"] = issuer_signature.to_base64url();
    return j;
}

RevocationState RevocationState::from_json(const Json& j) {
    RevocationState state;
    state.registry_id = crypto::Digest::from_base64url(j.at("registry_id").get<std::string>());
    state.creddef_id = crypto::Digest::from_base64url(j.at("creddef_id").get<std::string>());
    state.epoch = j.at("epoch").get<std::uint64_t>();
    for (const auto& idx : j.at("revoked")) state.revoked.insert(idx.get<std::uint64_t>());
    if (j.contains("issuer_signature")) {
        state.issuer_signature =
            crypto::Signature::from_base64url(j.at("issuer_signature").get<std::string>());
    }
    return state;
}

Bytes RevocationState::signing_payload() const {
    return revocation_signing_payload(registry_id, epoch, revoked);
}

Json Record::to_json() const {
    Json j{{"seq", seq}, {"kind", kind}, {"body", body}};
    if (signature) j["signature"] = signature->to_base64url();
    return j;
}

Record Record::from_json(const Json& j) {
    Record r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.kind = j.at("kind").get<std::string>();
    r.body = j.at("body");
    if (j.contains("signature")) {
        r.signature = crypto::Signature::from_base64url(j.at("signature").get<std::string>());
    }
    return r;
}

std::shared_ptr<const Registry::State> Registry::snapshot() const {
    std::lock_guard lock(mutex_);
    return state_;
}

void Registry::append_record(State& state, std::string kind, Json body,
                             std::optional<crypto::Signature> signature) {
    Record record{state.log.size(), std::move(kind), std::move(body), std::move(signature)};
    if (log_file_ && log_file_->is_open()) {
        *log_file_ << canonical::encode(record.to_json()) << '\n';
        log_file_->flush();
    }
    state.log.push_back(std::move(record));
}

Did Registry::register_did(const DidDocument& doc, const crypto::Signature& proof) {
    if (doc.role == Role::patient) {
        throw RegistryError(ErrorCode::invalid_role,
                            "patients are not publicly registered");
    }
    if (!crypto::verify(doc.verification_key, doc.signing_payload(), proof)) {
        throw RegistryError(ErrorCode::bad_proof, "proof of key possession failed");
    }
    std::lock_guard lock(mutex_);
    if (state_->dids.contains(doc.did.value)) {
        throw RegistryError(ErrorCode::duplicate_did, doc.did.value);
    }
    auto next = std::make_shared<State>(*state_);
    next->dids.emplace(doc.did.value, doc);
    append_record(*next, "did", doc.to_json(), proof);
    state_ = std::move(next);
    return doc.did;
}

DidDocument Registry::resolve_did(const Did& did) const {
    const auto state = snapshot();
    const auto it = state->dids.find(did.value);
    if (it == state->dids.end()) {
        throw RegistryError(ErrorCode::not_found, did.value);
    }
    return it->second;
}

crypto::Digest Registry::register_schema(const CredentialSchema& schema) {
    const auto id = schema.id();
    std::lock_guard lock(mutex_);
    if (state_->schemas.contains(id.bytes)) {
        return id;  // content addressed, re-registration is idempotent
    }
    auto next = std::make_shared<State>(*state_);
    next->schemas.emplace(id.bytes, schema);
    append_record(*next, "schema", schema.body_json(), std::nullopt);
    state_ = std::move(next);
    return id;
}

CredentialSchema Registry::schema(const crypto::Digest& schema_id) const {
    const auto state = snapshot();
    const auto it = state->schemas.find(schema_id.bytes);
    if (it == state->schemas.end()) {
        throw RegistryError(ErrorCode::not_found, "schema " + schema_id.to_base64url());
    }
    return it->second;
}

crypto::Digest Registry::register_creddef(const CredentialDefinition& creddef,
                                          const crypto::Signature& proof,
                                          const crypto::Signature& genesis_revocation_signature) {
    const auto id = creddef.id();
    DidDocument issuer = resolve_did(creddef.issuer_did);
    if (issuer.role != Role::doctor) {
        throw RegistryError(ErrorCode::unknown_issuer,
                            creddef.issuer_did.value + " is not registered as a doctor");
    }
    if (issuer.verification_key != creddef.issuer_signing_key) {
        throw RegistryError(ErrorCode::bad_proof,
                            "issuer_signing_key does not match the registered DID key");
    }
    if (!crypto::verify(creddef.issuer_signing_key, canonical::encode_bytes(creddef.body_json()),
                        proof)) {
        throw RegistryError(ErrorCode::bad_proof, "creddef proof failed");
    }
    const auto expected_registry_id =
        derive_revocation_registry_id(creddef.issuer_did, creddef.schema_id);
    if (creddef.revocation_registry_id != expected_registry_id) {
        throw RegistryError(ErrorCode::bad_record, "revocation_registry_id mismatch");
    }

    RevocationState genesis;
    genesis.registry_id = creddef.revocation_registry_id;
    genesis.creddef_id = id;
    genesis.epoch = 0;
    genesis.issuer_signature = genesis_revocation_signature;
    if (!crypto::verify(creddef.issuer_signing_key, genesis.signing_payload(),
                        genesis_revocation_signature)) {
        throw RegistryError(ErrorCode::bad_signature, "genesis revocation signature failed");
    }

    std::lock_guard lock(mutex_);
    if (!state_->schemas.contains(creddef.schema_id.bytes)) {
        throw RegistryError(ErrorCode::not_found,
                            "schema " + creddef.schema_id.to_base64url());
    }
    if (state_->creddefs.contains(id.bytes)) {
        return id;  // identical re-registration
    }
    const auto pair_key =
        std::make_pair(creddef.issuer_did.value, creddef.schema_id.to_base64url());
    if (state_->active_creddefs.contains(pair_key)) {
        throw RegistryError(ErrorCode::duplicate_creddef,
                            "issuer already has an active creddef for this schema");
    }
    auto next = std::make_shared<State>(*state_);
    next->creddefs.emplace(id.bytes, creddef);
    next->active_creddefs.emplace(pair_key, id.bytes);
    next->revocations[id.bytes].push_back(genesis);
    append_record(*next, "creddef", creddef.body_json(), proof);
    append_record(*next, "revocation", genesis.body_json(), genesis_revocation_signature);
    state_ = std::move(next);
    return id;
}

CredentialDefinition Registry::creddef(const crypto::Digest& creddef_id) const {
    const auto state = snapshot();
    const auto it = state->creddefs.find(creddef_id.bytes);
    if (it == state->creddefs.end()) {
        throw RegistryError(ErrorCode::not_found, "creddef " + creddef_id.to_base64url());
    }
    return it->second;
}

void Registry::apply_revocation_state(State& state, const RevocationState& next) {
    const auto it = state.creddefs.find(next.creddef_id.bytes);
    if (it == state.creddefs.end()) {
        throw RegistryError(ErrorCode::unknown_registry,
                            "creddef " + next.creddef_id.to_base64url());
    }
    auto& chain = state.revocations[next.creddef_id.bytes];
    if (chain.empty()) {
        if (next.epoch != 0) throw RegistryError(ErrorCode::stale_epoch, "missing genesis epoch");
    } else {
        const auto& head = chain.back();
        if (next.epoch != head.epoch + 1) {
            throw RegistryError(ErrorCode::stale_epoch,
                                "expected epoch " + std::to_string(head.epoch + 1) + ", got " +
                                    std::to_string(next.epoch));
        }
        if (!std::includes(next.revoked.begin(), next.revoked.end(), head.revoked.begin(),
                           head.revoked.end())) {
            throw RegistryError(ErrorCode::bit_clearing,
                                "revocation bits are irreversible");
        }
    }
    if (!crypto::verify(it->second.issuer_signing_key, next.signing_payload(),
                        next.issuer_signature)) {
        throw RegistryError(ErrorCode::bad_signature, "revocation signature failed");
    }
    chain.push_back(next);
}

RevocationState Registry::publish_revocation(const crypto::Digest& creddef_id,
                                             std::uint64_t new_epoch,
                                             const std::set<std::uint64_t>& newly_revoked,
                                             const crypto::Signature& signature) {
    std::lock_guard lock(mutex_);
    const auto chain_it = state_->revocations.find(creddef_id.bytes);
    if (chain_it == state_->revocations.end() || chain_it->second.empty()) {
        throw RegistryError(ErrorCode::unknown_registry, creddef_id.to_base64url());
    }
    const auto& head = chain_it->second.back();

    RevocationState next;
    next.registry_id = head.registry_id;
    next.creddef_id = head.creddef_id;
    next.epoch = new_epoch;
    next.revoked = head.revoked;
    next.revoked.insert(newly_revoked.begin(), newly_revoked.end());
    next.issuer_signature = signature;

    auto state = std::make_shared<State>(*state_);
    apply_revocation_state(*state, next);
    append_record(*state, "revocation", next.body_json(), signature);
    state_ = std::move(state);
    return next;
}

NonRevocationCheck Registry::check_non_revoked(const crypto::Digest& creddef_id,
                                               std::uint64_t credential_index,
                                               std::uint64_t min_epoch) const {
    const auto state = snapshot();
    const auto chain_it = state->revocations.find(creddef_id.bytes);
    if (chain_it == state->revocations.end() || chain_it->second.empty()) {
        throw RegistryError(ErrorCode::unknown_registry, creddef_id.to_base64url());
    }
    const auto& head = chain_it->second.back();
    if (head.epoch < min_epoch) {
        throw RegistryError(ErrorCode::epoch_unavailable,
                            "latest epoch " + std::to_string(head.epoch) + " < required " +
                                std::to_string(min_epoch));
    }
    const auto def_it = state->creddefs.find(creddef_id.bytes);
    if (!crypto::verify(def_it->second.issuer_signing_key, head.signing_payload(),
                        head.issuer_signature)) {
        throw RegistryError(ErrorCode::bad_signature, "revocation snapshot signature failed");
    }
    return NonRevocationCheck{head.epoch, !head.revoked.contains(credential_index)};
}

RevocationState Registry::revocation_head(const crypto::Digest& creddef_id) const {
    const auto state = snapshot();
    const auto it = state->revocations.find(creddef_id.bytes);
    if (it == state->revocations.end() || it->second.empty()) {
        throw RegistryError(ErrorCode::unknown_registry, creddef_id.to_base64url());
    }
    return it->second.back();
}

RevocationState Registry::revocation_at(const crypto::Digest& creddef_id,
                                        std::uint64_t epoch) const {
    const auto state = snapshot();
    const auto it = state->revocations.find(creddef_id.bytes);
    if (it == state->revocations.end() || it->second.empty()) {
        throw RegistryError(ErrorCode::unknown_registry, creddef_id.to_base64url());
    }
    if (epoch >= it->second.size()) {
        throw RegistryError(ErrorCode::epoch_unavailable, std::to_string(epoch));
    }
    return it->second[epoch];
}

std::vector<Record> Registry::records() const {
    return snapshot()->log;
}

std::vector<Record> Registry::records_of_kind(std::string_view kind) const {
    std::vector<Record> out;
    for (const auto& r : snapshot()->log) {
        if (r.kind == kind) out.push_back(r);
    }
    return out;
}

void Registry::attach_log(const std::filesystem::path& path) {
    std::lock_guard lock(mutex_);
    log_file_ = std::make_shared<std::ofstream>(path, std::ios::trunc);
    if (!log_file_->is_open()) {
        throw std::runtime_error("cannot open registry log " + path.string());
    }
    for (const auto& record : state_->log) {
        *log_file_ << canonical::encode(record.to_json()) << '\n';
    }
    log_file_->flush();
}

Registry Registry::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw std::runtime_error("cannot open registry log " + path.string());
    }
    Registry registry;
    std::string line;
    std::uint64_t expected_seq = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Record record = Record::from_json(canonical::parse(line));
        if (record.seq != expected_seq++) {
            throw RegistryError(ErrorCode::bad_record,
                                "registry log seq gap at " + std::to_string(record.seq));
        }
        std::lock_guard lock(registry.mutex_);
        auto next = std::make_shared<State>(*registry.state_);
        if (record.kind == "did") {
            const auto doc = DidDocument::from_json(record.body);
            if (!record.signature) throw RegistryError(ErrorCode::bad_record, "did without proof");
            if (!crypto::verify(doc.verification_key, doc.signing_payload(), *record.signature)) {
                throw RegistryError(ErrorCode::bad_proof, doc.did.value);
            }
            next->dids.emplace(doc.did.value, doc);
        } else if (record.kind == "schema") {
            const auto schema = CredentialSchema::from_json(record.body);
            next->schemas.emplace(schema.id().bytes, schema);
        } else if (record.kind == "creddef") {
            const auto def = CredentialDefinition::from_json(record.body);
            next->creddefs.emplace(def.id().bytes, def);
            next->active_creddefs.emplace(
                std::make_pair(def.issuer_did.value, def.schema_id.to_base64url()),
                def.id().bytes);
        } else if (record.kind == "revocation") {
            auto rev = RevocationState::from_json(record.body);
            if (!record.signature) {
                throw RegistryError(ErrorCode::bad_record, "revocation without signature");
            }
            rev.issuer_signature = *record.signature;
            registry.apply_revocation_state(*next, rev);
        } else {
            throw RegistryError(ErrorCode::bad_record, "unknown record kind " + record.kind);
        }
        next->log.push_back(record);
        registry.state_ = std::move(next);
    }
    return registry;
}

void CachedRegistryView::refresh() {
    creddefs_.clear();
    schemas_.clear();
    dids_.clear();
    for (const auto& record : source_->records_of_kind("creddef")) {
        const auto def = CredentialDefinition::from_json(record.body);
        creddefs_.emplace(def.id().to_base64url(), def);
    }
    for (const auto& record : source_->records_of_kind("schema")) {
        const auto schema = CredentialSchema::from_json(record.body);
        schemas_.emplace(schema.id().to_base64url(), schema);
    }
    for (const auto& record : source_->records_of_kind("did")) {
        const auto doc = DidDocument::from_json(record.body);
        dids_.emplace(doc.did.value, doc);
    }
}

CredentialDefinition CachedRegistryView::creddef(const crypto::Digest& creddef_id) const {
    const auto it = creddefs_.find(creddef_id.to_base64url());
    if (it == creddefs_.end()) {
        throw RegistryError(ErrorCode::not_found, "creddef " + creddef_id.to_base64url());
    }
    return it->second;
}

CredentialSchema CachedRegistryView::schema(const crypto::Digest& schema_id) const {
    const auto it = schemas_.find(schema_id.to_base64url());
    if (it == schemas_.end()) {
        throw RegistryError(ErrorCode::not_found, "schema " + schema_id.to_base64url());
    }
    return it->second;
}

DidDocument CachedRegistryView::resolve_did(const Did& did) const {
    const auto it = dids_.find(did.value);
    if (it == dids_.end()) throw RegistryError(ErrorCode::not_found, did.value);
    return it->second;
}

}  // namespace rx::registry
