#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "rx/canonical.hpp"
#include "rx/crypto.hpp"

namespace rx::ledger {

using canonical::Json;
using ContractAddress = crypto::Digest;

// Bit-exact contract error strings.
inline constexpr std::string_view kAlreadySpent = "Already spent";
inline constexpr std::string_view kNotAdmin = "Sender is not the admin of the contract";

struct PrescriptionToken {
    crypto::PublicKey issuer;
    std::uint64_t remaining_redemptions = 0;
};

struct ContractState {
    crypto::PublicKey admin;
    std::set<crypto::PublicKey> issuers;
    std::map<crypto::PublicKey, PrescriptionToken> prescriptions;
};

struct DeployCommand {};
struct CreateCommand {
    ContractAddress contract;
    crypto::PublicKey patient_pk;
    std::uint64_t count = 0;
};
struct SpendCommand {
    ContractAddress contract;
};
struct AddIssuerCommand {
    ContractAddress contract;
    crypto::PublicKey new_issuer;
};

using Command = std::variant<DeployCommand, CreateCommand, SpendCommand, AddIssuerCommand>;

Json command_to_json(const Command& cmd);
Command command_from_json(const Json& j);

ContractAddress contract_address_for(const crypto::PublicKey& deployer, std::uint64_t nonce);

struct LedgerTransaction {
    crypto::PublicKey sender;
    std::uint64_t nonce = 0;
    Command command;
    crypto::Signature signature;

    static Bytes signing_payload(const crypto::PublicKey& sender, std::uint64_t nonce,
                                 const Command& command);
    Json to_json() const;
    static LedgerTransaction from_json(const Json& j);
};

LedgerTransaction make_transaction(const crypto::KeyPair& signer, std::uint64_t nonce,
                                   Command command);

struct LedgerReceipt {
    enum class Status { ok, rejected };

    Status status = Status::rejected;
    std::optional<std::uint64_t> height;  // absent when rejected before ordering
    std::optional<std::string> error_code;
    std::optional<std::string> error_message;
    std::optional<std::uint64_t> remaining_redemptions;

    bool ok() const { return status == Status::ok; }
    Json to_json() const;
    static LedgerReceipt from_json(const Json& j);
    bool operator==(const LedgerReceipt&) const = default;
};

struct LogEntry {
    std::uint64_t height = 0;
    LedgerTransaction tx;
    LedgerReceipt receipt;

    Json to_json() const;
    static LogEntry from_json(const Json& j);
};

struct LedgerState {
    std::uint64_t height = 0;  // number of ordered transactions
    std::map<std::array<std::uint8_t, 32>, ContractState> contracts;
    std::map<crypto::PublicKey, std::uint64_t> nonces;  // highest ordered nonce per sender

    Json to_json() const;
    crypto::Digest digest() const;
    const ContractState* find_contract(const ContractAddress& address) const;
};

// Applies an already-ordered transaction: consumes the nonce, increments the
// height, runs the command. Shared by the live applier and replay.
LedgerReceipt apply_ordered(LedgerState& state, const LedgerTransaction& tx);

// Rebuilds state from a log; verify additionally re-checks signatures, nonce
// monotonicity, height density, and that recorded receipts match recomputation.
LedgerState replay(const std::vector<LogEntry>& log, bool verify = true);
LedgerState replay_file(const std::filesystem::path& path, bool verify = true);
std::vector<LogEntry> read_log_file(const std::filesystem::path& path);

// Totally ordered transaction log plus deterministic state machine. Many
// concurrent submitters; exactly one applier thread owns the mutable state.
// Receipts are synchronous: the returned future resolves once the transaction
// is ordered and applied (or rejected up front).
class Ledger {
public:
    struct Options {
        bool keep_log_in_memory = true;
    };

    Ledger() : Ledger(Options{}) {}
    explicit Ledger(Options options);
    ~Ledger();

    Ledger(const Ledger&) = delete;
    Ledger& operator=(const Ledger&) = delete;

    std::future<LedgerReceipt> submit_async(LedgerTransaction tx);
    LedgerReceipt submit(LedgerTransaction tx) { return submit_async(std::move(tx)).get(); }

    // Reads: a barrier travels through the queue, so the snapshot reflects
    // every previously completed submission.
    std::shared_ptr<const LedgerState> snapshot() const;
    std::optional<PrescriptionToken> query_token(const ContractAddress& contract,
                                                 const crypto::PublicKey& patient_pk) const;
    std::optional<ContractState> query_contract(const ContractAddress& contract) const;
    std::uint64_t height() const;
    std::uint64_t next_nonce(const crypto::PublicKey& sender) const;
    crypto::Digest state_digest() const;

    std::vector<LogEntry> log() const;
    void attach_log_file(const std::filesystem::path& path);

private:
    struct Pending {
        LedgerTransaction tx;
        std::promise<LedgerReceipt> promise;
    };
    struct SnapshotRequest {
        std::promise<std::shared_ptr<const LedgerState>> promise;
    };
    using QueueItem = std::variant<Pending, SnapshotRequest>;

    void applier_loop();
    void process(QueueItem& item);

    Options options_;
    LedgerState state_;  // owned by the applier thread
    std::vector<LogEntry> memory_log_;
    mutable std::mutex log_mutex_;
    std::unique_ptr<std::ofstream> log_file_;

    mutable std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<QueueItem> queue_;
    bool stopping_ = false;
    std::thread applier_;
};

// Per-sender submission handle: reserves the next nonce and enqueues within
// one critical section, so concurrent submissions signed by the same key
// always arrive nonce-ordered and every racer reaches ordering (the losers
// fail on the decrement guard, not on nonce staleness).
class LedgerClient {
public:
    LedgerClient(Ledger& ledger, crypto::KeyPair keypair);

    const crypto::PublicKey& sender() const { return inner_->keypair.public_key(); }

    std::future<LedgerReceipt> submit_async(Command command);
    LedgerReceipt submit(Command command) { return submit_async(std::move(command)).get(); }

    struct DeployResult {
        ContractAddress address;
        LedgerReceipt receipt;
    };
    DeployResult deploy();
    LedgerReceipt create(const ContractAddress& contract, const crypto::PublicKey& patient_pk,
                         std::uint64_t count);
    LedgerReceipt spend(const ContractAddress& contract);
    std::future<LedgerReceipt> spend_async(const ContractAddress& contract);
    LedgerReceipt add_issuer(const ContractAddress& contract, const crypto::PublicKey& new_issuer);

private:
    struct Inner {
        Ledger* ledger;
        crypto::KeyPair keypair;
        std::mutex mutex;
        std::optional<std::uint64_t> next_nonce;
    };
    std::pair<std::future<LedgerReceipt>, std::uint64_t> enqueue(Command command);

    std::shared_ptr<Inner> inner_;
};

}  // namespace rx::ledger
