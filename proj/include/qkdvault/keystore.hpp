#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qkdvault/bb84.hpp"
#include "qkdvault/bitvec.hpp"
#include "qkdvault/qotp.hpp"

namespace qkdvault {

struct AuditRecord {
    int64_t ts = 0; // milliseconds since epoch
    std::string op; // "deposit" | "consume"
    uint64_t segment_id = 0;
    uint64_t range_start = 0;
    uint64_t range_end = 0; // half-open [start, end)
};

// Pool of QKD-established key material. Consumption is FIFO from the oldest
// unconsumed material, serialized under one lock, and marked durable before
// any key bits are released: a crash between mark and release loses material
// but can never hand the same bits out twice. Consumed bits stay in the pool
// so ciphertexts remain decryptable (the decrypt ledger binds key ids to
// their ranges).
class KeyPool {
public:
    KeyPool() = default;
    explicit KeyPool(uint64_t id_seed);
    KeyPool(KeyPool&& other) noexcept;
    KeyPool& operator=(KeyPool&& other) noexcept;

    // File-backed pool: loads the file when present, otherwise starts empty.
    // Every mutation rewrites the pool file atomically and appends one audit
    // line per affected segment before the operation returns.
    static KeyPool open(std::filesystem::path pool_file, std::filesystem::path audit_file);

    uint64_t deposit(const QkdSessionResult& session);
    uint64_t deposit_bits(const BitVec& bits); // established material from elsewhere

    OtpKey consume(size_t length_bits);

    uint64_t total_available() const;
    uint64_t total_deposited() const;
    uint64_t total_consumed() const;
    size_t segment_count() const;

    // Decrypt ledger: the bits a consumed key id was built from.
    std::optional<BitVec> lookup_consumed(const KeyId& id) const;

    void persist(const std::filesystem::path& path) const;
    static KeyPool load(const std::filesystem::path& path);

    const std::vector<AuditRecord>& audit_log() const { return audit_; }
    std::string audit_ndjson() const;

    // Fault injection for the crash-ordering tests: runs after the consumed
    // marks become durable and before the key is released.
    void set_fault_hook_for_tests(std::function<void()> hook) { fault_hook_ = std::move(hook); }

private:
    struct Segment {
        uint64_t id = 0;
        BitVec bits;
        uint64_t consumed_prefix = 0; // FIFO: [0, consumed_prefix) is spent
    };
    struct LedgerPart {
        uint64_t segment_id = 0;
        uint64_t start = 0;
        uint64_t end = 0;
    };
    struct LedgerEntry {
        KeyId key_id{};
        std::vector<LedgerPart> parts;
    };

    uint64_t deposit_locked(BitVec bits);
    void persist_locked() const;
    void append_audit_locked(const std::string& op, uint64_t segment_id, uint64_t start,
                             uint64_t end);
    KeyId next_key_id_locked();

    mutable std::mutex mutex_;
    std::vector<Segment> segments_;
    std::vector<LedgerEntry> ledger_;
    std::vector<AuditRecord> audit_;
    uint64_t next_segment_id_ = 1;
    uint64_t key_counter_ = 0;
    uint64_t pool_nonce_ = 0;
    uint64_t deposited_ = 0;
    uint64_t consumed_ = 0;
    std::filesystem::path pool_file_;  // empty for in-memory pools
    std::filesystem::path audit_file_;
    std::function<void()> fault_hook_;
};

} // namespace qkdvault
