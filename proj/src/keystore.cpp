#include "qkdvault/keystore.hpp"

#include <chrono>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "qkdvault/errors.hpp"
#include "qkdvault/rng.hpp"

namespace qkdvault {

namespace {

constexpr char kPoolMagic[8] = {'Q', 'K', 'D', 'P', 'O', 'O', 'L', '1'};
constexpr uint8_t kPoolVersion = 1;

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void put_u32(std::vector<uint8_t>& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

struct Cursor {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) raise(Errc::ChecksumMismatch, "pool file truncated");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::span<const uint8_t> bytes(size_t n) {
        need(n);
        auto s = std::span<const uint8_t>(buf.data() + pos, n);
        pos += n;
        return s;
    }
};

} // namespace

KeyPool::KeyPool(uint64_t id_seed) : pool_nonce_(splitmix64(id_seed)) {}

KeyPool::KeyPool(KeyPool&& other) noexcept { *this = std::move(other); }

KeyPool& KeyPool::operator=(KeyPool&& other) noexcept {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    segments_ = std::move(other.segments_);
    ledger_ = std::move(other.ledger_);
    audit_ = std::move(other.audit_);
    next_segment_id_ = other.next_segment_id_;
    key_counter_ = other.key_counter_;
    pool_nonce_ = other.pool_nonce_;
    deposited_ = other.deposited_;
    consumed_ = other.consumed_;
    pool_file_ = std::move(other.pool_file_);
    audit_file_ = std::move(other.audit_file_);
    fault_hook_ = std::move(other.fault_hook_);
    return *this;
}

KeyPool KeyPool::open(std::filesystem::path pool_file, std::filesystem::path audit_file) {
    KeyPool pool;
    if (std::filesystem::exists(pool_file)) {
        pool = load(pool_file);
    }
    pool.pool_file_ = std::move(pool_file);
    pool.audit_file_ = std::move(audit_file);
    return pool;
}

uint64_t KeyPool::deposit(const QkdSessionResult& session) {
    if (session.status != SessionStatus::Established || !session.final_key.has_value()) {
        raise(Errc::InvalidArgument, "only Established sessions carry depositable keys");
    }
    return deposit_bits(*session.final_key);
}

uint64_t KeyPool::deposit_bits(const BitVec& bits) {
    std::lock_guard<std::mutex> lock(mutex_);
    return deposit_locked(bits);
}

uint64_t KeyPool::deposit_locked(BitVec bits) {
    Segment seg;
    seg.id = next_segment_id_++;
    seg.bits = std::move(bits);
    deposited_ += seg.bits.size();
    uint64_t len = seg.bits.size();
    uint64_t id = seg.id;
    segments_.push_back(std::move(seg));
    persist_locked();
    append_audit_locked("deposit", id, 0, len);
    return id;
}

OtpKey KeyPool::consume(size_t length_bits) {
    std::unique_lock<std::mutex> lock(mutex_);
    uint64_t available = deposited_ - consumed_;
    if (length_bits > available) {
        raise(Errc::KeyExhausted, "pool holds fewer unconsumed bits than requested");
    }

    BitVec material(length_bits);
    LedgerEntry entry;
    entry.key_id = next_key_id_locked();
    size_t filled = 0;
    for (auto& seg : segments_) {
        if (filled == length_bits) break;
        uint64_t free_bits = seg.bits.size() - seg.consumed_prefix;
        if (free_bits == 0) continue;
        uint64_t take = std::min<uint64_t>(free_bits, length_bits - filled);
        for (uint64_t i = 0; i < take; ++i) {
            if (seg.bits.get(seg.consumed_prefix + i)) material.set(filled + i, true);
        }
        entry.parts.push_back({seg.id, seg.consumed_prefix, seg.consumed_prefix + take});
        seg.consumed_prefix += take;
        filled += take;
    }
    consumed_ += length_bits;
    ledger_.push_back(entry);

    // Durable mark precedes key release.
    persist_locked();
    for (const auto& part : entry.parts) {
        append_audit_locked("consume", part.segment_id, part.start, part.end);
    }
    if (fault_hook_) fault_hook_();

    return OtpKey(entry.key_id, std::move(material));
}

uint64_t KeyPool::total_available() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return deposited_ - consumed_;
}

uint64_t KeyPool::total_deposited() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return deposited_;
}

uint64_t KeyPool::total_consumed() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return consumed_;
}

size_t KeyPool::segment_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return segments_.size();
}

std::optional<BitVec> KeyPool::lookup_consumed(const KeyId& id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& entry : ledger_) {
        if (entry.key_id != id) continue;
        BitVec bits;
        for (const auto& part : entry.parts) {
            for (const auto& seg : segments_) {
                if (seg.id != part.segment_id) continue;
                for (uint64_t i = part.start; i < part.end; ++i) {
                    bits.push_back(seg.bits.get(i) != 0);
                }
                break;
            }
        }
        return bits;
    }
    return std::nullopt;
}

KeyId KeyPool::next_key_id_locked() {
    KeyId id{};
    uint64_t hi = splitmix64(pool_nonce_);
    uint64_t lo = splitmix64(pool_nonce_ ^ ++key_counter_);
    for (int i = 0; i < 8; ++i) {
        id[i] = static_cast<uint8_t>(hi >> (8 * i));
        id[8 + i] = static_cast<uint8_t>(lo >> (8 * i));
    }
    return id;
}

void KeyPool::append_audit_locked(const std::string& op, uint64_t segment_id, uint64_t start,
                                  uint64_t end) {
    AuditRecord rec{now_ms(), op, segment_id, start, end};
    audit_.push_back(rec);
    if (!audit_file_.empty()) {
        std::ofstream out(audit_file_, std::ios::app);
        nlohmann::ordered_json j;
        j["ts"] = rec.ts;
        j["op"] = rec.op;
        j["segment_id"] = rec.segment_id;
        j["range"] = {rec.range_start, rec.range_end};
        out << j.dump() << '\n';
    }
}

std::string KeyPool::audit_ndjson() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string out;
    for (const auto& rec : audit_) {
        nlohmann::ordered_json j;
        j["ts"] = rec.ts;
        j["op"] = rec.op;
        j["segment_id"] = rec.segment_id;
        j["range"] = {rec.range_start, rec.range_end};
        out += j.dump();
        out += '\n';
    }
    return out;
}

void KeyPool::persist_locked() const {
    if (pool_file_.empty()) return;
    persist(pool_file_);
}

void KeyPool::persist(const std::filesystem::path& path) const {
    std::vector<uint8_t> buf;
    buf.insert(buf.end(), kPoolMagic, kPoolMagic + sizeof(kPoolMagic));
    buf.push_back(kPoolVersion);
    put_u64(buf, pool_nonce_);
    put_u64(buf, next_segment_id_);
    put_u64(buf, key_counter_);
    put_u64(buf, deposited_);
    put_u64(buf, consumed_);

    put_u32(buf, static_cast<uint32_t>(segments_.size()));
    for (const auto& seg : segments_) {
        std::vector<uint8_t> body;
        put_u64(body, seg.id);
        put_u64(body, seg.bits.size());
        put_u64(body, seg.consumed_prefix);
        auto packed = seg.bits.to_bytes_msb_first();
        body.insert(body.end(), packed.begin(), packed.end());
        put_u32(buf, crc32_of(std::span<const uint8_t>(body.data(), body.size())));
        buf.insert(buf.end(), body.begin(), body.end());
    }

    put_u32(buf, static_cast<uint32_t>(ledger_.size()));
    for (const auto& entry : ledger_) {
        buf.insert(buf.end(), entry.key_id.begin(), entry.key_id.end());
        put_u32(buf, static_cast<uint32_t>(entry.parts.size()));
        for (const auto& part : entry.parts) {
            put_u64(buf, part.segment_id);
            put_u64(buf, part.start);
            put_u64(buf, part.end);
        }
    }

    // Whole-file checksum closes the format against truncation.
    put_u32(buf, crc32_of(std::span<const uint8_t>(buf.data(), buf.size())));

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::Io, "cannot open pool file for writing");
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
        if (!out) raise(Errc::Io, "short write to pool file");
    }
    std::filesystem::rename(tmp, path);
}

KeyPool KeyPool::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::Io, "cannot open pool file");
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());

    if (buf.size() < sizeof(kPoolMagic) + 1 + 4 ||
        std::memcmp(buf.data(), kPoolMagic, sizeof(kPoolMagic)) != 0) {
        raise(Errc::Io, "not a pool file (bad magic)");
    }
    uint32_t stored_crc = 0;
    for (int i = 0; i < 4; ++i) {
        stored_crc |= static_cast<uint32_t>(buf[buf.size() - 4 + i]) << (8 * i);
    }
    if (crc32_of(std::span<const uint8_t>(buf.data(), buf.size() - 4)) != stored_crc) {
        raise(Errc::ChecksumMismatch, "pool file checksum mismatch");
    }

    Cursor cur{buf, sizeof(kPoolMagic)};
    uint8_t version = cur.bytes(1)[0];
    if (version != kPoolVersion) raise(Errc::Io, "unsupported pool file version");

    KeyPool pool;
    pool.pool_nonce_ = cur.u64();
    pool.next_segment_id_ = cur.u64();
    pool.key_counter_ = cur.u64();
    pool.deposited_ = cur.u64();
    pool.consumed_ = cur.u64();

    uint32_t nsegs = cur.u32();
    pool.segments_.reserve(nsegs);
    for (uint32_t s = 0; s < nsegs; ++s) {
        uint32_t seg_crc = cur.u32();
        size_t body_start = cur.pos;
        Segment seg;
        seg.id = cur.u64();
        uint64_t bit_len = cur.u64();
        seg.consumed_prefix = cur.u64();
        auto packed = cur.bytes((bit_len + 7) / 8);
        seg.bits = BitVec::from_bytes_msb_first(packed, bit_len);
        auto body = std::span<const uint8_t>(buf.data() + body_start, cur.pos - body_start);
        if (crc32_of(body) != seg_crc) {
            raise(Errc::ChecksumMismatch, "pool segment checksum mismatch");
        }
        pool.segments_.push_back(std::move(seg));
    }

    uint32_t nledger = cur.u32();
    pool.ledger_.reserve(nledger);
    for (uint32_t e = 0; e < nledger; ++e) {
        LedgerEntry entry;
        auto idb = cur.bytes(16);
        std::copy(idb.begin(), idb.end(), entry.key_id.begin());
        uint32_t nparts = cur.u32();
        for (uint32_t p = 0; p < nparts; ++p) {
            LedgerPart part;
            part.segment_id = cur.u64();
            part.start = cur.u64();
            part.end = cur.u64();
            entry.parts.push_back(part);
        }
        pool.ledger_.push_back(std::move(entry));
    }
    return pool;
}

} // namespace qkdvault
