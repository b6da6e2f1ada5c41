#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qkdvault/bitvec.hpp"

namespace qkdvault {

using KeyId = std::array<uint8_t, 16>;

std::string key_id_hex(const KeyId& id);
KeyId key_id_from_hex(const std::string& hex);

struct PlainText {
    BitVec bits;

    static PlainText from_bytes(std::span<const uint8_t> bytes) {
        return {BitVec::from_bytes_msb_first(bytes)};
    }
    std::vector<uint8_t> to_bytes() const { return bits.to_bytes_msb_first(); }
};

struct CipherText {
    BitVec bits;
    KeyId key_id{};
};

// Single-use key segment. Copies share the consumption latch, so exactly one
// encrypt ever wins no matter how the key value travels.
class OtpKey {
public:
    OtpKey(KeyId id, BitVec bits)
        : id_(id), bits_(std::move(bits)), used_(std::make_shared<std::atomic<bool>>(false)) {}

    const KeyId& id() const { return id_; }
    const BitVec& bits() const { return bits_; }
    size_t size() const { return bits_.size(); }
    bool used() const { return used_->load(std::memory_order_acquire); }

    // False->true exactly once across all copies; the single winner gets true.
    bool try_consume() { return !used_->exchange(true, std::memory_order_acq_rel); }

    // Test/demo-only escape hatch: a fresh latch over the same material, so a
    // deliberate second use becomes expressible. The production path never
    // needs this; keys handed out by the keystore are fresh by construction.
    static OtpKey unsafe_for_reuse_demo(KeyId id, BitVec bits) {
        return OtpKey(id, std::move(bits));
    }

private:
    KeyId id_;
    BitVec bits_;
    std::shared_ptr<std::atomic<bool>> used_;
};

// C = M xor K. Requires an unused key of exactly the message length; marks
// the key used atomically with success.
CipherText encrypt(const PlainText& message, OtpKey& key);

// M = C xor K. The key id must match the ciphertext's.
PlainText decrypt(const CipherText& cipher, const OtpKey& key);
PlainText decrypt_with_bits(const CipherText& cipher, const BitVec& key_bits);

// c1 xor c2 for two ciphertexts made with one key: equals p1 xor p2, the
// leakage that the single-use rule exists to prevent.
BitVec reuse_attack_demo(const CipherText& c1, const CipherText& c2);

// Cipher file format: magic "QOTP1", key id (16 bytes), bit length (8-byte
// big-endian), packed bits MSB-first.
void write_cipher_file(const std::filesystem::path& path, const CipherText& cipher);
CipherText read_cipher_file(const std::filesystem::path& path);

} // namespace qkdvault
