#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkdvault/rng.hpp"

namespace qkdvault {

// Packed bit string. Bit i lives at words()[i/64] bit (i%64). Byte
// serialization is most-significant-bit first: payload byte b expands to
// bits (b>>7)&1, (b>>6)&1, ..., b&1 in increasing bit-index order, so
// "1101" round-trips with 0xD0 in the top nibble of the first byte.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(size_t n) : size_(n), words_((n + 63) / 64, 0) {}

    static BitVec from_string(std::string_view bits);
    static BitVec from_bytes_msb_first(std::span<const uint8_t> bytes, size_t bit_count);
    static BitVec from_bytes_msb_first(std::span<const uint8_t> bytes) {
        return from_bytes_msb_first(bytes, bytes.size() * 8);
    }
    static BitVec random(size_t n, Rng& rng);

    size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    int get(size_t i) const {
        return static_cast<int>((words_[i >> 6] >> (i & 63)) & 1u);
    }
    void set(size_t i, bool v) {
        uint64_t mask = 1ULL << (i & 63);
        if (v) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }
    void flip(size_t i) { words_[i >> 6] ^= 1ULL << (i & 63); }

    void push_back(bool v) {
        if ((size_ & 63) == 0) words_.push_back(0);
        if (v) words_[size_ >> 6] |= 1ULL << (size_ & 63);
        ++size_;
    }

    // Parity (XOR) of all bits.
    int parity() const;
    // Parity of bits in [lo, hi).
    int parity_range(size_t lo, size_t hi) const;
    size_t count_ones() const;

    // Bits [lo, hi) as a new vector.
    BitVec slice(size_t lo, size_t hi) const;
    void append(const BitVec& other);

    // XOR of equal-length vectors; length mismatch is the caller's bug and
    // surfaces as KeyLengthMismatch from the cipher layer, so this asserts
    // via exception too.
    BitVec operator^(const BitVec& other) const;
    void xor_with(const BitVec& other);

    bool operator==(const BitVec& other) const;
    bool operator!=(const BitVec& other) const { return !(*this == other); }

    size_t hamming_distance(const BitVec& other) const;

    std::string to_string() const;
    std::vector<uint8_t> to_bytes_msb_first() const;

    const std::vector<uint64_t>& words() const { return words_; }
    std::vector<uint64_t>& words_mut() { return words_; }

private:
    void clear_tail();

    size_t size_ = 0;
    std::vector<uint64_t> words_;
};

// CRC-32 (zlib) over the MSB-first packed byte form; used for reconciliation
// checksums and pool segment integrity.
uint32_t crc32_of(const BitVec& bits);
uint32_t crc32_of(std::span<const uint8_t> bytes);

std::string to_hex(std::span<const uint8_t> bytes);
std::vector<uint8_t> from_hex(std::string_view hex);

} // namespace qkdvault
