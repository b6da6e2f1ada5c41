#include "qkdvault/bitvec.hpp"

#include <bit>
#include <zlib.h>

#include "qkdvault/errors.hpp"

namespace qkdvault {

BitVec BitVec::from_string(std::string_view bits) {
    BitVec v(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        char c = bits[i];
        if (c == '1') {
            v.set(i, true);
        } else if (c != '0') {
            raise(Errc::InvalidArgument, "bit string may contain only 0 and 1");
        }
    }
    return v;
}

BitVec BitVec::from_bytes_msb_first(std::span<const uint8_t> bytes, size_t bit_count) {
    if (bit_count > bytes.size() * 8) {
        raise(Errc::InvalidArgument, "bit count exceeds byte payload");
    }
    BitVec v(bit_count);
    for (size_t i = 0; i < bit_count; ++i) {
        uint8_t byte = bytes[i >> 3];
        if ((byte >> (7 - (i & 7))) & 1u) v.set(i, true);
    }
    return v;
}

BitVec BitVec::random(size_t n, Rng& rng) {
    BitVec v(n);
    for (auto& w : v.words_) w = rng.next_u64();
    v.clear_tail();
    return v;
}

void BitVec::clear_tail() {
    size_t rem = size_ & 63;
    if (rem != 0 && !words_.empty()) {
        words_.back() &= (1ULL << rem) - 1;
    }
}

int BitVec::parity() const {
    uint64_t acc = 0;
    for (uint64_t w : words_) acc ^= w;
    return std::popcount(acc) & 1;
}

int BitVec::parity_range(size_t lo, size_t hi) const {
    if (lo >= hi) return 0;
    size_t wlo = lo >> 6, whi = (hi - 1) >> 6;
    uint64_t first_mask = ~0ULL << (lo & 63);
    uint64_t last_mask = (hi & 63) ? ((1ULL << (hi & 63)) - 1) : ~0ULL;
    if (wlo == whi) {
        return std::popcount(words_[wlo] & first_mask & last_mask) & 1;
    }
    uint64_t acc = words_[wlo] & first_mask;
    for (size_t w = wlo + 1; w < whi; ++w) acc ^= words_[w];
    int p = std::popcount(acc) & 1;
    p ^= std::popcount(words_[whi] & last_mask) & 1;
    return p;
}

size_t BitVec::count_ones() const {
    size_t total = 0;
    for (uint64_t w : words_) total += static_cast<size_t>(std::popcount(w));
    return total;
}

BitVec BitVec::slice(size_t lo, size_t hi) const {
    if (lo > hi || hi > size_) {
        raise(Errc::InvalidArgument, "slice bounds out of range");
    }
    BitVec out(hi - lo);
    size_t shift = lo & 63;
    size_t wlo = lo >> 6;
    for (size_t w = 0; w < out.words_.size(); ++w) {
        uint64_t lowpart = words_[wlo + w] >> shift;
        uint64_t highpart = 0;
        if (shift != 0 && wlo + w + 1 < words_.size()) {
            highpart = words_[wlo + w + 1] << (64 - shift);
        }
        out.words_[w] = lowpart | highpart;
    }
    out.clear_tail();
    return out;
}

void BitVec::append(const BitVec& other) {
    for (size_t i = 0; i < other.size_; ++i) push_back(other.get(i) != 0);
}

BitVec BitVec::operator^(const BitVec& other) const {
    BitVec out = *this;
    out.xor_with(other);
    return out;
}

void BitVec::xor_with(const BitVec& other) {
    if (size_ != other.size_) {
        raise(Errc::KeyLengthMismatch, "xor of unequal-length bit strings");
    }
    for (size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
}

bool BitVec::operator==(const BitVec& other) const {
    return size_ == other.size_ && words_ == other.words_;
}

size_t BitVec::hamming_distance(const BitVec& other) const {
    if (size_ != other.size_) {
        raise(Errc::InvalidArgument, "hamming distance of unequal lengths");
    }
    size_t total = 0;
    for (size_t w = 0; w < words_.size(); ++w) {
        total += static_cast<size_t>(std::popcount(words_[w] ^ other.words_[w]));
    }
    return total;
}

std::string BitVec::to_string() const {
    std::string s(size_, '0');
    for (size_t i = 0; i < size_; ++i) {
        if (get(i)) s[i] = '1';
    }
    return s;
}

std::vector<uint8_t> BitVec::to_bytes_msb_first() const {
    std::vector<uint8_t> bytes((size_ + 7) / 8, 0);
    for (size_t i = 0; i < size_; ++i) {
        if (get(i)) bytes[i >> 3] |= static_cast<uint8_t>(1u << (7 - (i & 7)));
    }
    return bytes;
}

uint32_t crc32_of(std::span<const uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
    return static_cast<uint32_t>(crc);
}

uint32_t crc32_of(const BitVec& bits) {
    auto bytes = bits.to_bytes_msb_first();
    return crc32_of(std::span<const uint8_t>(bytes.data(), bytes.size()));
}

std::string to_hex(std::span<const uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    raise(Errc::InvalidArgument, "bad hex digit");
}

std::vector<uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        raise(Errc::InvalidArgument, "hex string must have even length");
    }
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<uint8_t>((hex_nibble(hex[2 * i]) << 4) | hex_nibble(hex[2 * i + 1]));
    }
    return out;
}

} // namespace qkdvault
