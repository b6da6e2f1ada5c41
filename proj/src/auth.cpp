#include "qkdvault/auth.hpp"

#include <cstring>
#include <limits>
#include <vector>

#include "qkdvault/bitvec.hpp"
#include "qkdvault/digest.hpp"
#include "qkdvault/errors.hpp"

namespace qkdvault {

namespace {

using u128 = unsigned __int128;

constexpr u128 kPrime = ((static_cast<u128>(1) << 127) - 1); // Mersenne 2^127-1

u128 fold(u128 x) {
    x = (x & kPrime) + (x >> 127);
    if (x >= kPrime) x -= kPrime;
    return x;
}

u128 add_mod(u128 a, u128 b) {
    // a, b < kPrime so the sum fits in 128 bits.
    return fold(a + b);
}

u128 mul_mod(u128 a, u128 b) {
    uint64_t a0 = static_cast<uint64_t>(a), a1 = static_cast<uint64_t>(a >> 64);
    uint64_t b0 = static_cast<uint64_t>(b), b1 = static_cast<uint64_t>(b >> 64);
    u128 p00 = static_cast<u128>(a0) * b0;
    u128 p01 = static_cast<u128>(a0) * b1;
    u128 p10 = static_cast<u128>(a1) * b0;
    u128 p11 = static_cast<u128>(a1) * b1;

    u128 mid = p01 + p10;
    u128 carry = (mid < p01) ? 1 : 0; // overflow of the 128-bit sum

    // value = p11*2^128 + carry*2^192 + mid*2^64 + p00 with 2^128 ≡ 2 (mod p).
    uint64_t mid_lo = static_cast<uint64_t>(mid);
    uint64_t mid_hi = static_cast<uint64_t>(mid >> 64);

    u128 acc = fold(p00);
    acc = add_mod(acc, fold(static_cast<u128>(mid_lo) << 64));
    acc = add_mod(acc, fold(fold(p11) << 1));
    acc = add_mod(acc, fold(static_cast<u128>(mid_hi) << 1));
    acc = add_mod(acc, fold(carry << 65));
    return acc;
}

u128 u128_from_bytes_le(const uint8_t* p, size_t n) {
    u128 v = 0;
    for (size_t i = 0; i < n; ++i) v |= static_cast<u128>(p[i]) << (8 * i);
    return v;
}

u128 derive_point(const AuthSecret& auth) {
    u128 r = u128_from_bytes_le(auth.key_bits.data(), 16);
    r = fold(r);
    if (r == 0) r = 1;
    return r;
}

u128 derive_pad(const AuthSecret& auth, uint64_t seq) {
    std::array<uint8_t, 24> material{};
    std::memcpy(material.data(), auth.key_bits.data() + 16, 16);
    for (int i = 0; i < 8; ++i) {
        material[16 + i] = static_cast<uint8_t>(seq >> (8 * i));
    }
    auto h = sha256(material);
    return fold(u128_from_bytes_le(h.data(), 16));
}

} // namespace

AuthSecret AuthSecret::random(Rng& rng) {
    AuthSecret s;
    for (size_t i = 0; i < s.key_bits.size(); i += 8) {
        uint64_t w = rng.next_u64();
        for (size_t j = 0; j < 8; ++j) {
            s.key_bits[i + j] = static_cast<uint8_t>(w >> (8 * j));
        }
    }
    return s;
}

AuthSecret AuthSecret::from_hex(const std::string& hex) {
    auto bytes = qkdvault::from_hex(hex);
    if (bytes.size() != 32) {
        raise(Errc::InvalidArgument, "auth secret must be 32 bytes of hex");
    }
    AuthSecret s;
    std::copy(bytes.begin(), bytes.end(), s.key_bits.begin());
    return s;
}

std::string AuthSecret::to_hex() const {
    return qkdvault::to_hex(std::span<const uint8_t>(key_bits.data(), key_bits.size()));
}

AuthTag compute_tag(std::span<const uint8_t> message, uint64_t seq, const AuthSecret& auth) {
    u128 r = derive_point(auth);

    // Header block binds the sequence number and the message length.
    u128 acc = fold((static_cast<u128>(seq) << 64) | static_cast<u128>(message.size()));
    acc = mul_mod(acc, r);

    // 15-byte blocks keep every block value below the modulus, so the
    // delimiter bit makes the block encoding injective.
    for (size_t off = 0; off < message.size(); off += 15) {
        size_t n = std::min<size_t>(15, message.size() - off);
        u128 block = u128_from_bytes_le(message.data() + off, n);
        block |= static_cast<u128>(1) << (8 * n);
        acc = add_mod(acc, block);
        acc = mul_mod(acc, r);
    }

    acc = add_mod(acc, derive_pad(auth, seq));

    AuthTag tag{};
    for (size_t i = 0; i < tag.size(); ++i) {
        tag[i] = static_cast<uint8_t>(acc >> (8 * i));
    }
    return tag;
}

TaggedMessage authenticate_message(std::span<const uint8_t> message, AuthSecret& auth) {
    if (auth.counter == std::numeric_limits<uint64_t>::max()) {
        raise(Errc::CounterExhausted, "authentication counter exhausted");
    }
    TaggedMessage out;
    out.seq = auth.counter++;
    out.tag = compute_tag(message, out.seq, auth);
    return out;
}

namespace detail {
unsigned __int128 mac_fold(unsigned __int128 x) { return fold(x); }
unsigned __int128 mac_mul_mod(unsigned __int128 a, unsigned __int128 b) { return mul_mod(a, b); }
} // namespace detail

bool verify_message(std::span<const uint8_t> message, const AuthTag& tag, uint64_t seq,
                    AuthSecret& auth) {
    if (seq < auth.next_expected) return false; // replayed or stale counter
    AuthTag expect = compute_tag(message, seq, auth);
    // Constant-time-ish comparison; timing is not in the threat model here
    // but it costs nothing.
    uint8_t diff = 0;
    for (size_t i = 0; i < tag.size(); ++i) diff |= static_cast<uint8_t>(tag[i] ^ expect[i]);
    if (diff != 0) return false;
    auth.next_expected = seq + 1;
    return true;
}

} // namespace qkdvault
