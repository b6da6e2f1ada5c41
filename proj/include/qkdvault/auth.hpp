#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "qkdvault/rng.hpp"

namespace qkdvault {

using AuthTag = std::array<uint8_t, 16>;

// Pre-shared classical-channel authentication secret. 256 bits of key
// material split into an evaluation-point half and a per-message pad half;
// the counter makes each tag one-time. A counter value is never issued
// twice within one secret's lifetime.
struct AuthSecret {
    std::array<uint8_t, 32> key_bits{};
    uint64_t counter = 0;       // next sequence number to issue
    uint64_t next_expected = 0; // receiver-side freshness watermark

    static AuthSecret random(Rng& rng);
    static AuthSecret from_hex(const std::string& hex);
    std::string to_hex() const;
};

struct TaggedMessage {
    uint64_t seq = 0;
    AuthTag tag{};
};

// Keyed one-time tag: polynomial evaluation over GF(2^127 - 1) of the
// message blocks at a key-derived point, masked with a pad derived from
// (key, counter). Issuing a tag consumes the secret's current counter.
TaggedMessage authenticate_message(std::span<const uint8_t> message, AuthSecret& auth);

// True iff the tag matches (message, seq) under this secret and seq has not
// been accepted before (freshness moves the watermark forward on success).
bool verify_message(std::span<const uint8_t> message, const AuthTag& tag, uint64_t seq,
                    AuthSecret& auth);

// Tag recomputation without freshness bookkeeping; used by tests.
AuthTag compute_tag(std::span<const uint8_t> message, uint64_t seq, const AuthSecret& auth);

namespace detail {
// Field arithmetic over 2^127-1, exposed for the algebraic unit tests.
unsigned __int128 mac_fold(unsigned __int128 x);
unsigned __int128 mac_mul_mod(unsigned __int128 a, unsigned __int128 b);
} // namespace detail

} // namespace qkdvault
