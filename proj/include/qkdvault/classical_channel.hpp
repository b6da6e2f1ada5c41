#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qkdvault/auth.hpp"
#include "qkdvault/bitvec.hpp"
#include "qkdvault/transcript.hpp"

namespace qkdvault {

// The public classical channel between Alice and Bob. Every message lands in
// the transcript exactly as the receiver saw it. When an AuthSecret is
// attached, messages carry one-time tags and the receiver verifies them;
// when the adversary forges, payloads are tampered in flight and
// verification raises AuthenticationFailed (callers map it to AbortedAuth).
// Without authentication a forging adversary relays messages unmodified:
// tampering an unauthenticated exchange would only desynchronize the
// protocol, the attack value is already in the quantum tap.
class ClassicalChannel {
public:
    ClassicalChannel(Transcript* transcript, AuthSecret* secret, bool adversary_forges)
        : transcript_(transcript), secret_(secret), forges_(adversary_forges) {}

    void send(std::string_view sender, std::string_view kind, std::span<const uint8_t> payload);

    void send_bits(std::string_view sender, std::string_view kind, const BitVec& bits);
    void send_u32_list(std::string_view sender, std::string_view kind,
                       std::span<const uint32_t> values);
    void send_u64(std::string_view sender, std::string_view kind, uint64_t value);

    size_t messages_sent() const { return sent_; }

private:
    Transcript* transcript_;
    AuthSecret* secret_;
    bool forges_;
    uint64_t local_seq_ = 0; // used when no secret provides counters
    size_t sent_ = 0;
};

// Canonical little-endian payload encodings shared with tests.
std::vector<uint8_t> encode_u64(uint64_t value);
std::vector<uint8_t> encode_u32_list(std::span<const uint32_t> values);
std::vector<uint8_t> encode_bits(const BitVec& bits);

} // namespace qkdvault
