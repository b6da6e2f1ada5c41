#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkdvault/adversary.hpp"
#include "qkdvault/auth.hpp"
#include "qkdvault/bitvec.hpp"
#include "qkdvault/quantum_channel.hpp"
#include "qkdvault/transcript.hpp"

namespace qkdvault {

struct AliceState {
    BitVec bits;              // X_1..X_N
    std::vector<Basis> bases; // length N
};

struct BobState {
    static constexpr int8_t kAbsent = -1;
    std::vector<Basis> bases;         // length N
    std::vector<int8_t> measurements; // length N; kAbsent when undetected
};

struct SessionParams {
    size_t photon_count = 0;
    // Sifted bits publicly disclosed for the error estimate; 19 samples push
    // the full-intercept detection probability 1-(3/4)^19 past 99.5%.
    size_t sample_size = 19;
    double qber_threshold = 0.11;
    size_t security_margin = 30;
    uint64_t seed = 0;

    void validate() const;
};

enum class SessionStatus { Established, AbortedQber, AbortedLength, AbortedAuth };
const char* status_name(SessionStatus status);

struct QkdSessionResult {
    SessionStatus status = SessionStatus::AbortedLength;
    size_t sifted_length = 0;
    double estimated_qber = 0.0;
    size_t disclosed_bits = 0; // sample + parity leakage
    size_t parity_leakage = 0;
    std::optional<BitVec> final_key;
    Transcript transcript;
};

struct RawExchange {
    AliceState alice;
    BobState bob;
    TransmissionRecord record;
};

// Fixed bit/basis streams for replaying a known exchange.
struct SessionScript {
    BitVec alice_bits;
    std::vector<Basis> alice_bases;
    std::vector<Basis> bob_bases;
};

// The worked 8-photon exchange: kept photons {2,3,5,6,8} (1-based), sifted
// key 11010.
SessionScript table2_script();

RawExchange generate_raw(const SessionParams& params, const ChannelConfig& channel,
                         const AdversaryStrategy& adversary);
RawExchange generate_raw_scripted(const SessionScript& script, const ChannelConfig& channel,
                                  const AdversaryStrategy& adversary, uint64_t seed);

struct SiftResult {
    BitVec alice_sifted;
    BitVec bob_sifted;
    std::vector<uint32_t> kept_indices; // 0-based photon indices
};
SiftResult sift(const AliceState& alice, const BobState& bob, const TransmissionRecord& record);

struct QberEstimate {
    double qber = 0.0;
    BitVec remaining_alice;
    BitVec remaining_bob;
    std::vector<uint32_t> sample_indices; // positions within the sifted strings
    size_t mismatches = 0;
};
QberEstimate estimate_qber(const BitVec& alice_sifted, const BitVec& bob_sifted,
                           size_t sample_size, Rng& rng);

// Full pipeline: raw exchange, sifting, QBER estimate with abort on strict
// excess of the threshold, two-pass reconciliation, Toeplitz amplification.
// When auth is present every classical message carries a one-time tag and
// any forgery aborts the session as AbortedAuth.
QkdSessionResult run_session(const SessionParams& params, const ChannelConfig& channel,
                             const AdversaryStrategy& adversary, AuthSecret* auth = nullptr);

std::string session_summary_csv_header();
std::string session_summary_csv_row(const SessionParams& params, const ChannelConfig& channel,
                                    const AdversaryStrategy& adversary,
                                    const QkdSessionResult& result);

} // namespace qkdvault
