#include "qkdvault/bb84.hpp"

#include <algorithm>
#include <sstream>

#include "qkdvault/classical_channel.hpp"
#include "qkdvault/errors.hpp"
#include "qkdvault/privacy_amplification.hpp"
#include "qkdvault/reconcile.hpp"

namespace qkdvault {

namespace {

// Fixed per-session stream ids for deriving independent generators.
constexpr uint64_t kAliceStream = 1;
constexpr uint64_t kBobStream = 2;
constexpr uint64_t kSampleStream = 3;
constexpr uint64_t kCascadeStream = 4;
constexpr uint64_t kPaStream = 5;
constexpr uint64_t kChannelStream = 6;

Basis random_basis(Rng& rng) {
    return rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
}

BobState measure_received(const std::vector<Basis>& bob_bases, TransmissionRecord& record,
                          Rng& bob_rng) {
    BobState bob;
    bob.bases = bob_bases;
    bob.measurements.assign(bob_bases.size(), BobState::kAbsent);
    for (size_t k = 0; k < record.detected_indices.size(); ++k) {
        uint32_t idx = record.detected_indices[k];
        bob.measurements[idx] = static_cast<int8_t>(
            measure(record.received_photons[k], bob.bases[idx], bob_rng));
    }
    return bob;
}

BitVec detected_bitmap(const TransmissionRecord& record) {
    BitVec map(record.sent_count);
    for (uint32_t idx : record.detected_indices) map.set(idx, true);
    return map;
}

BitVec bases_bitmap(const std::vector<Basis>& bases, const std::vector<uint32_t>& at) {
    BitVec map(at.size());
    for (size_t k = 0; k < at.size(); ++k) {
        if (bases[at[k]] == Basis::Diagonal) map.set(k, true);
    }
    return map;
}

} // namespace

void SessionParams::validate() const {
    if (photon_count == 0) {
        raise(Errc::InvalidArgument, "photon_count must be positive");
    }
    if (!(qber_threshold > 0.0 && qber_threshold < 1.0)) {
        raise(Errc::InvalidArgument, "qber_threshold must lie in (0,1)");
    }
}

const char* status_name(SessionStatus status) {
    switch (status) {
        case SessionStatus::Established: return "Established";
        case SessionStatus::AbortedQber: return "AbortedQber";
        case SessionStatus::AbortedLength: return "AbortedLength";
        case SessionStatus::AbortedAuth: return "AbortedAuth";
    }
    return "Unknown";
}

SessionScript table2_script() {
    SessionScript s;
    s.alice_bits = BitVec::from_string("01100100");
    s.alice_bases = {Basis::Rectilinear, Basis::Diagonal, Basis::Rectilinear, Basis::Diagonal,
                     Basis::Rectilinear, Basis::Diagonal, Basis::Rectilinear, Basis::Diagonal};
    s.bob_bases = {Basis::Diagonal, Basis::Diagonal, Basis::Rectilinear, Basis::Rectilinear,
                   Basis::Rectilinear, Basis::Diagonal, Basis::Diagonal, Basis::Diagonal};
    return s;
}

RawExchange generate_raw(const SessionParams& params, const ChannelConfig& channel,
                         const AdversaryStrategy& adversary) {
    params.validate();
    const size_t n = params.photon_count;

    Rng alice_rng(Rng::derive(params.seed, kAliceStream));
    Rng bob_rng(Rng::derive(params.seed, kBobStream));

    RawExchange out;
    out.alice.bits = BitVec(n);
    out.alice.bases.resize(n);
    std::vector<PhotonState> photons(n);
    for (size_t i = 0; i < n; ++i) {
        int bit = alice_rng.bit();
        Basis basis = random_basis(alice_rng);
        if (bit) out.alice.bits.set(i, true);
        out.alice.bases[i] = basis;
        photons[i] = encode(bit, basis);
    }

    // The channel seed is mixed with the session seed so separate sessions
    // sharing one ChannelConfig see independent noise.
    ChannelConfig effective = channel;
    effective.seed = Rng::derive(params.seed, Rng::derive(channel.seed, kChannelStream));
    out.record = transmit(std::move(photons), effective, adversary);

    std::vector<Basis> bob_bases(n);
    for (size_t i = 0; i < n; ++i) bob_bases[i] = random_basis(bob_rng);
    out.bob = measure_received(bob_bases, out.record, bob_rng);
    return out;
}

RawExchange generate_raw_scripted(const SessionScript& script, const ChannelConfig& channel,
                                  const AdversaryStrategy& adversary, uint64_t seed) {
    const size_t n = script.alice_bits.size();
    if (n == 0 || script.alice_bases.size() != n || script.bob_bases.size() != n) {
        raise(Errc::InvalidArgument, "script streams must share one nonzero length");
    }

    RawExchange out;
    out.alice.bits = script.alice_bits;
    out.alice.bases = script.alice_bases;
    std::vector<PhotonState> photons(n);
    for (size_t i = 0; i < n; ++i) {
        photons[i] = encode(script.alice_bits.get(i), script.alice_bases[i]);
    }

    ChannelConfig effective = channel;
    effective.seed = Rng::derive(seed, Rng::derive(channel.seed, kChannelStream));
    out.record = transmit(std::move(photons), effective, adversary);

    Rng bob_rng(Rng::derive(seed, kBobStream));
    std::vector<Basis> bob_bases = script.bob_bases;
    out.bob = measure_received(bob_bases, out.record, bob_rng);
    return out;
}

SiftResult sift(const AliceState& alice, const BobState& bob, const TransmissionRecord& record) {
    const size_t n = alice.bits.size();
    if (alice.bases.size() != n || bob.bases.size() != n || bob.measurements.size() != n ||
        record.sent_count != n) {
        raise(Errc::SessionCorruption, "sift inputs come from different sessions");
    }
    SiftResult out;
    for (uint32_t idx : record.detected_indices) {
        if (bob.measurements[idx] == BobState::kAbsent) {
            raise(Errc::SessionCorruption, "detected photon lacks a measurement");
        }
        if (alice.bases[idx] == bob.bases[idx]) {
            out.kept_indices.push_back(idx);
            out.alice_sifted.push_back(alice.bits.get(idx) != 0);
            out.bob_sifted.push_back(bob.measurements[idx] != 0);
        }
    }
    return out;
}

QberEstimate estimate_qber(const BitVec& alice_sifted, const BitVec& bob_sifted,
                           size_t sample_size, Rng& rng) {
    const size_t n = alice_sifted.size();
    if (bob_sifted.size() != n) {
        raise(Errc::SessionCorruption, "sifted strings differ in length");
    }
    if (sample_size > n) {
        raise(Errc::InsufficientKey, "sample larger than the sifted key");
    }

    QberEstimate out;
    out.sample_indices = sample_without_replacement(n, sample_size, rng);

    BitVec sampled(n);
    for (uint32_t idx : out.sample_indices) {
        sampled.set(idx, true);
        if (alice_sifted.get(idx) != bob_sifted.get(idx)) ++out.mismatches;
    }
    out.qber = sample_size == 0
                   ? 0.0
                   : static_cast<double>(out.mismatches) / static_cast<double>(sample_size);

    out.remaining_alice = BitVec(n - sample_size);
    out.remaining_bob = BitVec(n - sample_size);
    size_t w = 0;
    for (size_t i = 0; i < n; ++i) {
        if (sampled.get(i)) continue;
        if (alice_sifted.get(i)) out.remaining_alice.set(w, true);
        if (bob_sifted.get(i)) out.remaining_bob.set(w, true);
        ++w;
    }
    return out;
}

QkdSessionResult run_session(const SessionParams& params, const ChannelConfig& channel,
                             const AdversaryStrategy& adversary, AuthSecret* auth) {
    params.validate();

    QkdSessionResult result;
    ClassicalChannel chan(&result.transcript, auth, adversary.forges_classical());

    try {
        RawExchange raw = generate_raw(params, channel, adversary);

        chan.send_bits("bob", "detected", detected_bitmap(raw.record));
        chan.send_bits("bob", "bob_bases", bases_bitmap(raw.bob.bases, raw.record.detected_indices));
        chan.send_bits("alice", "alice_bases",
                       bases_bitmap(raw.alice.bases, raw.record.detected_indices));

        SiftResult sifted = sift(raw.alice, raw.bob, raw.record);
        result.sifted_length = sifted.alice_sifted.size();

        if (params.sample_size > result.sifted_length) {
            result.status = SessionStatus::AbortedLength;
            return result;
        }

        Rng sample_rng(Rng::derive(params.seed, kSampleStream));
        QberEstimate estimate =
            estimate_qber(sifted.alice_sifted, sifted.bob_sifted, params.sample_size, sample_rng);
        result.estimated_qber = estimate.qber;
        result.disclosed_bits = params.sample_size;

        chan.send_u32_list("alice", "sample_indices", estimate.sample_indices);
        BitVec bob_sample(estimate.sample_indices.size());
        BitVec alice_sample(estimate.sample_indices.size());
        for (size_t k = 0; k < estimate.sample_indices.size(); ++k) {
            if (sifted.bob_sifted.get(estimate.sample_indices[k])) bob_sample.set(k, true);
            if (sifted.alice_sifted.get(estimate.sample_indices[k])) alice_sample.set(k, true);
        }
        chan.send_bits("bob", "bob_sample_bits", bob_sample);
        chan.send_bits("alice", "alice_sample_bits", alice_sample);

        // Abort on strict excess of the threshold.
        chan.send_u64("alice", "qber_decision",
                      result.estimated_qber > params.qber_threshold ? 0 : 1);
        if (result.estimated_qber > params.qber_threshold) {
            result.status = SessionStatus::AbortedQber;
            return result;
        }

        // Sizing estimate for reconciliation: a clean sample of k bits only
        // bounds the true error rate by ~3/(k+1) (rule of three), so blocks
        // are sized for that bound rather than for the raw point estimate.
        double sizing_qber = estimate.qber;
        if (params.sample_size > 0) {
            sizing_qber = std::max(sizing_qber,
                                   3.0 / static_cast<double>(params.sample_size + 1));
        }

        ReconcileResult reconciled;
        try {
            reconciled = error_correct(estimate.remaining_alice, estimate.remaining_bob,
                                       sizing_qber, Rng::derive(params.seed, kCascadeStream),
                                       &chan);
        } catch (const Error& e) {
            if (e.code() == Errc::ReconciliationFailure) {
                result.status = SessionStatus::AbortedQber;
                return result;
            }
            throw;
        }
        result.parity_leakage = reconciled.parity_leakage;
        result.disclosed_bits = params.sample_size + reconciled.parity_leakage;

        const size_t n_rec = estimate.remaining_alice.size();
        if (n_rec <= reconciled.parity_leakage + params.security_margin) {
            result.status = SessionStatus::AbortedLength;
            return result;
        }

        uint64_t pa_seed = Rng::derive(params.seed, kPaStream);
        chan.send_u64("alice", "pa_seed", pa_seed);
        result.final_key = privacy_amplify(estimate.remaining_alice, reconciled.parity_leakage,
                                           params.security_margin, pa_seed);
        result.status = SessionStatus::Established;
        return result;
    } catch (const Error& e) {
        if (e.code() == Errc::AuthenticationFailed) {
            result.status = SessionStatus::AbortedAuth;
            result.final_key.reset();
            return result;
        }
        if (e.code() == Errc::InsufficientKey) {
            result.status = SessionStatus::AbortedLength;
            result.final_key.reset();
            return result;
        }
        throw;
    }
}

std::string session_summary_csv_header() {
    return "seed,N,adversary,fraction,flip,loss,sifted_len,qber,status,final_len";
}

std::string session_summary_csv_row(const SessionParams& params, const ChannelConfig& channel,
                                    const AdversaryStrategy& adversary,
                                    const QkdSessionResult& result) {
    std::ostringstream os;
    os << params.seed << ',' << params.photon_count << ',' << adversary.label() << ','
       << adversary.tap_fraction() << ',' << channel.flip_probability << ','
       << channel.loss_probability << ',' << result.sifted_length << ',' << result.estimated_qber
       << ',' << status_name(result.status) << ','
       << (result.final_key ? result.final_key->size() : 0);
    return os.str();
}

} // namespace qkdvault
