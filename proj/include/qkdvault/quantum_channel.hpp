#pragma once

#include <cstdint>
#include <vector>

#include "qkdvault/rng.hpp"

namespace qkdvault {

struct AdversaryStrategy;

enum class Basis : uint8_t {
    Rectilinear = 0, // "+"
    Diagonal = 1,    // "x"
};

inline char basis_symbol(Basis b) { return b == Basis::Rectilinear ? '+' : 'x'; }

// One simulated polarized photon. Photons are symbolic (basis, bit) pairs:
// for the four states used here this reproduces exact quantum statistics.
// A photon can be measured once; the measured flag enforces that at the API
// level. noise_flip is set by the channel and applies to a matching-basis
// readout only.
struct PhotonState {
    Basis basis = Basis::Rectilinear;
    uint8_t bit = 0;
    bool noise_flip = false;
    bool measured = false;

    // 0, 90, 45 or 135 degrees.
    int polarization_degrees() const {
        if (basis == Basis::Rectilinear) return bit == 0 ? 0 : 90;
        return bit == 0 ? 45 : 135;
    }
};

// Per-photon channel model: independent loss, then an independent bit-flip
// mark on the receiver's matching-basis outcome. All channel randomness
// comes from `seed`.
struct ChannelConfig {
    double flip_probability = 0.0;
    double loss_probability = 0.0;
    uint64_t seed = 0;

    ChannelConfig() = default;
    ChannelConfig(double flip, double loss, uint64_t seed_value);
};

struct TransmissionRecord {
    size_t sent_count = 0;
    // Strictly increasing original indices of photons Bob detected.
    std::vector<uint32_t> detected_indices;
    // Photons as they arrive, post-adversary and post-noise, parallel to
    // detected_indices.
    std::vector<PhotonState> received_photons;
};

PhotonState encode(int bit, Basis basis);

// Matching basis returns the encoded bit (xor the channel's noise mark);
// mismatched basis returns a fair coin. Either way the photon is destroyed.
int measure(PhotonState& photon, Basis measurement_basis, Rng& rng);

TransmissionRecord transmit(std::vector<PhotonState> photons,
                            const ChannelConfig& config,
                            const AdversaryStrategy& adversary);

} // namespace qkdvault
