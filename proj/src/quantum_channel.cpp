#include "qkdvault/quantum_channel.hpp"

#include "qkdvault/adversary.hpp"
#include "qkdvault/errors.hpp"

namespace qkdvault {

ChannelConfig::ChannelConfig(double flip, double loss, uint64_t seed_value)
    : flip_probability(flip), loss_probability(loss), seed(seed_value) {
    if (!(flip >= 0.0 && flip <= 1.0)) {
        raise(Errc::InvalidArgument, "flip_probability outside [0,1]");
    }
    if (!(loss >= 0.0 && loss <= 1.0)) {
        raise(Errc::InvalidArgument, "loss_probability outside [0,1]");
    }
}

PhotonState encode(int bit, Basis basis) {
    if (bit != 0 && bit != 1) {
        raise(Errc::InvalidArgument, "bit must be 0 or 1");
    }
    PhotonState p;
    p.basis = basis;
    p.bit = static_cast<uint8_t>(bit);
    return p;
}

int measure(PhotonState& photon, Basis measurement_basis, Rng& rng) {
    if (photon.measured) {
        raise(Errc::ContractViolation, "photon has already been measured");
    }
    photon.measured = true;
    if (measurement_basis == photon.basis) {
        return photon.bit ^ (photon.noise_flip ? 1 : 0);
    }
    return rng.bit();
}

TransmissionRecord transmit(std::vector<PhotonState> photons,
                            const ChannelConfig& config,
                            const AdversaryStrategy& adversary) {
    if (photons.empty()) {
        raise(Errc::InvalidArgument, "transmit requires at least one photon");
    }
    Rng channel_rng(Rng::derive(config.seed, 0x6368616eULL)); // "chan"
    Rng eve_rng(Rng::derive(config.seed, 0x657665ULL));       // "eve"

    TransmissionRecord record;
    record.sent_count = photons.size();
    record.detected_indices.reserve(photons.size());
    record.received_photons.reserve(photons.size());

    for (size_t i = 0; i < photons.size(); ++i) {
        PhotonState p = tap(photons[i], adversary, eve_rng);
        if (config.loss_probability > 0.0 && channel_rng.bernoulli(config.loss_probability)) {
            continue;
        }
        if (config.flip_probability > 0.0 && channel_rng.bernoulli(config.flip_probability)) {
            p.noise_flip = !p.noise_flip;
        }
        record.detected_indices.push_back(static_cast<uint32_t>(i));
        record.received_photons.push_back(p);
    }
    return record;
}

} // namespace qkdvault
