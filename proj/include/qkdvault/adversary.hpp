#pragma once

#include <cstddef>
#include <string>

#include "qkdvault/quantum_channel.hpp"
#include "qkdvault/rng.hpp"

namespace qkdvault {

// Attacker behavior on the quantum channel. InterceptResend taps each photon
// independently with the given probability; Eve measures it in a uniformly
// random basis and re-sends her outcome in that basis. MitmImpersonate taps
// everything and additionally forges classical messages; forgeries only
// succeed when the classical channel is unauthenticated.
struct AdversaryStrategy {
    enum class Kind { None, InterceptResend, MitmImpersonate };

    Kind kind = Kind::None;
    double fraction = 0.0;             // InterceptResend tap probability
    bool authenticated_channel = false; // MitmImpersonate: victim uses auth tags

    static AdversaryStrategy none() { return {}; }
    static AdversaryStrategy intercept_resend(double fraction);
    static AdversaryStrategy mitm(bool authenticated_channel) {
        AdversaryStrategy s;
        s.kind = Kind::MitmImpersonate;
        s.fraction = 1.0;
        s.authenticated_channel = authenticated_channel;
        return s;
    }

    double tap_fraction() const {
        switch (kind) {
            case Kind::None: return 0.0;
            case Kind::InterceptResend: return fraction;
            case Kind::MitmImpersonate: return 1.0;
        }
        return 0.0;
    }

    bool forges_classical() const { return kind == Kind::MitmImpersonate; }

    std::string label() const;
};

// Applies the strategy to one in-flight photon. The original photon is
// consumed; the returned photon carries Eve's basis and outcome when she
// intercepted, and is untouched otherwise.
PhotonState tap(PhotonState photon, const AdversaryStrategy& strategy, Rng& rng);

// Closed-form sifted-bit error rate under the strategy with channel flip
// probability c: f/4 + c*(1 - f/2) where f is the tapped fraction. At c = 0
// this is exactly f/4 (0.25 for MitmImpersonate).
double expected_qber(const AdversaryStrategy& strategy, double flip_probability);

// Probability that a disclosed sample of the given size contains at least
// one disturbed bit: 1 - (1 - q)^sample_size with q = expected_qber(s, 0).
double detection_probability(const AdversaryStrategy& strategy, size_t sample_size);

} // namespace qkdvault
