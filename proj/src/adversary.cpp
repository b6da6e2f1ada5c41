#include "qkdvault/adversary.hpp"

#include <cmath>

#include "qkdvault/errors.hpp"

namespace qkdvault {

AdversaryStrategy AdversaryStrategy::intercept_resend(double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        raise(Errc::InvalidArgument, "intercept fraction outside [0,1]");
    }
    AdversaryStrategy s;
    s.kind = Kind::InterceptResend;
    s.fraction = fraction;
    return s;
}

std::string AdversaryStrategy::label() const {
    switch (kind) {
        case Kind::None: return "none";
        case Kind::InterceptResend: return "intercept-resend";
        case Kind::MitmImpersonate: return "mitm";
    }
    return "none";
}

PhotonState tap(PhotonState photon, const AdversaryStrategy& strategy, Rng& rng) {
    if (photon.measured) {
        raise(Errc::ContractViolation, "adversary cannot tap a measured photon");
    }
    double f = strategy.tap_fraction();
    if (f <= 0.0) return photon;
    if (f < 1.0 && !rng.bernoulli(f)) return photon;

    Basis eve_basis = rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
    int outcome = measure(photon, eve_basis, rng);
    return encode(outcome, eve_basis);
}

double expected_qber(const AdversaryStrategy& strategy, double flip_probability) {
    double f = strategy.tap_fraction();
    return f / 4.0 + flip_probability * (1.0 - f / 2.0);
}

double detection_probability(const AdversaryStrategy& strategy, size_t sample_size) {
    double q = expected_qber(strategy, 0.0);
    return 1.0 - std::pow(1.0 - q, static_cast<double>(sample_size));
}

} // namespace qkdvault
