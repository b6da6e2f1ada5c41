#include "qkdvault/digest.hpp"

#include <openssl/evp.h>
#include <vector>

#include "qkdvault/errors.hpp"

namespace qkdvault {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data) {
    std::array<uint8_t, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        raise(Errc::Io, "sha256 digest failed");
    }
    return out;
}

std::array<uint8_t, 32> iterated_digest(std::span<const uint8_t> salt,
                                        std::span<const uint8_t> secret,
                                        size_t iterations) {
    std::vector<uint8_t> buf(salt.begin(), salt.end());
    buf.insert(buf.end(), secret.begin(), secret.end());
    std::array<uint8_t, 32> h = sha256(buf);
    std::vector<uint8_t> round(salt.size() + h.size());
    for (size_t i = 1; i < iterations; ++i) {
        std::copy(salt.begin(), salt.end(), round.begin());
        std::copy(h.begin(), h.end(), round.begin() + static_cast<long>(salt.size()));
        h = sha256(round);
    }
    return h;
}

} // namespace qkdvault
