#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace qkdvault {

std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);

// Salted iterated credential digest: iterations of sha256(salt || previous).
std::array<uint8_t, 32> iterated_digest(std::span<const uint8_t> salt,
                                        std::span<const uint8_t> secret,
                                        size_t iterations);

} // namespace qkdvault
