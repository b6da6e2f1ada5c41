#pragma once

#include <cstdint>
#include <vector>

#include "qkdvault/bitvec.hpp"
#include "qkdvault/classical_channel.hpp"
#include "qkdvault/rng.hpp"

namespace qkdvault {

struct ReconcileResult {
    BitVec corrected_bob;
    size_t parity_leakage = 0; // total parity bits Alice disclosed
    size_t pass1_leakage = 0;
    size_t pass2_leakage = 0;
};

// Two-pass block-parity reconciliation. Pass 1 partitions the strings into
// blocks sized from the QBER estimate, compares block parities and
// binary-searches every odd block down to one flip. Pass 2 repeats on a
// seeded permutation; corrections made there re-open the pass-1 block that
// contains the flipped bit (and vice versa) until every block in both
// partitions has matching parity. A disclosed CRC-32 of Alice's string
// closes the exchange; on mismatch this raises ReconciliationFailure, which
// sessions map to AbortedQber.
ReconcileResult error_correct(const BitVec& alice_remaining, BitVec bob_remaining,
                              double qber_estimate, uint64_t shuffle_seed,
                              ClassicalChannel* channel = nullptr);

namespace detail {

// max(4, ceil(0.73 / qber)) clamped to n; one block when the estimate is 0.
size_t initial_block_size(double qber_estimate, size_t n);

// Pass-2 blocks are kept short enough that residual error pairs rarely stay
// aligned in both partitions; capped so the interleaver separation guarantee
// below holds.
size_t second_block_size(double qber_estimate, size_t n, size_t pass1_blocks);

// Seeded column interleaver: deals pass-1 blocks out one member per round in
// a shuffled fixed column order. Any two members of one pass-1 block end up
// at least (pass1_blocks - 1) positions apart, so no pass-2 block of size
// <= pass1_blocks - 1 can hide a pass-1 error pair.
std::vector<uint32_t> pass2_permutation(size_t n, size_t block1, Rng& rng);

} // namespace detail

} // namespace qkdvault
