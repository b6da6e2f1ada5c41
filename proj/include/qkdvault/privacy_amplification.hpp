#pragma once

#include <cstdint>

#include "qkdvault/bitvec.hpp"

namespace qkdvault {

// Product of a binary Toeplitz matrix with the input over GF(2). The matrix
// of shape out_len x n is defined by diag (out_len + n - 1 bits) via
// T[i][j] = diag[i + (n - 1) - j]; output bit i is the parity of the masked
// input, i.e. row i AND input. Dispatches between a word-parallel sliding
// window and an FFT convolution engine by problem size; both compute the
// identical function.
BitVec toeplitz_hash(const BitVec& diag, const BitVec& input, size_t out_len);

// Compresses a reconciled key to length n - disclosed_bits - security_margin
// with a Toeplitz matrix drawn from the seed. Raises InsufficientKey when
// nothing would remain (sessions map that to AbortedLength).
BitVec privacy_amplify(const BitVec& reconciled, size_t disclosed_bits,
                       size_t security_margin, uint64_t seed);

namespace detail {
BitVec toeplitz_hash_words(const BitVec& diag, const BitVec& input, size_t out_len);
BitVec toeplitz_hash_fft(const BitVec& diag, const BitVec& input, size_t out_len);
} // namespace detail

} // namespace qkdvault
