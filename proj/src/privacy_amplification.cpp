#include "qkdvault/privacy_amplification.hpp"

#include <bit>
#include <cmath>
#include <memory>

#include <fftw3.h>

#include "qkdvault/errors.hpp"
#include "qkdvault/rng.hpp"

namespace qkdvault {

namespace detail {

BitVec toeplitz_hash_words(const BitVec& diag, const BitVec& input, size_t out_len) {
    const size_t n = input.size();
    BitVec out(out_len);
    if (n == 0 || out_len == 0) return out;

    // out[i] = parity_k( diag[i + k] & input[n - 1 - k] ): a sliding dot
    // product of diag against the reversed input.
    BitVec reversed(n);
    for (size_t j = 0; j < n; ++j) {
        if (input.get(j)) reversed.set(n - 1 - j, true);
    }
    const auto& rw = reversed.words();
    std::vector<uint64_t> dw = diag.words();
    dw.push_back(0); // slack word so shifted reads never run off the end
    dw.push_back(0);

    for (size_t i = 0; i < out_len; ++i) {
        size_t off = i >> 6;
        unsigned sh = static_cast<unsigned>(i & 63);
        uint64_t acc = 0;
        if (sh == 0) {
            for (size_t w = 0; w < rw.size(); ++w) acc ^= dw[off + w] & rw[w];
        } else {
            for (size_t w = 0; w < rw.size(); ++w) {
                uint64_t d = (dw[off + w] >> sh) | (dw[off + w + 1] << (64 - sh));
                acc ^= d & rw[w];
            }
        }
        if (std::popcount(acc) & 1) out.set(i, true);
    }
    return out;
}

namespace {

struct FftwDeleter {
    void operator()(double* p) const { fftw_free(p); }
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

using RealBuf = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuf alloc_real(size_t n) {
    return RealBuf(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}
ComplexBuf alloc_complex(size_t n) {
    return ComplexBuf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

void load_chunk(const BitVec& bits, size_t offset, size_t count, double* dst, size_t fft_len) {
    for (size_t i = 0; i < count; ++i) dst[i] = bits.get(offset + i) ? 1.0 : 0.0;
    for (size_t i = count; i < fft_len; ++i) dst[i] = 0.0;
}

} // namespace

BitVec toeplitz_hash_fft(const BitVec& diag, const BitVec& input, size_t out_len) {
    const size_t n = input.size();
    BitVec out(out_len);
    if (n == 0 || out_len == 0) return out;
    const size_t dlen = diag.size();

    // Window of the linear convolution diag * input we need: positions
    // [n-1, n-1+out_len). Chunked overlap-add; each chunk product is exact in
    // doubles and rounded before accumulation.
    constexpr size_t kChunk = size_t{1} << 21;
    const size_t fft_len = kChunk * 2;
    const size_t spec_len = fft_len / 2 + 1;
    const size_t window_lo = n - 1;
    const size_t window_len = out_len;

    std::vector<int32_t> counts(window_len, 0);

    const size_t x_chunks = (n + kChunk - 1) / kChunk;
    const size_t d_chunks = (dlen + kChunk - 1) / kChunk;

    RealBuf real = alloc_real(fft_len);
    ComplexBuf spec = alloc_complex(spec_len);
    ComplexBuf prod = alloc_complex(spec_len);
    RealBuf conv = alloc_real(fft_len);

    fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(fft_len), real.get(), spec.get(),
                                         FFTW_ESTIMATE);
    fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(fft_len), prod.get(), conv.get(),
                                         FFTW_ESTIMATE);

    // Cache input-chunk spectra; diag chunks stream through.
    std::vector<ComplexBuf> x_spec;
    x_spec.reserve(x_chunks);
    for (size_t xc = 0; xc < x_chunks; ++xc) {
        size_t off = xc * kChunk;
        size_t cnt = std::min(kChunk, n - off);
        load_chunk(input, off, cnt, real.get(), fft_len);
        fftw_execute(fwd);
        auto keep = alloc_complex(spec_len);
        std::copy(&spec[0][0], &spec[0][0] + spec_len * 2, &keep[0][0]);
        x_spec.push_back(std::move(keep));
    }

    const double scale = 1.0 / static_cast<double>(fft_len);
    for (size_t dc = 0; dc < d_chunks; ++dc) {
        size_t doff = dc * kChunk;
        size_t dcnt = std::min(kChunk, dlen - doff);
        load_chunk(diag, doff, dcnt, real.get(), fft_len);
        fftw_execute(fwd);

        for (size_t xc = 0; xc < x_chunks; ++xc) {
            size_t xoff = xc * kChunk;
            size_t xcnt = std::min(kChunk, n - xoff);
            size_t base = doff + xoff;
            size_t prod_len = dcnt + xcnt - 1;
            // Skip chunk pairs whose contribution misses the window.
            if (base + prod_len <= window_lo || base >= window_lo + window_len) continue;

            const fftw_complex* xs = x_spec[xc].get();
            for (size_t k = 0; k < spec_len; ++k) {
                double ar = spec[k][0], ai = spec[k][1];
                double br = xs[k][0], bi = xs[k][1];
                prod[k][0] = ar * br - ai * bi;
                prod[k][1] = ar * bi + ai * br;
            }
            fftw_execute(inv);

            size_t lo = std::max(base, window_lo);
            size_t hi = std::min(base + prod_len, window_lo + window_len);
            for (size_t pos = lo; pos < hi; ++pos) {
                double v = conv[pos - base] * scale;
                counts[pos - window_lo] += static_cast<int32_t>(std::llround(v));
            }
        }
    }

    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);

    for (size_t i = 0; i < window_len; ++i) {
        if (counts[i] & 1) out.set(i, true);
    }
    return out;
}

} // namespace detail

BitVec toeplitz_hash(const BitVec& diag, const BitVec& input, size_t out_len) {
    const size_t n = input.size();
    if (out_len > 0 && diag.size() != out_len + n - 1) {
        raise(Errc::InvalidArgument, "toeplitz diagonal must have out_len + n - 1 bits");
    }
    // Word engine cost is out_len * n / 64 word operations; switch to the
    // FFT engine when that exceeds ~2^31.
    const double word_cost = static_cast<double>(out_len) * (static_cast<double>(n) / 64.0 + 1.0);
    if (word_cost > std::ldexp(1.0, 31)) {
        return detail::toeplitz_hash_fft(diag, input, out_len);
    }
    return detail::toeplitz_hash_words(diag, input, out_len);
}

BitVec privacy_amplify(const BitVec& reconciled, size_t disclosed_bits,
                       size_t security_margin, uint64_t seed) {
    const size_t n = reconciled.size();
    if (n <= disclosed_bits + security_margin) {
        raise(Errc::InsufficientKey, "no key material would remain after amplification");
    }
    const size_t out_len = n - disclosed_bits - security_margin;
    Rng rng(Rng::derive(seed, 0x746f65706cULL)); // toeplitz diagonal stream
    BitVec diag = BitVec::random(out_len + n - 1, rng);
    return toeplitz_hash(diag, reconciled, out_len);
}

} // namespace qkdvault
