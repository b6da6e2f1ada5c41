#include "qkdvault/reconcile.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "qkdvault/errors.hpp"

namespace qkdvault {

namespace detail {

size_t initial_block_size(double qber_estimate, size_t n) {
    if (n == 0) return 1;
    if (qber_estimate <= 0.0) return n;
    double raw = std::ceil(0.73 / qber_estimate);
    if (raw >= static_cast<double>(n)) return n;
    return std::max<size_t>(4, static_cast<size_t>(raw));
}

size_t second_block_size(double qber_estimate, size_t n, size_t pass1_blocks) {
    if (n == 0) return 1;
    if (qber_estimate <= 0.0 || pass1_blocks <= 1) return n;
    double raw = std::ceil(0.13 / qber_estimate);
    size_t target = std::max<size_t>(4, static_cast<size_t>(std::min(raw, static_cast<double>(n))));
    size_t upper = std::max<size_t>(2, pass1_blocks - 1);
    return std::max<size_t>(2, std::min(target, upper));
}

std::vector<uint32_t> pass2_permutation(size_t n, size_t block1, Rng& rng) {
    size_t nblocks = (n + block1 - 1) / block1;
    if (nblocks <= 1) {
        std::vector<uint32_t> perm(n);
        for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
        shuffle_values(perm, rng);
        return perm;
    }

    // Shuffled member order within each block.
    std::vector<std::vector<uint32_t>> members(nblocks);
    for (size_t b = 0; b < nblocks; ++b) {
        size_t lo = b * block1;
        size_t hi = std::min(n, lo + block1);
        members[b].resize(hi - lo);
        for (size_t i = lo; i < hi; ++i) members[b][i - lo] = static_cast<uint32_t>(i);
        shuffle_values(members[b], rng);
    }

    // Fixed shuffled column order, one member per block per round.
    std::vector<uint32_t> columns(nblocks);
    for (size_t b = 0; b < nblocks; ++b) columns[b] = static_cast<uint32_t>(b);
    shuffle_values(columns, rng);

    std::vector<uint32_t> perm;
    perm.reserve(n);
    for (size_t round = 0; round < block1; ++round) {
        for (uint32_t b : columns) {
            if (round < members[b].size()) perm.push_back(members[b][round]);
        }
    }
    return perm;
}

} // namespace detail

namespace {

struct Partition {
    size_t block_size = 1;
    size_t nblocks = 0;
    std::vector<uint32_t> perm;     // empty means identity
    std::vector<uint32_t> inv_perm; // empty means identity

    size_t slot_of(size_t original) const {
        return inv_perm.empty() ? original : inv_perm[original];
    }
    size_t original_at(size_t slot) const { return perm.empty() ? slot : perm[slot]; }
    size_t block_lo(size_t block) const { return block * block_size; }
    size_t block_hi(size_t block, size_t n) const {
        return std::min(n, (block + 1) * block_size);
    }
};

int parity_slots(const BitVec& bits, const Partition& part, size_t lo, size_t hi) {
    if (part.perm.empty()) return bits.parity_range(lo, hi);
    int p = 0;
    for (size_t s = lo; s < hi; ++s) p ^= bits.get(part.original_at(s));
    return p;
}

} // namespace

ReconcileResult error_correct(const BitVec& alice_remaining, BitVec bob_remaining,
                              double qber_estimate, uint64_t shuffle_seed,
                              ClassicalChannel* channel) {
    const size_t n = alice_remaining.size();
    if (n != bob_remaining.size()) {
        raise(Errc::SessionCorruption, "reconciliation inputs differ in length");
    }

    ReconcileResult result;
    if (n == 0) {
        result.corrected_bob = std::move(bob_remaining);
        return result;
    }

    Rng shuffle_rng(Rng::derive(shuffle_seed, 0x636173ULL));
    BitVec& bob = bob_remaining;

    Partition parts[2];
    parts[0].block_size = detail::initial_block_size(qber_estimate, n);
    parts[0].nblocks = (n + parts[0].block_size - 1) / parts[0].block_size;

    parts[1].block_size = detail::second_block_size(qber_estimate, n, parts[0].nblocks);
    parts[1].perm = detail::pass2_permutation(n, parts[0].block_size, shuffle_rng);
    parts[1].inv_perm.resize(n);
    for (size_t s = 0; s < n; ++s) parts[1].inv_perm[parts[1].perm[s]] = static_cast<uint32_t>(s);
    parts[1].nblocks = (n + parts[1].block_size - 1) / parts[1].block_size;

    std::vector<uint8_t> alice_par[2];
    std::vector<uint8_t> bob_par[2];
    size_t pass_leak[2] = {0, 0};

    auto exchange_parities = [&](int p) {
        const Partition& part = parts[p];
        alice_par[p].resize(part.nblocks);
        bob_par[p].resize(part.nblocks);
        BitVec disclosed(part.nblocks);
        for (size_t b = 0; b < part.nblocks; ++b) {
            alice_par[p][b] = static_cast<uint8_t>(
                parity_slots(alice_remaining, part, part.block_lo(b), part.block_hi(b, n)));
            bob_par[p][b] = static_cast<uint8_t>(
                parity_slots(bob, part, part.block_lo(b), part.block_hi(b, n)));
            if (alice_par[p][b]) disclosed.set(b, true);
        }
        pass_leak[p] += part.nblocks;
        if (channel != nullptr) {
            channel->send_bits("alice", p == 0 ? "cascade_parities_1" : "cascade_parities_2",
                               disclosed);
            std::vector<uint32_t> odd;
            for (size_t b = 0; b < part.nblocks; ++b) {
                if (alice_par[p][b] != bob_par[p][b]) odd.push_back(static_cast<uint32_t>(b));
            }
            channel->send_u32_list("bob", p == 0 ? "cascade_odd_1" : "cascade_odd_2", odd);
        }
    };

    // Binary search an odd-parity block down to one real mismatch and flip
    // it on Bob's side. Each level discloses one of Alice's parities.
    auto bisect_and_flip = [&](int p, size_t block, int leak_pass) -> size_t {
        const Partition& part = parts[p];
        size_t lo = part.block_lo(block);
        size_t hi = part.block_hi(block, n);
        while (hi - lo > 1) {
            size_t mid = lo + (hi - lo) / 2;
            int a = parity_slots(alice_remaining, part, lo, mid);
            int b = parity_slots(bob, part, lo, mid);
            pass_leak[leak_pass] += 1;
            if (channel != nullptr) {
                BitVec one(1);
                one.set(0, a != 0);
                channel->send_bits("alice", "cascade_bisect", one);
            }
            if (a != b) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        size_t original = part.original_at(lo);
        bob.flip(original);
        return original;
    };

    auto block_of = [&](int p, size_t original) -> size_t {
        return parts[p].slot_of(original) / parts[p].block_size;
    };

    // Pass 1.
    exchange_parities(0);
    for (size_t b = 0; b < parts[0].nblocks; ++b) {
        if (alice_par[0][b] != bob_par[0][b]) {
            bisect_and_flip(0, b, 0);
            bob_par[0][b] ^= 1;
        }
    }

    // Pass 2 with corrections cascading back into pass-1 blocks.
    exchange_parities(1);
    std::deque<std::pair<int, size_t>> work;
    for (size_t b = 0; b < parts[1].nblocks; ++b) {
        if (alice_par[1][b] != bob_par[1][b]) work.emplace_back(1, b);
    }
    while (!work.empty()) {
        auto [p, b] = work.front();
        work.pop_front();
        if (alice_par[p][b] == bob_par[p][b]) continue;
        size_t original = bisect_and_flip(p, b, 1);
        bob_par[p][b] ^= 1;
        int other = 1 - p;
        size_t ob = block_of(other, original);
        bob_par[other][ob] ^= 1;
        if (alice_par[other][ob] != bob_par[other][ob]) work.emplace_back(other, ob);
    }

    result.pass1_leakage = pass_leak[0];
    result.pass2_leakage = pass_leak[1];
    result.parity_leakage = pass_leak[0] + pass_leak[1];

    // Disclosed checksum catches residual even-parity error patterns.
    uint32_t alice_crc = crc32_of(alice_remaining);
    if (channel != nullptr) {
        std::vector<uint32_t> one{alice_crc};
        channel->send_u32_list("alice", "reconcile_checksum", one);
    }
    if (crc32_of(bob) != alice_crc) {
        raise(Errc::ReconciliationFailure, "reconciled strings fail checksum comparison");
    }

    result.corrected_bob = std::move(bob);
    return result;
}

} // namespace qkdvault
