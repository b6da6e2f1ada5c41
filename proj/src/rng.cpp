#include "qkdvault/rng.hpp"

#include <algorithm>
#include <unordered_set>

namespace qkdvault {

std::vector<uint32_t> sample_without_replacement(size_t n, size_t k, Rng& rng) {
    std::vector<uint32_t> out;
    out.reserve(k);
    if (k >= n) {
        out.resize(n);
        for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint32_t>(i);
        return out;
    }
    // Floyd's algorithm: k draws regardless of n, no O(n) scratch.
    std::unordered_set<uint32_t> chosen;
    chosen.reserve(k * 2);
    for (size_t j = n - k; j < n; ++j) {
        uint32_t t = static_cast<uint32_t>(rng.below(j + 1));
        if (!chosen.insert(t).second) {
            chosen.insert(static_cast<uint32_t>(j));
        }
    }
    out.assign(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace qkdvault
