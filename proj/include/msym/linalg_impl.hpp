#pragma once

#include <algorithm>
#include <bit>

namespace msym {

inline int popcount(unsigned x) { return std::popcount(x); }

template <class S, class Get>
S minor_det(Get&& get, unsigned rows, unsigned cols) {
    std::array<int, 2 * kMaxDim> r{}, c{};
    int k = 0, kc = 0;
    for (int i = 0; i < 32; ++i)
        if (rows >> i & 1u) r[k++] = i;
    for (int j = 0; j < 32; ++j)
        if (cols >> j & 1u) c[kc++] = j;
    if (k == 0) return S(1.0);
    std::array<int, 2 * kMaxDim> perm{};
    for (int i = 0; i < k; ++i) perm[i] = i;
    S total(0.0);
    do {
        // parity by counting inversions
        int inv = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                if (perm[i] > perm[j]) ++inv;
        S term(1.0);
        for (int i = 0; i < k; ++i) term = term * get(r[i], c[perm[i]]);
        total = (inv & 1) ? total - term : total + term;
    } while (std::next_permutation(perm.begin(), perm.begin() + k));
    return total;
}

}  // namespace msym
