#pragma once

#include <cstddef>
#include <vector>

#include "msym/errors.hpp"
#include "msym/field.hpp"
#include "msym/linalg.hpp"

namespace msym {

// An element of the exterior algebra on `gens` generators e_0..e_{gens-1},
// stored densely by bitmask. A mask lists its generators in ascending order,
// which is the canonical ordering of every monomial.
template <class S>
struct ExtVec {
    int gens = 0;
    std::vector<S> c;

    ExtVec() = default;
    explicit ExtVec(int g) : gens(g), c(std::size_t(1) << g, S(0)) {
        if (g > 16) throw DimensionTooLarge("exterior algebra limited to 16 generators");
    }
    static ExtVec basis(int g, unsigned mask, S v = S(1)) {
        ExtVec e(g);
        e.c[mask] = v;
        return e;
    }

    std::size_t size() const { return c.size(); }
    unsigned top() const { return static_cast<unsigned>(c.size() - 1); }
    S& operator[](unsigned m) { return c[m]; }
    const S& operator[](unsigned m) const { return c[m]; }

    ExtVec& operator+=(const ExtVec& o) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    ExtVec& operator-=(const ExtVec& o) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    template <class T>
    ExtVec& scale(const T& s) {
        for (auto& x : c) x = x * s;
        return *this;
    }
    friend ExtVec operator+(ExtVec a, const ExtVec& b) { return a += b; }
    friend ExtVec operator-(ExtVec a, const ExtVec& b) { return a -= b; }
};

// (-1)^(number of generators in `mask` below `g`): the sign of moving e_g to
// its slot from the left.
inline double pass_sign(unsigned mask, int g) { return (popcount(mask & ((1u << g) - 1u)) & 1) ? -1.0 : 1.0; }

// Sign of e_A ^ e_B relative to e_{A|B} for disjoint masks.
inline double merge_sign(unsigned A, unsigned B) {
    int inv = 0;
    for (unsigned b = B; b; b &= b - 1) {
        const int g = __builtin_ctz(b);
        inv += popcount(A >> (g + 1));
    }
    return (inv & 1) ? -1.0 : 1.0;
}

// e_g ^ a
template <class S>
ExtVec<S> left_wedge(const ExtVec<S>& a, int g) {
    ExtVec<S> r(a.gens);
    const unsigned bit = 1u << g;
    for (unsigned m = 0; m < a.size(); ++m)
        if (!(m & bit)) r.c[m | bit] += a.c[m] * pass_sign(m, g);
    return r;
}

// Interior product with the dual vector of e_g, acting from the left.
template <class S>
ExtVec<S> interior(const ExtVec<S>& a, int g) {
    ExtVec<S> r(a.gens);
    const unsigned bit = 1u << g;
    for (unsigned m = 0; m < a.size(); ++m)
        if (m & bit) r.c[m & ~bit] += a.c[m] * pass_sign(m, g);
    return r;
}

template <class S>
ExtVec<S> wedge(const ExtVec<S>& a, const ExtVec<S>& b) {
    ExtVec<S> r(a.gens);
    for (unsigned A = 0; A < a.size(); ++A) {
        if (is_zero(a.c[A])) continue;
        for (unsigned B = 0; B < b.size(); ++B) {
            if (A & B) continue;
            if (is_zero(b.c[B])) continue;
            r.c[A | B] += a.c[A] * b.c[B] * merge_sign(A, B);
        }
    }
    return r;
}

// One-form sum_g v_g e_g.
template <class S>
ExtVec<S> one_form(int gens, const std::vector<S>& v) {
    ExtVec<S> r(gens);
    for (int g = 0; g < gens && g < static_cast<int>(v.size()); ++g) r.c[1u << g] = v[g];
    return r;
}

// Pullback along a linear substitution: old generator g becomes the one-form
// images[g] in a (possibly different) algebra with `target_gens` generators.
template <class S>
ExtVec<S> substitute(const ExtVec<S>& a, const std::vector<ExtVec<S>>& images, int target_gens) {
    ExtVec<S> r(target_gens);
    for (unsigned m = 0; m < a.size(); ++m) {
        if (is_zero(a.c[m])) continue;
        ExtVec<S> term = ExtVec<S>::basis(target_gens, 0u, a.c[m]);
        // multiply on the right in ascending generator order
        for (unsigned bits = m; bits; bits &= bits - 1) term = wedge(term, images[__builtin_ctz(bits)]);
        r += term;
    }
    return r;
}

// Largest coefficient magnitude.
template <class S>
double sup_norm(const ExtVec<S>& a) {
    double m = 0.0;
    for (const auto& x : a.c) m = std::max(m, static_cast<double>(std::abs(value_of(x))));
    return m;
}

}  // namespace msym
