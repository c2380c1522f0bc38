#pragma once

#include "msym/linalg.hpp"

namespace msym {

// A complex scalar together with its gradient in the base coordinates x^1..x^n.
// This is forward-mode differentiation truncated at first order, which is all
// the exterior-derivative operators need from a coefficient.
struct Field {
    cplx v{0.0, 0.0};
    std::array<cplx, kMaxDim> g{};

    Field() = default;
    Field(double x) : v(x, 0.0) {}
    Field(cplx x) : v(x) {}
    Field(cplx x, const std::array<cplx, kMaxDim>& grad) : v(x), g(grad) {}

    Field& operator+=(const Field& o) {
        v += o.v;
        for (int i = 0; i < kMaxDim; ++i) g[i] += o.g[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        v -= o.v;
        for (int i = 0; i < kMaxDim; ++i) g[i] -= o.g[i];
        return *this;
    }
    Field& operator*=(const Field& o) {
        for (int i = 0; i < kMaxDim; ++i) g[i] = g[i] * o.v + v * o.g[i];
        v *= o.v;
        return *this;
    }
    Field& operator*=(cplx s) {
        v *= s;
        for (auto& x : g) x *= s;
        return *this;
    }
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(Field a, const Field& b) { return a *= b; }
inline Field operator*(Field a, cplx s) { return a *= s; }
inline Field operator*(cplx s, Field a) { return a *= s; }
inline Field operator*(Field a, double s) { return a *= cplx(s); }
inline Field operator*(double s, Field a) { return a *= cplx(s); }
inline Field operator-(Field a) { return a *= cplx(-1.0); }

inline Field conj(const Field& a) {
    Field r(std::conj(a.v));
    for (int i = 0; i < kMaxDim; ++i) r.g[i] = std::conj(a.g[i]);
    return r;
}

inline Field constant_field(cplx v) { return Field(v); }

// Value-level helpers so templated kernels can treat cplx and Field alike.
inline cplx value_of(const cplx& z) { return z; }
inline double value_of(double x) { return x; }
inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const cplx& z) { return z == cplx(0.0); }
inline bool is_zero(const Field& f) {
    if (f.v != cplx(0.0)) return false;
    for (const auto& x : f.g)
        if (x != cplx(0.0)) return false;
    return true;
}
inline cplx value_of(const Field& f) { return f.v; }
inline cplx conj_of(const cplx& z) { return std::conj(z); }
inline Field conj_of(const Field& f) { return conj(f); }

}  // namespace msym
