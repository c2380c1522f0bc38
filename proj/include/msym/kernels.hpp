#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

#include "msym/geometry.hpp"

// Grid kernels for the Monge-Ampere Newton iteration. Each kernel has a
// serial reference loop and an OpenMP loop that run the identical per-node
// body, so both produce bit-identical output and the serial form serves as
// the test oracle for the parallel one.
namespace msym::kernels {

template <class S>
using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

inline double real_part(double x) { return x; }
inline double real_part(const cplx& z) { return z.real(); }
inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const cplx& z) { return std::abs(z); }
inline double log_ratio(double a, double b) { return std::log(a / b); }
inline cplx log_ratio(const cplx& a, const cplx& b) { return std::log(a / b); }

// Geometry of the centered finite-difference stencil on the domain grid.
struct Stencil {
    int n = 0;
    int N = 0;
    std::array<double, kMaxDim> h{};
    std::array<std::ptrdiff_t, kMaxDim> stride{};
    std::vector<std::size_t> interior;  // flat indices of non-boundary nodes
    std::vector<long> compact;          // flat index -> interior position, or -1
    std::size_t nodes = 0;

    explicit Stencil(const Domain& d) : n(d.n), N(d.grid_resolution), nodes(d.node_count()) {
        std::ptrdiff_t s = 1;
        for (int a = n - 1; a >= 0; --a) {
            stride[a] = s;
            s *= N;
            h[a] = d.spacing(a);
        }
        compact.assign(nodes, -1);
        for (std::size_t k = 0; k < nodes; ++k)
            if (!d.on_boundary(k, 1)) {
                compact[k] = static_cast<long>(interior.size());
                interior.push_back(k);
            }
    }
};

// Discrete Hessian at an interior node: second differences on the diagonal,
// the four-point cross stencil off the diagonal.
template <class S>
MatS<S> discrete_hessian(const Stencil& st, const S* u, std::size_t k) {
    MatS<S> H(st.n, st.n);
    for (int a = 0; a < st.n; ++a) {
        const std::ptrdiff_t sa = st.stride[a];
        H(a, a) = (u[k + sa] - 2.0 * u[k] + u[k - sa]) / (st.h[a] * st.h[a]);
        for (int b = a + 1; b < st.n; ++b) {
            const std::ptrdiff_t sb = st.stride[b];
            H(a, b) = (u[k + sa + sb] - u[k + sa - sb] - u[k - sa + sb] + u[k - sa - sb]) /
                      (4.0 * st.h[a] * st.h[b]);
            H(b, a) = H(a, b);
        }
    }
    return H;
}

// Per-interior-node data of one Newton linearization.
template <class S>
struct Linearization {
    std::vector<S> F;            // log(det D^2 u / C)
    std::vector<S> hinv;         // inverse discrete Hessians, n*n per node
    std::vector<double> min_eig; // smallest eigenvalue of Re D^2 u
    std::vector<double> det_err; // |det D^2 u - C|
    bool convex = true;

    void resize(std::size_t m, int n) {
        F.assign(m, S(0));
        hinv.assign(m * n * n, S(0));
        min_eig.assign(m, 0.0);
        det_err.assign(m, 0.0);
    }
};

template <class S>
void linearize_node(const Stencil& st, const S* u, S C, std::size_t i, Linearization<S>& L) {
    const MatS<S> H = discrete_hessian(st, u, st.interior[i]);
    Mat re(st.n, st.n);
    for (int a = 0; a < st.n; ++a)
        for (int b = 0; b < st.n; ++b) re(a, b) = real_part(H(a, b));
    const double lam = min_eigenvalue(re);
    L.min_eig[i] = lam;
    if (!(lam > 0.0)) {
        L.F[i] = S(0);
        L.det_err[i] = 0.0;
        return;
    }
    const S det = H.determinant();
    L.F[i] = log_ratio(det, C);
    L.det_err[i] = magnitude(det - C);
    const MatS<S> Hi = H.inverse();
    S* dst = &L.hinv[i * st.n * st.n];
    for (int a = 0; a < st.n; ++a)
        for (int b = 0; b < st.n; ++b) dst[a * st.n + b] = Hi(a, b);
}

// y_i = trace(H_i^{-1} D^2 x) at interior node i, where x lives on the full
// grid with zero boundary values.
template <class S>
S jacobian_node(const Stencil& st, const Linearization<S>& L, const S* x, std::size_t i) {
    const MatS<S> D = discrete_hessian(st, x, st.interior[i]);
    const S* hi = &L.hinv[i * st.n * st.n];
    S y(0);
    for (int a = 0; a < st.n; ++a)
        for (int b = 0; b < st.n; ++b) y += hi[a * st.n + b] * D(b, a);
    return y;
}

// Diagonal of the linearized operator (center weight of the stencil).
template <class S>
S jacobian_diagonal(const Stencil& st, const Linearization<S>& L, std::size_t i) {
    const S* hi = &L.hinv[i * st.n * st.n];
    S d(0);
    for (int a = 0; a < st.n; ++a) d += hi[a * st.n + a] * (-2.0 / (st.h[a] * st.h[a]));
    return d;
}

template <class S>
void finish(Linearization<S>& L) {
    L.convex = true;
    for (double lam : L.min_eig)
        if (!(lam > 0.0)) L.convex = false;
}

namespace serial {

template <class S>
void linearize(const Stencil& st, const std::vector<S>& u, S C, Linearization<S>& L) {
    L.resize(st.interior.size(), st.n);
    for (std::size_t i = 0; i < st.interior.size(); ++i) linearize_node(st, u.data(), C, i, L);
    finish(L);
}

template <class S>
void jacobian_apply(const Stencil& st, const Linearization<S>& L, const std::vector<S>& x_full, std::vector<S>& y) {
    y.resize(st.interior.size());
    for (std::size_t i = 0; i < st.interior.size(); ++i) y[i] = jacobian_node(st, L, x_full.data(), i);
}

inline void min_eigen_field(const Stencil& st, const std::vector<double>& u, std::vector<double>& out) {
    out.resize(st.interior.size());
    for (std::size_t i = 0; i < st.interior.size(); ++i)
        out[i] = min_eigenvalue(discrete_hessian(st, u.data(), st.interior[i]));
}

}  // namespace serial

namespace parallel {

template <class S>
void linearize(const Stencil& st, const std::vector<S>& u, S C, Linearization<S>& L) {
    L.resize(st.interior.size(), st.n);
    const long m = static_cast<long>(st.interior.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i) linearize_node(st, u.data(), C, static_cast<std::size_t>(i), L);
    finish(L);
}

template <class S>
void jacobian_apply(const Stencil& st, const Linearization<S>& L, const std::vector<S>& x_full, std::vector<S>& y) {
    y.resize(st.interior.size());
    const long m = static_cast<long>(st.interior.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i) y[i] = jacobian_node(st, L, x_full.data(), static_cast<std::size_t>(i));
}

inline void min_eigen_field(const Stencil& st, const std::vector<double>& u, std::vector<double>& out) {
    out.resize(st.interior.size());
    const long m = static_cast<long>(st.interior.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < m; ++i)
        out[i] = min_eigenvalue(discrete_hessian(st, u.data(), st.interior[static_cast<std::size_t>(i)]));
}

}  // namespace parallel

template <class S>
void linearize(bool par, const Stencil& st, const std::vector<S>& u, S C, Linearization<S>& L) {
    par ? parallel::linearize(st, u, C, L) : serial::linearize(st, u, C, L);
}

template <class S>
void jacobian_apply(bool par, const Stencil& st, const Linearization<S>& L, const std::vector<S>& x_full,
                    std::vector<S>& y) {
    par ? parallel::jacobian_apply(st, L, x_full, y) : serial::jacobian_apply(st, L, x_full, y);
}

}  // namespace msym::kernels
