#include "msym/connections.hpp"

#include <cmath>

namespace msym {

Connection a_connection(const JetFrame& j) {
    Connection c;
    c.flavor = Connection::Flavor::A;
    c.gamma = Tensor3(j.n);
    for (int a = 0; a < j.n; ++a)
        for (int l = 0; l < j.n; ++l)
            for (int m = 0; m < j.n; ++m) {
                double s = 0.0;
                for (int k = 0; k < j.n; ++k) s += j.inverse_hessian(a, k) * j.third(k, l, m);
                c.gamma(a, l, m) = s;
            }
    return c;
}

Connection b_connection(int n) {
    Connection c;
    c.flavor = Connection::Flavor::B;
    c.gamma = Tensor3(n);
    return c;
}

namespace {

// d Gamma^j_km / dx^l, all components, by central differences with step h.
std::vector<double> gamma_derivative(const Potential& phi, const Vec& x, double h) {
    const int n = phi.dim();
    std::vector<double> d(n * n * n * n, 0.0);  // ((j * n + k) * n + m) * n + l
    for (int l = 0; l < n; ++l) {
        Vec xp = x, xm = x;
        xp[l] += h;
        xm[l] -= h;
        const Tensor3 gp = a_connection(jet(phi, xp)).gamma, gm = a_connection(jet(phi, xm)).gamma;
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k)
                for (int m = 0; m < n; ++m) d[((a * n + k) * n + m) * n + l] = (gp(a, k, m) - gm(a, k, m)) / (2 * h);
    }
    return d;
}

}  // namespace

Curvature a_curvature(const Potential& phi, const Vec& x, double h) {
    const int n = phi.dim();
    const auto d1 = gamma_derivative(phi, x, h), d2 = gamma_derivative(phi, x, h / 2);
    auto dG = [&](int a, int k, int m, int l) {
        const std::size_t i = ((a * n + k) * n + m) * n + l;
        return (4.0 * d2[i] - d1[i]) / 3.0;
    };
    const Tensor3 G = a_connection(jet(phi, x)).gamma;
    Curvature R;
    R.n = n;
    R.r.assign(n * n * n * n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                for (int m = 0; m < n; ++m) {
                    double s = dG(a, k, m, l) - dG(a, k, l, m);
                    for (int t = 0; t < n; ++t) s += G(a, l, t) * G(t, k, m) - G(a, m, t) * G(t, k, l);
                    R.r[((a * n + k) * n + l) * n + m] = s;
                }
    return R;
}

double a_curvature_residual(const Potential& phi, const Vec& x, double h) {
    const Curvature R = a_curvature(phi, x, h);
    double r = 0.0;
    for (double v : R.r) r = std::max(r, std::abs(v));
    return r;
}

double nabla_omega_residual(const JetFrame& j, const Tensor3* perturbation) {
    const int n = j.n;
    Tensor3 G = a_connection(j).gamma;
    if (perturbation)
        for (int a = 0; a < n; ++a)
            for (int l = 0; l < n; ++l)
                for (int m = 0; m < n; ++m) G(a, l, m) += (*perturbation)(a, l, m);
    double r = 0.0;
    for (int q = 0; q < n; ++q)
        for (int p = 0; p < n; ++p)
            for (int k = 0; k < n; ++k) {
                double s = j.third(p, k, q);
                for (int a = 0; a < n; ++a) s -= j.hessian(a, k) * G(a, p, q);
                r = std::max(r, std::abs(s));
            }
    return r;
}

Tensor3 a_connection_in_dual(const JetFrame& j, const JetFrame& dual) {
    // x = grad psi(p): dx^l/dp_a = psi_la, d^2 x^j/dp_a dp_b = psi_jab, dp_c/dx^j = phi_cj.
    const int n = j.n;
    const Tensor3 G = a_connection(j).gamma;
    const Mat& P = dual.hessian;
    Tensor3 out(n);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int jj = 0; jj < n; ++jj) {
                    double inner = dual.third(jj, a, b);
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m) inner += G(jj, l, m) * P(l, a) * P(m, b);
                    s += j.hessian(c, jj) * inner;
                }
                out(c, a, b) = s;
            }
    return out;
}

double connection_duality_residual(const JetFrame& j, const JetFrame& dual) {
    const Tensor3 t = a_connection_in_dual(j, dual);
    double r = 0.0;
    for (int a = 0; a < j.n; ++a)
        for (int b = 0; b < j.n; ++b)
            for (int c = 0; c < j.n; ++c) r = std::max(r, std::abs(t(a, b, c)));
    return r;
}

double connection_duality_reverse_residual(const JetFrame& j, const JetFrame& dual) {
    // Gamma = 0 in x becomes phi_cj psi_jab in p; the A-connection of psi is psi^{ck} psi_kab.
    const int n = j.n;
    const Tensor3 A = a_connection(dual).gamma;
    double r = 0.0;
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int jj = 0; jj < n; ++jj) s += j.hessian(c, jj) * dual.third(jj, a, b);
                r = std::max(r, std::abs(s - A(c, a, b)));
            }
    return r;
}

Tensor3 levi_civita(const JetFrame& j) {
    const int n = j.n;
    // g_kl,m = phi_klm
    Tensor3 out(n);
    for (int a = 0; a < n; ++a)
        for (int l = 0; l < n; ++l)
            for (int m = 0; m < n; ++m) {
                double s = 0.0;
                for (int k = 0; k < n; ++k)
                    s += j.inverse_hessian(a, k) * (j.third(k, l, m) + j.third(k, m, l) - j.third(l, m, k));
                out(a, l, m) = 0.5 * s;
            }
    return out;
}

double levi_civita_midpoint_residual(const JetFrame& j) {
    const Tensor3 A = a_connection(j).gamma, B = b_connection(j.n).gamma, LC = levi_civita(j);
    double r = 0.0;
    for (int a = 0; a < j.n; ++a)
        for (int l = 0; l < j.n; ++l)
            for (int m = 0; m < j.n; ++m) r = std::max(r, std::abs(0.5 * (A(a, l, m) + B(a, l, m)) - LC(a, l, m)));
    return r;
}

}  // namespace msym
