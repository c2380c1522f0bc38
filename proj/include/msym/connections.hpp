#pragma once

#include "msym/geometry.hpp"

namespace msym {

// Torsion-free affine connection on the base, given by its Christoffel
// symbols gamma(j, l, m) = Gamma^j_lm in the affine coordinates x.
struct Connection {
    enum class Flavor { A, B };
    Flavor flavor = Flavor::A;
    Tensor3 gamma;
};

// Gamma^j_lm = phi^{jk} phi_klm: the flat affine structure of the dual coordinates.
Connection a_connection(const JetFrame& j);
// The flat connection d: Gamma = 0.
Connection b_connection(int n);

// R^j_{k,lm} with the x-derivatives of Gamma taken by Richardson-extrapolated
// central differences of step h (and h/2).
struct Curvature {
    int n = 0;
    std::vector<double> r;  // index ((j * n + k) * n + l) * n + m
    double operator()(int j, int k, int l, int m) const { return r[((j * n + k) * n + l) * n + m]; }
};
Curvature a_curvature(const Potential& phi, const Vec& x, double h = 1e-3);
double a_curvature_residual(const Potential& phi, const Vec& x, double h = 1e-3);

// Components (q, p, k) of  sum phi_pkq dx^q (x) dx^p^dy^k  -  sum phi_jk Gamma^j_pq dx^q (x) dx^p^dy^k.
// `perturbation` is added to Gamma before evaluation (control runs).
double nabla_omega_residual(const JetFrame& j, const Tensor3* perturbation = nullptr);

// Christoffel symbols of the A-connection rewritten in the dual coordinates
// p = grad phi(x) by the chain rule with the dual jet (Hess psi, psi_abc).
Tensor3 a_connection_in_dual(const JetFrame& j, const JetFrame& dual);
// max |a_connection_in_dual|; the A-connection is d in the dual chart.
double connection_duality_residual(const JetFrame& j, const JetFrame& dual);
// The B-connection carried to the dual chart, compared against the
// A-connection of psi built from the dual jet alone.
double connection_duality_reverse_residual(const JetFrame& j, const JetFrame& dual);

// Levi-Civita Christoffels of g_D = phi_jk dx^j dx^k from the metric
// derivatives, 1/2 g^{jk} (g_kl,m + g_km,l - g_lm,k).
Tensor3 levi_civita(const JetFrame& j);
// max |(Gamma_A + Gamma_B)/2 - Gamma_LC|.
double levi_civita_midpoint_residual(const JetFrame& j);

}  // namespace msym
