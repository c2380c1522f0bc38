#pragma once

#include <map>
#include <utility>

#include "msym/mirror.hpp"

namespace msym {

// Graph y^j = phi^{jk} df/dx^k over the base, carrying the flat fiber
// connection potential e (may be null) and a phase angle.
struct SLagSection {
    ScalarFieldPtr f;
    ScalarFieldPtr e;
    double theta = 0.0;
};

// y^j = phi^{jk} f_k at the jet point.
Vec section_y(const SLagSection& s, const JetFrame& j);
// Covariant Hessian f_lk - phi^{pq} phi_lkp f_q.
Mat hess_A(const ScalarField& f, const JetFrame& j);
double slag_phase_residual(const SLagSection& s, const JetFrame& j);
// -arg of the average of det(phi + i Hess_A f) over the points.
double slag_average_phase(const Potential& phi, const ScalarField& f, const std::vector<Vec>& points);

// Pointwise data of d + i (b^j dy_j + a_j dx_j) on W. Derivatives are in the
// dual coordinates: da(k, j) = d a_j / d x_k and db(k, j) = d b^j / d x_k.
struct UOnePoint {
    int n = 0;
    Vec a, b;
    Mat da, db;
};

struct UOneConnection {
    int n = 0;
    std::function<UOnePoint(const Vec&)> at;
};

// b^j = y^j and a_j = phi^{jk} e_k with derivatives by the product rule.
UOneConnection fourier_transform_cycle(const SLagSection& s, PotentialPtr phi);
// F = i sum db(k,j) dx_k ^ dy_j + i sum da(k,j) dx_k ^ dx_j as a complex
// 2-form in the W generators (dz_j, then dz-bar_j) with dz_j = dx_j + i dy_j.
FormPoint curvature(const UOnePoint& u);
// (0,2) part of the curvature.
FormPoint curvature_02(const UOnePoint& u);

// (omega_W + F)^n divided by omega_W^n and scaled by det phi, so that it
// equals det(phi + i Hess_A f) for Fourier-transformed sections.
cplx dhym_quantity(const UOnePoint& u, const JetFrame& j);
double dhym_residual(const UOneConnection& u, double theta, const Potential& phi, const std::vector<Vec>& points);

// q-form on the cycle, coefficients keyed by dx^J masks (J subset of 0..n-1).
struct CycleTangentForm {
    int n = 0;
    int q = 0;
    std::map<unsigned, Coefficient> terms;

    CycleTangentForm(int n_, int q_) : n(n_), q(q_) {}
    void add(unsigned J, const Coefficient& c);
    ExtVec<Field> at(const Vec& x) const;
};

// dx^j -> (i/2) phi^{jk} dzbar_k, extended multiplicatively.
FormJet tangent_transform_at(const ExtVec<Field>& t, const JetFrame& j);
TnForm tangent_transform(const CycleTangentForm& t, PotentialPtr phi);

// (sup |dbar B|, sup over real-frame coefficients of |Im e^{i theta} (omega_W + F)^{n-q} ^ del B|).
// `conn` may be null (F = 0).
std::pair<double, double> deformed_harmonic_residual(const TnForm& B, double theta, const Potential& phi,
                                                     const UOneConnection* conn, const std::vector<Vec>& points);

// int_C alpha_1 ^ ... ^ alpha_n over the base.
cplx correlation_A(const std::vector<CycleTangentForm>& alphas, const Quadrature& quad);
// int_W Omega_W ^ beta_1 ^ ... ^ beta_n with beta_i the tangent transforms.
cplx correlation_B(const std::vector<CycleTangentForm>& alphas, const MirrorContext& ctx, const Quadrature& quad);
// A/B ratio for alpha_i = dx^i on the flat unit box.
cplx correlation_calibration(int n, double covolume = 1.0);
double correlation_residual(const std::vector<CycleTangentForm>& alphas, const MirrorContext& ctx,
                            const Quadrature& quad, cplx kappa);

}  // namespace msym
