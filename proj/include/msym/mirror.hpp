#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "msym/forms.hpp"

namespace msym {

// Geometry shared by the two sides of a mirror pair.
struct MirrorContext {
    PotentialPtr phi;
    double covolume = 1.0;
    std::optional<ComplexifiedPotential> bfield;

    explicit MirrorContext(PotentialPtr p, double cov = 1.0) : phi(std::move(p)), covolume(cov) {}
    int n() const { return phi->dim(); }
    // Fiber volume V on M; constant sqrt(C) * covolume on a Monge-Ampere solution.
    double V(const JetFrame& j) const { return std::sqrt(j.det_hessian) * covolume; }
    // V^{-1}-side fiber volume on W.
    double V_W(const JetFrame& j) const { return covolume / std::sqrt(j.det_hessian); }
    // V for the target constant of the potential.
    double V_nominal() const { return std::sqrt(phi->target_constant()) * covolume; }
    std::shared_ptr<LegendreDual> dual() const { return legendre_dual(phi); }
};

// phi^{jk} and phi_jk as Fields carrying their x-derivatives.
using FieldMat = std::vector<Field>;  // row-major n x n
FieldMat inverse_hessian_field(const JetFrame& j);
FieldMat hessian_field(const JetFrame& j);

// T: forms on M to forms on W, (p,q) -> (n-p,q):
//   T(dz^I dzbar^J) = s_I sum_L det(P[J,L]) dz_{I^c} dzbar_L, P = phi^{-1},
// where s_I is the sign of contracting dz_1...dz_n by d/dz_i, i in I ascending.
FormPoint transform(const FormPoint& a, const JetFrame& j);
FormJet transform(const FormJet& a, const JetFrame& j);
// The same construction from W to M with phi in place of phi^{-1}.
FormPoint transform_prime(const FormPoint& b, const JetFrame& j);
FormJet transform_prime(const FormJet& b, const JetFrame& j);
// T' T = (-1)^{n(n-1)/2} id on every bidegree.
int inversion_sign(int n);
FormPoint inverse_transform(const FormPoint& b, const JetFrame& j);
// Adjoint of T for the density-weighted pairings on each side, applied to a
// W-form of bidegree (n-p, *): 2^{n-2p} T^{-1}.
FormJet adjoint_transform(const FormJet& c, int p, const JetFrame& j);
FormPoint adjoint_transform(const FormPoint& c, int p, const JetFrame& j);

TnForm transform(const TnForm& a, const MirrorContext& ctx);

// dbar T = (-1)^n T dbar on T^n-invariant forms; this is the sign used below.
int dbar_commutation_sign(int n);
double dbar_commutation_residual(const TnForm& a, const MirrorContext& ctx, const std::vector<Vec>& points);
// Weak form: sup over a fixed test basis c of bidegree (n-p, q-1) on W of
// |<T a, dbar c>_W - s <a, dbar T^dagger c>_M|, i.e. of <dbar* T a - T dbar* a, c>.
double dbar_star_commutation_residual(const TnForm& a, const MirrorContext& ctx, const Quadrature& quad,
                                      int test_degree = 1);

// Coefficient matrix -xi_jk phi^{kl} of the image of i xi_jk dz^j dzbar^k;
// with a B-field, theta = phi + i eta replaces phi.
CMat moduli_map(const ModuliVector& xi, const JetFrame& j, const CMat* theta = nullptr);

struct IsometryResult {
    double m_side = 0.0;    // 2 V int tr(phi^-1 xi phi^-1 zeta) dv_D
    double w_side = 0.0;    // 2 V^-1 int of the paired images dv_D*
    double constant = 0.0;  // V^2
    double residual = 0.0;
};
IsometryResult moduli_isometry(const ModuliVector& xi, const ModuliVector& zeta, const MirrorContext& ctx,
                               const Quadrature& quad);
double moduli_isometry_residual(const ModuliVector& xi, const ModuliVector& zeta, const MirrorContext& ctx,
                                const Quadrature& quad);

// Beltrami-type image sum_jl A_jl d/dz_j (x) dzbar_l of a (1,1)-form, with
// A = i alpha phi^{-1} so that potential-induced forms map to moduli_map.
using BeltramiField = std::function<CMat(const Vec&)>;
BeltramiField deformation_image(const TnForm& alpha, const MirrorContext& ctx);

struct YukawaResult {
    cplx value{0.0, 0.0};
    char side = 'A';
    std::vector<cplx> integrand;  // per quadrature node
};
YukawaResult yukawa_A(const std::vector<TnForm>& forms, const MirrorContext& ctx, const Quadrature& quad,
                      double closed_tol = 1e-9);
YukawaResult yukawa_B(const std::vector<BeltramiField>& images, const MirrorContext& ctx, const Quadrature& quad);

// Images of the complex generators (dz then dz-bar) in the real algebra
// with generator 2k = dx^k and 2k+1 = dy^k (M) or dy_k (W). On M
// dz^j = dx^j + i dy^j; on W dz_j = theta_jk dx^k + i dy_j.
std::vector<ExtVec<cplx>> complex_frame_M(int n);
std::vector<ExtVec<cplx>> complex_frame_W(const CMat& theta);

// Top coefficient of a wedge of n (1,1)-forms on M relative to dx^1 dy^1 ... dx^n dy^n.
cplx top_coefficient_M(const std::vector<FormPoint>& forms);
// Top coefficient of Omega_W ^ delta_n ... delta_1 Omega_W relative to dx^1 dy_1 ... dx^n dy_n.
cplx yukawa_B_density(const std::vector<CMat>& A, const JetFrame& j);

double prepotential_A(const MirrorContext& ctx, const Quadrature& quad);
cplx prepotential_B(const MirrorContext& ctx, const Quadrature& quad);
// Omega_W ^ conj(Omega_W) top coefficient with dz_j = theta_jk dx^k + i dy_j.
cplx omega_omegabar_W(const Mat& phi_hess, const Mat& eta_hess);

struct FiberMetric {
    Mat base;   // <<d/dx^j, d/dx^l>> by fiber quadrature
    Mat mixed;  // base-fiber block
    double fiber_volume = 0.0;
};
FiberMetric fiber_l2_metric(const MirrorContext& ctx, const JetFrame& j, int fiber_resolution = 8);
double fiber_l2_metric_residual(const MirrorContext& ctx, const JetFrame& j, int jj, int l, int fiber_resolution = 8);

struct GrossResiduals {
    double omega_invariance = 0.0;  // sup |Omega Omegabar(eta) - Omega Omegabar(0)|
    double zero_section = 0.0;      // sup |Im e^{i theta} det(phi + i eta)|
    double theta = 0.0;
};
GrossResiduals gross_bfield_checks(const ComplexifiedPotential& cp, const std::vector<Vec>& points);

// Overall constants measured once on the flat background.
struct MirrorCalibration {
    int n = 0;
    int inversion_sign = 1;
    int dbar_sign = 1;
    double lambda_A_adjoint = -4.0;
    double lambda_B_adjoint = -1.0;
    double isometry_constant = 1.0;
    cplx yukawa_ratio{1.0, 0.0};
    cplx prepotential_ratio{1.0, 0.0};

    nlohmann::json to_json() const;
};
MirrorCalibration calibrate_mirror(int n, double covolume = 1.0);

}  // namespace msym
