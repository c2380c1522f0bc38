#pragma once

#include "msym/exterior.hpp"
#include "msym/geometry.hpp"

namespace msym {

// Pointwise hyperkahler data on T*(TD) in the coordinate basis
// (x^1..x^n, y^1..y^n, u_1..u_n, v_1..v_n). Endomorphisms are raised so that
// omega(X, Y) = g(I X, Y), i.e. I = -g^{-1} omega_I.
struct HKFrame {
    int n = 0;
    Vec point;  // (x, y, u, v); only x enters the T^n-invariant structure
    Mat g, omega_I, omega_J, omega_K;
    Mat I, J, K;
    CMat eta_J;  // omega_I + i omega_K
};

HKFrame build_hk(const JetFrame& j, const Vec& fiber = Vec());

// Index offsets of the four coordinate blocks.
inline int hk_x(int /*n*/, int k) { return k; }
inline int hk_y(int n, int k) { return n + k; }
inline int hk_u(int n, int k) { return 2 * n + k; }
inline int hk_v(int n, int k) { return 3 * n + k; }

struct QuaternionResiduals {
    double I2 = 0.0, J2 = 0.0, K2 = 0.0, IJK = 0.0;
    double compatibility = 0.0;  // max over I, J, K of |E^T g E - g|
    double max() const;
};
QuaternionResiduals quaternion_residuals(const HKFrame& f);

struct SphereParam {
    double a = 1.0, b = 0.0, c = 0.0;
    // Normalizes (a, b, c); throws InvalidArgument for the zero vector.
    static SphereParam normalized(double a, double b, double c);
};

struct KahlerFamilyResult {
    double min_singular = 0.0;  // of g^{-1/2} omega_t g^{-1/2}
    double square = 0.0;        // max |(-g^{-1} omega_t)^2 + Id|
};
KahlerFamilyResult kahler_family_check(const HKFrame& f, const SphereParam& t);

// The exterior algebra of the 4n-dimensional cotangent space (n <= 2).
ExtVec<cplx> apply_LJ(const HKFrame& f, const ExtVec<cplx>& a);
// Metric adjoint of omega_K ^ . : sum_{a<b} (omega_K)_ab i(g^{-1} e^b) i(g^{-1} e^a).
ExtVec<cplx> apply_LambdaK(const HKFrame& f, const ExtVec<cplx>& a);
// [L_J, Lambda_K] restricted to one-forms, columns indexed by generators.
CMat lj_lambdak_matrix(const HKFrame& f);
// Literal flip identity [L_J, Lambda_K](dx^j + i du^j) = i(dx^j - i du^j) and the
// same for (dy^j + i dv^j), with du^j = phi^{jk} du_k.
double lj_lambdak_check(const HKFrame& f);
// Eigenform of the same commutator: (dx^j + i du^j) -> i (dx^j + i du^j).
double lj_lambdak_eigen_residual(const HKFrame& f);

// Components (l, a, b) -> index (l * 4n + a) * 4n + b of d omega for omega in
// {I, J, K} (0, 1, 2), by Richardson-extrapolated central differences in x.
// omega_I and omega_K have constant coefficients. For omega_J the x-y block
// closes by the symmetry of phi_jkl, but the u-v block contributes
// -d_l phi^{jk} dx^l ^ du_j ^ dv_k, which vanishes only for quadratic phi.
std::vector<double> d_omega(const Potential& phi, const Vec& x, int which, double h = 1e-3);
double d_omega_residual(const Potential& phi, const Vec& x, int which, double h = 1e-3);

}  // namespace msym
