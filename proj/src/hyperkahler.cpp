#include "msym/hyperkahler.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "msym/errors.hpp"

namespace msym {

HKFrame build_hk(const JetFrame& j, const Vec& fiber) {
    const int n = j.n, N = 4 * n;
    HKFrame f;
    f.n = n;
    f.point = Vec::Zero(N);
    f.point.head(n) = j.x;
    if (fiber.size() == 3 * n) f.point.tail(3 * n) = fiber;
    const Mat& P = j.hessian;
    const Mat& Pi = j.inverse_hessian;
    f.g = Mat::Zero(N, N);
    f.omega_I = Mat::Zero(N, N);
    f.omega_J = Mat::Zero(N, N);
    f.omega_K = Mat::Zero(N, N);
    auto put = [](Mat& w, int a, int b, double v) {
        w(a, b) += v;
        w(b, a) -= v;
    };
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            f.g(hk_x(n, a), hk_x(n, b)) = P(a, b);
            f.g(hk_y(n, a), hk_y(n, b)) = P(a, b);
            f.g(hk_u(n, a), hk_u(n, b)) = Pi(a, b);
            f.g(hk_v(n, a), hk_v(n, b)) = Pi(a, b);
            put(f.omega_J, hk_x(n, a), hk_y(n, b), P(a, b));
            put(f.omega_J, hk_u(n, a), hk_v(n, b), -Pi(a, b));
        }
        put(f.omega_I, hk_x(n, a), hk_u(n, a), 1.0);
        put(f.omega_I, hk_y(n, a), hk_v(n, a), 1.0);
        put(f.omega_K, hk_x(n, a), hk_v(n, a), 1.0);
        put(f.omega_K, hk_y(n, a), hk_u(n, a), -1.0);
    }
    const Mat gi = f.g.inverse();
    f.I = -gi * f.omega_I;
    f.J = -gi * f.omega_J;
    f.K = -gi * f.omega_K;
    f.eta_J = f.omega_I.cast<cplx>() + cplx(0.0, 1.0) * f.omega_K.cast<cplx>();
    return f;
}

double QuaternionResiduals::max() const { return std::max({I2, J2, K2, IJK, compatibility}); }

QuaternionResiduals quaternion_residuals(const HKFrame& f) {
    const Mat Id = Mat::Identity(4 * f.n, 4 * f.n);
    QuaternionResiduals r;
    r.I2 = max_abs(f.I * f.I + Id);
    r.J2 = max_abs(f.J * f.J + Id);
    r.K2 = max_abs(f.K * f.K + Id);
    r.IJK = max_abs(f.I * f.J * f.K + Id);
    for (const Mat* E : {&f.I, &f.J, &f.K}) r.compatibility = std::max(r.compatibility, max_abs(E->transpose() * f.g * *E - f.g));
    return r;
}

SphereParam SphereParam::normalized(double a, double b, double c) {
    const double s = std::sqrt(a * a + b * b + c * c);
    if (!(s > 0.0)) throw InvalidArgument("sphere parameter must be nonzero");
    return {a / s, b / s, c / s};
}

KahlerFamilyResult kahler_family_check(const HKFrame& f, const SphereParam& t) {
    const Mat w = t.a * f.omega_I + t.b * f.omega_J + t.c * f.omega_K;
    Eigen::SelfAdjointEigenSolver<Mat> es(f.g);
    const Mat gm = es.operatorInverseSqrt();
    const Eigen::JacobiSVD<Mat> svd(gm * w * gm);
    KahlerFamilyResult r;
    r.min_singular = svd.singularValues().minCoeff();
    const Mat Jt = -f.g.inverse() * w;
    r.square = max_abs(Jt * Jt + Mat::Identity(4 * f.n, 4 * f.n));
    return r;
}

namespace {

void require_small(const HKFrame& f) {
    if (f.n > 2) throw DimensionTooLarge("exterior algebra of T*(TD) is materialized for n <= 2 only");
}

ExtVec<cplx> interior_vector(const ExtVec<cplx>& a, const Vec& v) {
    ExtVec<cplx> r(a.gens);
    for (int c = 0; c < a.gens; ++c)
        if (v[c] != 0.0) r += interior(a, c).scale(cplx(v[c]));
    return r;
}

}  // namespace

ExtVec<cplx> apply_LJ(const HKFrame& f, const ExtVec<cplx>& a) {
    require_small(f);
    const int N = 4 * f.n;
    ExtVec<cplx> w(N);
    for (int p = 0; p < N; ++p)
        for (int q = p + 1; q < N; ++q)
            if (f.omega_J(p, q) != 0.0) w.c[(1u << p) | (1u << q)] = f.omega_J(p, q);
    return wedge(w, a);
}

ExtVec<cplx> apply_LambdaK(const HKFrame& f, const ExtVec<cplx>& a) {
    require_small(f);
    const int N = 4 * f.n;
    const Mat gi = f.g.inverse();
    ExtVec<cplx> r(N);
    for (int p = 0; p < N; ++p)
        for (int q = p + 1; q < N; ++q) {
            if (f.omega_K(p, q) == 0.0) continue;
            // adjoint of e^p ^ e^q ^ . is i(e^q#) i(e^p#): contract p first
            const ExtVec<cplx> inner = interior_vector(a, gi.col(p));
            r += interior_vector(inner, gi.col(q)).scale(cplx(f.omega_K(p, q)));
        }
    return r;
}

CMat lj_lambdak_matrix(const HKFrame& f) {
    require_small(f);
    const int N = 4 * f.n;
    CMat X = CMat::Zero(N, N);
    for (int c = 0; c < N; ++c) {
        const ExtVec<cplx> e = ExtVec<cplx>::basis(N, 1u << c);
        const ExtVec<cplx> img = apply_LJ(f, apply_LambdaK(f, e)) - apply_LambdaK(f, apply_LJ(f, e));
        for (int r = 0; r < N; ++r) X(r, c) = img.c[1u << r];
    }
    return X;
}

namespace {

// dx^j + s i du^j (first) or dy^j + s i dv^j (second) as coefficient vectors,
// with du^j = phi^{jk} du_k read off from the u-block of g.
CVec mixed_covector(const HKFrame& f, int j, bool second, double s) {
    const int n = f.n;
    CVec v = CVec::Zero(4 * n);
    v[second ? hk_y(n, j) : hk_x(n, j)] = 1.0;
    for (int k = 0; k < n; ++k) v[second ? hk_v(n, k) : hk_u(n, k)] = cplx(0.0, s) * f.g(hk_u(n, j), hk_u(n, k));
    return v;
}

}  // namespace

double lj_lambdak_check(const HKFrame& f) {
    const CMat X = lj_lambdak_matrix(f);
    double r = 0.0;
    for (int j = 0; j < f.n; ++j)
        for (bool second : {false, true}) {
            const CVec in = mixed_covector(f, j, second, 1.0);
            const CVec flip = cplx(0.0, 1.0) * mixed_covector(f, j, second, -1.0);
            r = std::max(r, max_abs(CVec(X * in - flip)));
        }
    return r;
}

double lj_lambdak_eigen_residual(const HKFrame& f) {
    const CMat X = lj_lambdak_matrix(f);
    double r = 0.0;
    for (int j = 0; j < f.n; ++j)
        for (bool second : {false, true}) {
            const CVec in = mixed_covector(f, j, second, 1.0);
            r = std::max(r, max_abs(CVec(X * in - cplx(0.0, 1.0) * in)));
        }
    return r;
}

std::vector<double> d_omega(const Potential& phi, const Vec& x, int which, double h) {
    const int n = phi.dim(), N = 4 * n;
    auto omega_at = [&](const Vec& p) {
        const HKFrame f = build_hk(jet(phi, p));
        return which == 0 ? f.omega_I : which == 1 ? f.omega_J : f.omega_K;
    };
    // derivative of the coefficient matrix along x^l
    auto deriv = [&](int l, double step) {
        Vec xp = x, xm = x;
        xp[l] += step;
        xm[l] -= step;
        return Mat((omega_at(xp) - omega_at(xm)) / (2 * step));
    };
    std::vector<Mat> D(n);
    for (int l = 0; l < n; ++l) D[l] = (4.0 * deriv(l, h / 2) - deriv(l, h)) / 3.0;
    // (d omega)_{lab} = d_l w_ab + d_a w_bl + d_b w_la; only x-derivatives are nonzero
    auto term = [&](int l, int a, int b) { return l < n ? D[l](a, b) : 0.0; };
    std::vector<double> out(N * N * N, 0.0);
    for (int l = 0; l < N; ++l)
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                out[(l * N + a) * N + b] = term(l, a, b) + term(a, b, l) + term(b, l, a);
    return out;
}

double d_omega_residual(const Potential& phi, const Vec& x, int which, double h) {
    double r = 0.0;
    for (double v : d_omega(phi, x, which, h)) r = std::max(r, std::abs(v));
    return r;
}

}  // namespace msym
