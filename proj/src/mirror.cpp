#include "msym/mirror.hpp"

#include <cmath>
#include <numeric>

#include "msym/errors.hpp"

namespace msym {

FieldMat inverse_hessian_field(const JetFrame& j) {
    const int n = j.n;
    const Mat& Hi = j.inverse_hessian;
    FieldMat P(n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Field f(cplx(Hi(a, b)));
            // d phi^{ab} / dx^l = -phi^{ac} phi_cdl phi^{db}
            for (int l = 0; l < n; ++l) {
                double s = 0.0;
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) s += Hi(a, c) * j.third(c, d, l) * Hi(d, b);
                f.g[l] = -s;
            }
            P[a * n + b] = f;
        }
    return P;
}

FieldMat hessian_field(const JetFrame& j) {
    const int n = j.n;
    FieldMat P(n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Field f(cplx(j.hessian(a, b)));
            for (int l = 0; l < n; ++l) f.g[l] = j.third(a, b, l);
            P[a * n + b] = f;
        }
    return P;
}

namespace {

// Shared construction of T (P = phi^{-1}) and T' (P = phi).
template <class S, class Get>
ExtVec<S> transform_with(const ExtVec<S>& a, Get&& P) {
    const int n = a.gens / 2;
    const unsigned full = (1u << n) - 1u;
    ExtVec<S> r(a.gens);
    for (unsigned m = 0; m < a.size(); ++m) {
        if (is_zero(a.c[m])) continue;
        const unsigned I = dz_part(n, m), J = dzbar_part(n, m);
        unsigned rest = full;
        double sign = 1.0;
        for (unsigned bits = I; bits; bits &= bits - 1) {
            const int i = __builtin_ctz(bits);
            if (popcount(rest >> (i + 1)) & 1) sign = -sign;
            rest &= ~(1u << i);
        }
        for (unsigned L : subsets_of_size(n, popcount(J))) {
            const S det = minor_det<S>(P, J, L);
            r.c[form_mask(n, rest, L)] += a.c[m] * det * sign;
        }
    }
    return r;
}

}  // namespace

FormPoint transform(const FormPoint& a, const JetFrame& j) {
    return transform_with(a, [&](int r, int c) { return cplx(j.inverse_hessian(r, c)); });
}

FormJet transform(const FormJet& a, const JetFrame& j) {
    const FieldMat P = inverse_hessian_field(j);
    return transform_with(a, [&](int r, int c) { return P[r * j.n + c]; });
}

FormPoint transform_prime(const FormPoint& b, const JetFrame& j) {
    return transform_with(b, [&](int r, int c) { return cplx(j.hessian(r, c)); });
}

FormJet transform_prime(const FormJet& b, const JetFrame& j) {
    const FieldMat P = hessian_field(j);
    return transform_with(b, [&](int r, int c) { return P[r * j.n + c]; });
}

int inversion_sign(int n) { return ((n * (n - 1) / 2) % 2) ? -1 : 1; }

FormPoint inverse_transform(const FormPoint& b, const JetFrame& j) {
    return transform_prime(b, j).scale(cplx(inversion_sign(j.n)));
}

FormJet adjoint_transform(const FormJet& c, int p, const JetFrame& j) {
    return transform_prime(c, j).scale(cplx(inversion_sign(j.n) * std::ldexp(1.0, j.n - 2 * p)));
}

FormPoint adjoint_transform(const FormPoint& c, int p, const JetFrame& j) {
    return transform_prime(c, j).scale(cplx(inversion_sign(j.n) * std::ldexp(1.0, j.n - 2 * p)));
}

TnForm transform(const TnForm& a, const MirrorContext& ctx) {
    if (a.side() != Side::M) throw InvalidArgument("transform expects a form on M");
    const int n = a.n();
    TnForm out(n, n - a.p(), a.q(), Side::W);
    auto phi = ctx.phi;
    for (unsigned I : subsets_of_size(n, n - a.p()))
        for (unsigned J : subsets_of_size(n, a.q())) {
            const unsigned m = form_mask(n, I, J);
            out.add(I, J, Coefficient(Coefficient::Fn([a, phi, m](const Vec& x) {
                        return transform(a.at(x), jet(*phi, x)).c[m];
                    })));
        }
    return out;
}

int dbar_commutation_sign(int n) { return (n % 2) ? -1 : 1; }

double dbar_commutation_residual(const TnForm& a, const MirrorContext& ctx, const std::vector<Vec>& points) {
    const int n = a.n();
    const double s = dbar_commutation_sign(n);
    const auto res = parallel_map(points.size(), [&](std::size_t i) {
        const JetFrame j = jet(*ctx.phi, points[i]);
        const FormJet aj = a.at(points[i]);
        const FormPoint lhs = dbar_at(transform(aj, j), Side::W, j);
        const FormPoint rhs = transform(dbar_at(aj, Side::M, j), j);
        return sup_norm(lhs - FormPoint(rhs).scale(cplx(s)));
    });
    return res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
}

double dbar_star_commutation_residual(const TnForm& a, const MirrorContext& ctx, const Quadrature& quad,
                                      int test_degree) {
    const int n = a.n(), p = a.p(), q = a.q();
    if (q == 0) return 0.0;  // dbar* vanishes on (p,0)-forms on both sides
    const double s = dbar_commutation_sign(n);
    std::vector<TnForm> tests;
    for (unsigned I : subsets_of_size(n, n - p))
        for (unsigned J : subsets_of_size(n, q - 1)) {
            tests.push_back(TnForm::basis(n, Side::W, I, J));
            for (int deg = 1; deg <= test_degree; ++deg)
                for (int k = 0; k < n; ++k) {
                    Polynomial mono(n);
                    Polynomial::Exponent e{};
                    e[k] = deg;
                    mono.add_term(e, 1.0);
                    tests.push_back(TnForm::monomial(n, Side::W, I, J, Coefficient(mono)));
                }
        }
    double worst = 0.0;
    for (const TnForm& c : tests) {
        const auto pair = quad.integrate<Eigen::Vector2cd>([&](const Vec& x) {
            const JetFrame j = jet(*ctx.phi, x);
            const FormJet aj = a.at(x), cj = c.at(x);
            const cplx w = pointwise_pairing(transform(values(aj), j), dbar_at(cj, Side::W, j), j.hessian) *
                           volume_density(Side::W, j, ctx.covolume);
            const cplx m = pointwise_pairing(values(aj), dbar_at(adjoint_transform(cj, p, j), Side::M, j),
                                             j.inverse_hessian) *
                           volume_density(Side::M, j, ctx.covolume);
            return Eigen::Vector2cd(w, m);
        });
        worst = std::max(worst, std::abs(pair[0] - s * pair[1]));
    }
    return worst;
}

// ---------------------------------------------------------------- moduli

CMat moduli_map(const ModuliVector& xi, const JetFrame& j, const CMat* theta) {
    const Mat X = xi.xi->hessian(j.x);
    const CMat inv = theta ? CMat(theta->inverse()) : CMat(j.inverse_hessian.cast<cplx>());
    return -(X.cast<cplx>() * inv);
}

IsometryResult moduli_isometry(const ModuliVector& xi, const ModuliVector& zeta, const MirrorContext& ctx,
                               const Quadrature& quad) {
    const auto sums = quad.integrate<Eigen::Vector2d>([&](const Vec& x) {
        const JetFrame j = jet(*ctx.phi, x);
        const Mat X = xi.xi->hessian(x), Z = zeta.xi->hessian(x);
        const double dv = std::sqrt(j.det_hessian);  // dv_D and dv_D* per unit dx
        const double m = 2.0 * ctx.V(j) * (j.inverse_hessian * X * j.inverse_hessian * Z).trace() * dv;
        const CMat B = moduli_map(xi, j), C = moduli_map(zeta, j);
        // vectors d/dz_j paired by phi^{jk}, covectors dzbar_l by phi_lm
        const cplx bc = (B.transpose() * j.inverse_hessian.cast<cplx>() * C * j.hessian.cast<cplx>()).trace();
        const double w = 2.0 / ctx.V(j) * bc.real() * dv;
        return Eigen::Vector2d(m, w);
    });
    IsometryResult r;
    r.m_side = sums[0];
    r.w_side = sums[1];
    r.constant = ctx.V_nominal() * ctx.V_nominal();
    r.residual = std::abs(r.m_side - r.constant * r.w_side) / std::max(std::abs(r.m_side), 1e-300);
    if (r.m_side == 0.0 && r.w_side == 0.0) r.residual = 0.0;
    return r;
}

double moduli_isometry_residual(const ModuliVector& xi, const ModuliVector& zeta, const MirrorContext& ctx,
                                const Quadrature& quad) {
    return moduli_isometry(xi, zeta, ctx, quad).residual;
}

// ---------------------------------------------------------------- Yukawa couplings

std::vector<ExtVec<cplx>> complex_frame_M(int n) {
    std::vector<ExtVec<cplx>> img;
    for (int j = 0; j < n; ++j) {  // dz^j = dx^j + i dy^j
        ExtVec<cplx> e(2 * n);
        e.c[1u << (2 * j)] = 1.0;
        e.c[1u << (2 * j + 1)] = cplx(0.0, 1.0);
        img.push_back(e);
    }
    for (int j = 0; j < n; ++j) {
        ExtVec<cplx> e(2 * n);
        e.c[1u << (2 * j)] = 1.0;
        e.c[1u << (2 * j + 1)] = cplx(0.0, -1.0);
        img.push_back(e);
    }
    return img;
}

std::vector<ExtVec<cplx>> complex_frame_W(const CMat& theta) {
    const int n = static_cast<int>(theta.rows());
    std::vector<ExtVec<cplx>> img;
    for (int bar = 0; bar < 2; ++bar)
        for (int j = 0; j < n; ++j) {
            ExtVec<cplx> e(2 * n);
            for (int k = 0; k < n; ++k) e.c[1u << (2 * k)] = bar ? std::conj(theta(j, k)) : theta(j, k);
            e.c[1u << (2 * j + 1)] = bar ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
            img.push_back(e);
        }
    return img;
}

cplx top_coefficient_M(const std::vector<FormPoint>& forms) {
    if (forms.empty()) return 0.0;
    const int n = form_n(forms[0]);
    FormPoint w = FormPoint::basis(2 * n, 0u);
    for (const FormPoint& f : forms) w = wedge(w, f);
    const ExtVec<cplx> real = substitute(w, complex_frame_M(n), 2 * n);
    return real.c[real.top()];
}

cplx yukawa_B_density(const std::vector<CMat>& A, const JetFrame& j) {
    const int n = j.n;
    FormPoint beta = FormPoint::basis(2 * n, (1u << n) - 1u);  // Omega_W
    for (const CMat& Am : A) {
        FormPoint next(2 * n);
        for (int a = 0; a < n; ++a) {
            const FormPoint contracted = interior(beta, a);
            for (int l = 0; l < n; ++l)
                if (Am(a, l) != cplx(0.0)) next += left_wedge(contracted, n + l).scale(Am(a, l));
        }
        beta = next;
    }
    const FormPoint top = wedge(FormPoint::basis(2 * n, (1u << n) - 1u), beta);
    const ExtVec<cplx> real = substitute(top, complex_frame_W(j.hessian.cast<cplx>()), 2 * n);
    return real.c[real.top()];
}

BeltramiField deformation_image(const TnForm& alpha, const MirrorContext& ctx) {
    if (alpha.p() != 1 || alpha.q() != 1) throw InvalidArgument("deformation image needs a (1,1)-form");
    auto phi = ctx.phi;
    return [alpha, phi](const Vec& x) {
        const int n = alpha.n();
        const FormPoint v = alpha.value(x);
        CMat a(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) a(r, c) = v[form_mask(n, 1u << r, 1u << c)];
        const JetFrame j = jet(*phi, x);
        return CMat(cplx(0.0, 1.0) * a * j.inverse_hessian.cast<cplx>());
    };
}

YukawaResult yukawa_A(const std::vector<TnForm>& forms, const MirrorContext& ctx, const Quadrature& quad,
                      double closed_tol) {
    const int n = ctx.n();
    if (static_cast<int>(forms.size()) != n) throw WrongArity("Yukawa coupling needs exactly n forms");
    for (const TnForm& f : forms)
        if (f.p() != 1 || f.q() != 1 || f.side() != Side::M) throw WrongArity("Yukawa inputs must be (1,1)-forms on M");
    YukawaResult r;
    r.side = 'A';
    r.integrand = parallel_map(quad.size(), [&](std::size_t i) {
        const Vec& x = quad.points[i];
        const JetFrame j = jet(*ctx.phi, x);
        std::vector<FormPoint> vals;
        for (const TnForm& f : forms) {
            const FormJet fj = f.at(x);
            if (sup_norm(dbar_at(fj, Side::M, j)) > closed_tol) throw NotClosed("Yukawa input is not dbar-closed");
            vals.push_back(values(fj));
        }
        return ctx.V(j) * top_coefficient_M(vals);
    });
    for (std::size_t i = 0; i < quad.size(); ++i) r.value += quad.weights[i] * r.integrand[i];
    return r;
}

YukawaResult yukawa_B(const std::vector<BeltramiField>& images, const MirrorContext& ctx, const Quadrature& quad) {
    const int n = ctx.n();
    if (static_cast<int>(images.size()) != n) throw WrongArity("Yukawa coupling needs exactly n images");
    YukawaResult r;
    r.side = 'B';
    r.integrand = parallel_map(quad.size(), [&](std::size_t i) {
        const Vec& x = quad.points[i];
        const JetFrame j = jet(*ctx.phi, x);
        std::vector<CMat> A;
        for (const auto& im : images) A.push_back(im(x));
        return ctx.covolume * yukawa_B_density(A, j);
    });
    for (std::size_t i = 0; i < quad.size(); ++i) r.value += quad.weights[i] * r.integrand[i];
    return r;
}

// ---------------------------------------------------------------- prepotentials

double prepotential_A(const MirrorContext& ctx, const Quadrature& quad) {
    const int n = ctx.n();
    return quad.integrate<double>([&](const Vec& x) {
        const JetFrame j = jet(*ctx.phi, x);
        FormPoint omega(2 * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) omega.c[form_mask(n, 1u << a, 1u << b)] = cplx(0.0, 0.5 * j.hessian(a, b));
        return ctx.covolume * top_coefficient_M(std::vector<FormPoint>(n, omega)).real();
    });
}

cplx omega_omegabar_W(const Mat& phi_hess, const Mat& eta_hess) {
    const int n = static_cast<int>(phi_hess.rows());
    CMat theta(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) theta(a, b) = cplx(phi_hess(a, b), eta_hess(a, b));
    const auto img = complex_frame_W(theta);
    const FormPoint oo = FormPoint::basis(2 * n, (1u << (2 * n)) - 1u);  // Omega ^ Omegabar
    const ExtVec<cplx> real = substitute(oo, img, 2 * n);
    return real.c[real.top()];
}

cplx prepotential_B(const MirrorContext& ctx, const Quadrature& quad) {
    const int n = ctx.n();
    return quad.integrate<cplx>([&](const Vec& x) {
        const Mat H = ctx.phi->hessian(x);
        return ctx.covolume * omega_omegabar_W(H, Mat::Zero(n, n));
    });
}

// ---------------------------------------------------------------- fiber metric

FiberMetric fiber_l2_metric(const MirrorContext& ctx, const JetFrame& j, int fiber_resolution) {
    const int n = j.n;
    const StructureTensors st = structures(j, ctx.covolume);
    const Mat gi = st.g_M.inverse();
    // i(v) omega as a covector: row of omega_M
    auto contract = [&](int a) { return Vec(st.omega_M.row(a).transpose()); };
    FiberMetric fm;
    fm.base = Mat::Zero(n, n);
    fm.mixed = Mat::Zero(n, n);
    // periodic rule on the fiber torus: all nodes carry the same weight
    const double side = std::pow(ctx.covolume, 1.0 / n);
    std::size_t count = 1;
    for (int a = 0; a < n; ++a) count *= fiber_resolution;
    const double w = std::sqrt(j.det_hessian) * std::pow(side / fiber_resolution, n);
    for (std::size_t node = 0; node < count; ++node) {
        // the integrand is T^n-invariant, so the node position does not enter
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                fm.base(a, b) += w * contract(a).dot(gi * contract(b));
                fm.mixed(a, b) += w * contract(a).dot(gi * contract(n + b));
            }
    }
    fm.fiber_volume = ctx.V(j);
    return fm;
}

double fiber_l2_metric_residual(const MirrorContext& ctx, const JetFrame& j, int jj, int l, int fiber_resolution) {
    const FiberMetric fm = fiber_l2_metric(ctx, j, fiber_resolution);
    return std::abs(fm.base(jj, l) - j.hessian(jj, l) * fm.fiber_volume);
}

GrossResiduals gross_bfield_checks(const ComplexifiedPotential& cp, const std::vector<Vec>& points) {
    GrossResiduals g;
    cplx avg(0.0);
    std::vector<cplx> dets;
    for (const Vec& x : points) {
        const Mat H = cp.phi->hessian(x);
        const Mat E = cp.eta ? cp.eta->hessian(x) : Mat::Zero(H.rows(), H.cols());
        const cplx with = omega_omegabar_W(H, E), without = omega_omegabar_W(H, Mat::Zero(H.rows(), H.cols()));
        g.omega_invariance = std::max(g.omega_invariance, std::abs(with - without));
        dets.push_back(cp.theta(x).determinant());
        avg += dets.back();
    }
    g.theta = points.empty() ? 0.0 : -std::arg(avg);
    const cplx rot = std::polar(1.0, g.theta);
    for (const cplx& d : dets) g.zero_section = std::max(g.zero_section, std::abs((rot * d).imag()));
    return g;
}

// ---------------------------------------------------------------- calibration

nlohmann::json MirrorCalibration::to_json() const {
    auto c = [](cplx z) { return nlohmann::json{{"re", z.real()}, {"im", z.imag()}}; };
    return {{"n", n},
            {"inversion_sign", inversion_sign},
            {"dbar_sign", dbar_sign},
            {"lambda_A_adjoint", lambda_A_adjoint},
            {"lambda_B_adjoint", lambda_B_adjoint},
            {"isometry_constant", isometry_constant},
            {"yukawa_ratio", c(yukawa_ratio)},
            {"prepotential_ratio", c(prepotential_ratio)}};
}

MirrorCalibration calibrate_mirror(int n, double covolume) {
    MirrorCalibration cal;
    cal.n = n;
    cal.inversion_sign = inversion_sign(n);
    cal.dbar_sign = dbar_commutation_sign(n);
    Domain d = Domain::box(n, -1.0, 1.0, 5);
    d.lattice_covolume = covolume;
    MirrorContext ctx(QuadraticPotential::flat(d), covolume);
    const Quadrature quad = Quadrature::trapezoid(d);
    cal.isometry_constant = ctx.V_nominal() * ctx.V_nominal();
    // Yukawa inputs: n copies of omega_M
    TnForm omega(n, 1, 1, Side::M);
    for (int a = 0; a < n; ++a) omega.add(1u << a, 1u << a, Coefficient::constant(n, cplx(0.0, 0.5)));
    const std::vector<TnForm> forms(n, omega);
    std::vector<BeltramiField> images;
    for (const TnForm& f : forms) images.push_back(deformation_image(f, ctx));
    cal.yukawa_ratio = yukawa_A(forms, ctx, quad).value / yukawa_B(images, ctx, quad).value;
    cal.prepotential_ratio = prepotential_B(ctx, quad) / prepotential_A(ctx, quad);
    return cal;
}

}  // namespace msym
