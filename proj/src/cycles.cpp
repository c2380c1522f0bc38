#include "msym/cycles.hpp"

#include <cmath>

#include "msym/errors.hpp"

namespace msym {

namespace {

const cplx kI(0.0, 1.0);

Vec real_part(const ExtVec<cplx>& v) {
    Vec r(v.size());
    for (unsigned m = 0; m < v.size(); ++m) r[m] = v.c[m].real();
    return r;
}

// omega_W = (i/2) sum phi^{jk} dz_j ^ dzbar_k
FormPoint omega_W(const JetFrame& j) {
    const int n = j.n;
    FormPoint w(2 * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            w += wedge(FormPoint::basis(2 * n, 1u << a), FormPoint::basis(2 * n, 1u << (n + b)))
                     .scale(0.5 * kI * j.inverse_hessian(a, b));
    return w;
}

FormPoint power(const FormPoint& w, int k) {
    FormPoint r = FormPoint::basis(w.gens, 0u);
    for (int i = 0; i < k; ++i) r = wedge(r, w);
    return r;
}

}  // namespace

Vec section_y(const SLagSection& s, const JetFrame& j) { return j.inverse_hessian * s.f->gradient(j.x); }

Mat hess_A(const ScalarField& f, const JetFrame& j) {
    const Derivs d = f.eval(j.x, 2);
    const Vec y = j.inverse_hessian * d.grad;
    Mat h = d.hess;
    for (int l = 0; l < j.n; ++l)
        for (int k = 0; k < j.n; ++k)
            for (int p = 0; p < j.n; ++p) h(l, k) -= j.third(l, k, p) * y[p];
    return h;
}

double slag_phase_residual(const SLagSection& s, const JetFrame& j) {
    const CMat m = j.hessian.cast<cplx>() + kI * hess_A(*s.f, j).cast<cplx>();
    return std::abs((std::polar(1.0, s.theta) * m.determinant()).imag());
}

double slag_average_phase(const Potential& phi, const ScalarField& f, const std::vector<Vec>& points) {
    cplx avg = 0.0;
    for (const Vec& x : points) {
        const JetFrame j = jet(phi, x);
        avg += (j.hessian.cast<cplx>() + kI * hess_A(f, j).cast<cplx>()).determinant();
    }
    return points.empty() ? 0.0 : -std::arg(avg);
}

UOneConnection fourier_transform_cycle(const SLagSection& s, PotentialPtr phi) {
    UOneConnection u;
    u.n = phi->dim();
    u.at = [s, phi](const Vec& x) {
        const JetFrame j = jet(*phi, x);
        const int n = j.n;
        const FieldMat P = inverse_hessian_field(j);
        // v_j = phi^{jk} g_k with g = grad f or grad e; x-derivatives by the
        // product rule, then dual derivatives d/dx_k = phi^{kl} d/dx^l.
        auto lift = [&](const ScalarField& g, Vec& val, Mat& dual) {
            const Derivs d = g.eval(x, 2);
            Mat dx = Mat::Zero(n, n);  // dx(l, jj) = d v_jj / dx^l
            val = Vec::Zero(n);
            for (int jj = 0; jj < n; ++jj)
                for (int k = 0; k < n; ++k) {
                    const Field& pk = P[jj * n + k];
                    val[jj] += pk.v.real() * d.grad[k];
                    for (int l = 0; l < n; ++l)
                        dx(l, jj) += pk.g[l].real() * d.grad[k] + pk.v.real() * d.hess(k, l);
                }
            dual = j.inverse_hessian * dx;
        };
        UOnePoint p;
        p.n = n;
        lift(*s.f, p.b, p.db);
        if (s.e) {
            lift(*s.e, p.a, p.da);
        } else {
            p.a = Vec::Zero(n);
            p.da = Mat::Zero(n, n);
        }
        return p;
    };
    return u;
}

FormPoint curvature(const UOnePoint& u) {
    const int n = u.n;
    auto dx = [&](int k) {
        FormPoint f(2 * n);
        f.c[1u << k] = 0.5;
        f.c[1u << (n + k)] = 0.5;
        return f;
    };
    auto dy = [&](int k) {
        FormPoint f(2 * n);
        f.c[1u << k] = -0.5 * kI;
        f.c[1u << (n + k)] = 0.5 * kI;
        return f;
    };
    FormPoint F(2 * n);
    for (int k = 0; k < n; ++k)
        for (int jj = 0; jj < n; ++jj) {
            F += wedge(dx(k), dy(jj)).scale(kI * u.db(k, jj));
            F += wedge(dx(k), dx(jj)).scale(kI * u.da(k, jj));
        }
    return F;
}

FormPoint curvature_02(const UOnePoint& u) { return bidegree_part(curvature(u), 0, 2); }

cplx dhym_quantity(const UOnePoint& u, const JetFrame& j) {
    const int n = j.n;
    const auto frame = complex_frame_W(j.hessian.cast<cplx>());
    const FormPoint w = omega_W(j);
    const ExtVec<cplx> num = substitute(power(w + curvature(u), n), frame, 2 * n);
    const ExtVec<cplx> den = substitute(power(w, n), frame, 2 * n);
    return num.c[num.top()] / den.c[den.top()] * j.det_hessian;
}

double dhym_residual(const UOneConnection& u, double theta, const Potential& phi, const std::vector<Vec>& points) {
    const cplx rot = std::polar(1.0, theta);
    const auto r = parallel_map(points.size(), [&](std::size_t i) {
        const JetFrame j = jet(phi, points[i]);
        return std::abs((rot * dhym_quantity(u.at(points[i]), j)).imag());
    });
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, v);
    return worst;
}

void CycleTangentForm::add(unsigned J, const Coefficient& c) {
    if (popcount(J) != q) throw InvalidArgument("tangent form term has the wrong degree");
    auto it = terms.find(J);
    if (it == terms.end())
        terms.emplace(J, c);
    else
        it->second = it->second + c;
}

ExtVec<Field> CycleTangentForm::at(const Vec& x) const {
    ExtVec<Field> v(n);
    for (const auto& [J, c] : terms) v.c[J] = c(x);
    return v;
}

FormJet tangent_transform_at(const ExtVec<Field>& t, const JetFrame& j) {
    const int n = j.n;
    const FieldMat P = inverse_hessian_field(j);
    FormJet out(2 * n);
    for (unsigned J = 0; J < t.size(); ++J) {
        if (is_zero(t.c[J])) continue;
        const int q = popcount(J);
        const cplx scale = std::pow(0.5 * kI, q);
        for (unsigned L : subsets_of_size(n, q)) {
            const Field det = minor_det<Field>([&](int r, int c) { return P[r * n + c]; }, J, L);
            out.c[form_mask(n, 0u, L)] += t.c[J] * det * scale;
        }
    }
    return out;
}

TnForm tangent_transform(const CycleTangentForm& t, PotentialPtr phi) {
    const int n = t.n;
    TnForm out(n, 0, t.q, Side::W);
    for (unsigned L : subsets_of_size(n, t.q)) {
        const unsigned m = form_mask(n, 0u, L);
        out.add(0u, L, Coefficient(Coefficient::Fn([t, phi, m](const Vec& x) {
                    return tangent_transform_at(t.at(x), jet(*phi, x)).c[m];
                })));
    }
    return out;
}

std::pair<double, double> deformed_harmonic_residual(const TnForm& B, double theta, const Potential& phi,
                                                     const UOneConnection* conn, const std::vector<Vec>& points) {
    const int n = B.n(), q = B.q();
    const cplx rot = std::polar(1.0, theta);
    const auto r = parallel_map(points.size(), [&](std::size_t i) {
        const JetFrame j = jet(phi, points[i]);
        const FormJet b = B.at(points[i]);
        const double closed = sup_norm(dbar_at(b, Side::W, j));
        FormPoint w = omega_W(j);
        if (conn) w += curvature(conn->at(points[i]));
        const FormPoint top = wedge(power(w, n - q), del_at(b, Side::W, j)).scale(rot);
        const Vec im = real_part(substitute(top, complex_frame_W(j.hessian.cast<cplx>()), 2 * n).scale(-kI));
        return std::make_pair(closed, im.size() ? im.cwiseAbs().maxCoeff() : 0.0);
    });
    std::pair<double, double> worst{0.0, 0.0};
    for (const auto& p : r) {
        worst.first = std::max(worst.first, p.first);
        worst.second = std::max(worst.second, p.second);
    }
    return worst;
}

namespace {

void check_arity(const std::vector<CycleTangentForm>& alphas, int n) {
    if (static_cast<int>(alphas.size()) != n) throw WrongArity("correlation needs exactly n one-forms");
    for (const auto& a : alphas)
        if (a.q != 1 || a.n != n) throw WrongArity("correlation inputs must be one-forms on the cycle");
}

}  // namespace

cplx correlation_A(const std::vector<CycleTangentForm>& alphas, const Quadrature& quad) {
    const int n = alphas.empty() ? 0 : alphas[0].n;
    check_arity(alphas, n);
    return quad.integrate<cplx>([&](const Vec& x) {
        ExtVec<cplx> w = ExtVec<cplx>::basis(n, 0u);
        for (const auto& a : alphas) w = wedge(w, values(a.at(x)));
        return w.c[w.top()];
    });
}

cplx correlation_B(const std::vector<CycleTangentForm>& alphas, const MirrorContext& ctx, const Quadrature& quad) {
    const int n = ctx.n();
    check_arity(alphas, n);
    return quad.integrate<cplx>([&](const Vec& x) {
        const JetFrame j = jet(*ctx.phi, x);
        FormPoint w = FormPoint::basis(2 * n, (1u << n) - 1u);
        for (const auto& a : alphas) w = wedge(w, values(tangent_transform_at(a.at(x), j)));
        const ExtVec<cplx> real = substitute(w, complex_frame_W(j.hessian.cast<cplx>()), 2 * n);
        return ctx.covolume * real.c[real.top()];
    });
}

cplx correlation_calibration(int n, double covolume) {
    Domain d = Domain::box(n, 0.0, 1.0, 5);
    d.lattice_covolume = covolume;
    MirrorContext ctx(QuadraticPotential::flat(d), covolume);
    std::vector<CycleTangentForm> alphas;
    for (int i = 0; i < n; ++i) {
        alphas.emplace_back(n, 1);
        alphas.back().add(1u << i, Coefficient::constant(n, 1.0));
    }
    const Quadrature quad = Quadrature::gauss(d, 2);
    return correlation_A(alphas, quad) / correlation_B(alphas, ctx, quad);
}

double correlation_residual(const std::vector<CycleTangentForm>& alphas, const MirrorContext& ctx,
                            const Quadrature& quad, cplx kappa) {
    return std::abs(correlation_A(alphas, quad) - kappa * correlation_B(alphas, ctx, quad));
}

}  // namespace msym
