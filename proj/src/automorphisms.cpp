#include "msym/automorphisms.hpp"

#include <cmath>

#include "msym/errors.hpp"

namespace msym {

MapJet compose_jet(const MapJet& outer, const MapJet& inner) {
    const int m = static_cast<int>(outer.value.size()), n = static_cast<int>(inner.jac.cols()),
              k = static_cast<int>(inner.value.size());
    MapJet r;
    r.value = outer.value;
    r.jac = outer.jac * inner.jac;
    r.hess = Tensor3(n);
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int i = 0; i < k; ++i) {
                    s += outer.jac(c, i) * inner.hess(i, a, b);
                    for (int j = 0; j < k; ++j) s += outer.hess(c, i, j) * inner.jac(i, a) * inner.jac(j, b);
                }
                r.hess(c, a, b) = s;
            }
    return r;
}

BaseMap::BaseMap(int n, JetFn f, Domain d) : n_(n), f_(std::move(f)), domain_(std::move(d)) {}

BaseMap BaseMap::identity(const Domain& d) { return affine(Mat::Identity(d.n, d.n), Vec::Zero(d.n), d); }

BaseMap BaseMap::affine(const Mat& A, const Vec& b, const Domain& d) {
    return BaseMap(d.n, [A, b](const Vec& x) { return MapJet{A * x + b, A, Tensor3(static_cast<int>(x.size()))}; }, d);
}

BaseMap BaseMap::polynomial(const std::vector<Polynomial>& comps, const Domain& d) {
    if (static_cast<int>(comps.size()) != d.n) throw InvalidArgument("polynomial map needs one component per axis");
    std::vector<PolynomialField> fields;
    for (const auto& p : comps) fields.emplace_back(p);
    return BaseMap(d.n, [fields](const Vec& x) {
        const int n = static_cast<int>(x.size());
        MapJet j{Vec(n), Mat(n, n), Tensor3(n)};
        for (int k = 0; k < n; ++k) {
            const Derivs dv = fields[k].eval(x, 2);
            j.value[k] = dv.value;
            j.jac.row(k) = dv.grad.transpose();
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) j.hess(k, a, b) = dv.hess(a, b);
        }
        return j;
    }, d);
}

BaseMap BaseMap::gradient_map(PotentialPtr phi) {
    const Domain d = phi->domain();
    return BaseMap(d.n, [phi](const Vec& x) {
        const Derivs dv = phi->eval(x, 3);
        return MapJet{dv.grad, dv.hess, dv.third};
    }, d);
}

Vec BaseMap::inverse(const Vec& y, const Vec& start) const {
    Vec x = start.size() ? start : domain_.center();
    const double scale = 1.0 + y.norm();
    MapJet j = f_(x);
    Vec r = j.value - y;
    for (int it = 0; it < 100; ++it) {
        if (r.norm() <= 1e-14 * scale) return x;
        Eigen::PartialPivLU<Mat> lu(j.jac);
        if (!(std::abs(lu.determinant()) > 1e-300)) throw NotInvertible("singular Jacobian while inverting a base map");
        const Vec step = -lu.solve(r);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40 && !accepted; ++ls, t *= 0.5) {
            const Vec trial = x + t * step;
            if (!domain_.contains(trial)) continue;
            const MapJet jt = f_(trial);
            const Vec rt = jt.value - y;
            if (rt.norm() < (1.0 - 1e-4 * t) * r.norm() || rt.norm() <= 1e-14 * scale) {
                x = trial;
                j = jt;
                r = rt;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
    if (r.norm() <= 1e-12 * scale) return x;
    throw NotInvertible("base map inversion did not converge");
}

MapJet BaseMap::inverse_jet(const Vec& y, const Vec& start) const {
    const Vec x = inverse(y, start);
    const MapJet j = f_(x);
    const Mat Ji = j.jac.inverse();
    MapJet r{x, Ji, Tensor3(n_)};
    for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
            for (int c = 0; c < n_; ++c) {
                double s = 0.0;
                for (int k = 0; k < n_; ++k)
                    for (int i = 0; i < n_; ++i)
                        for (int l = 0; l < n_; ++l) s += Ji(a, k) * j.hess(k, i, l) * Ji(i, b) * Ji(l, c);
                r.hess(a, b, c) = -s;
            }
    return r;
}

bool BaseMap::is_affine(const std::vector<Vec>& points) const {
    for (const Vec& x : points) {
        const MapJet j = f_(x);
        for (int k = 0; k < n_; ++k)
            for (int a = 0; a < n_; ++a)
                for (int b = 0; b < n_; ++b)
                    if (std::abs(j.hess(k, a, b)) >= 1e-12) return false;
    }
    return true;
}

BaseMap compose(const BaseMap& f, const BaseMap& g) {
    return BaseMap(g.dim(), [f, g](const Vec& x) {
        const MapJet inner = g.jet(x);
        return compose_jet(f.jet(inner.value), inner);
    }, g.domain());
}

namespace {

// The Legendre dual of chi, reusing the primal when chi is itself a dual.
PotentialPtr dual_of(const PotentialPtr& chi) {
    if (auto ld = std::dynamic_pointer_cast<const LegendreDual>(chi)) return ld->primal();
    return legendre_dual(chi);
}

MapJet gradient_jet(const Potential& chi, const Vec& x) {
    const Derivs d = chi.eval(x, 3);
    return MapJet{d.grad, d.hess, d.third};
}

Mat fiber_matrix_a(const BaseMap& f, const Potential& phi, const Potential& psi, const Vec& p, Vec& q) {
    // fhat^{-1} = grad phi o f o grad psi, Dfhat(q) = Hess phi(x) Df(x)^{-1} Hess psi(q), x = grad psi(p)
    const Vec x = psi.gradient(p);
    const MapJet fj = f.jet(x);
    q = phi.gradient(fj.value);
    return phi.hessian(x) * fj.jac.inverse() * psi.hessian(q);
}

}  // namespace

BaseMap conjugate(const BaseMap& f, PotentialPtr phi) {
    const PotentialPtr psi = dual_of(phi);
    return BaseMap(f.dim(), [f, phi, psi](const Vec& p) {
        const MapJet a = gradient_jet(*psi, p);
        const MapJet b = f.inverse_jet(a.value, a.value);
        const MapJet c = gradient_jet(*phi, b.value);
        return compose_jet(c, compose_jet(b, a));
    }, psi->domain());
}

InducedMap induce_b(const BaseMap& f, PotentialPtr phi) {
    InducedMap F;
    F.flavor = InducedMap::Flavor::B;
    F.n = f.dim();
    F.base = std::make_shared<BaseMap>(f);
    F.potential = std::move(phi);
    F.apply = [f](const Vec& xy) {
        const int n = f.dim();
        const MapJet j = f.jet(xy.head(n));
        if (std::abs(j.jac.determinant()) < 1e-14) throw SingularJacobian("f_B: singular Jacobian");
        Vec out(2 * n);
        out << j.value, j.jac * xy.tail(n);
        return out;
    };
    return F;
}

InducedMap induce_a(const BaseMap& f, PotentialPtr phi) {
    const PotentialPtr psi = dual_of(phi);
    InducedMap F;
    F.flavor = InducedMap::Flavor::A;
    F.n = f.dim();
    F.base = std::make_shared<BaseMap>(f);
    F.potential = phi;
    F.apply = [f, phi, psi](const Vec& py) {
        const int n = f.dim();
        Vec q;
        const Mat D = fiber_matrix_a(f, *phi, *psi, py.head(n), q);
        Vec out(2 * n);
        out << q, D.transpose() * py.tail(n);
        return out;
    };
    return F;
}

Vec induce_a_in_base_chart(const InducedMap& fa, const Vec& xy) {
    const int n = fa.n;
    const PotentialPtr psi = dual_of(fa.potential);
    Vec py(2 * n);
    py << fa.potential->gradient(xy.head(n)), xy.tail(n);
    Vec out = fa(py);
    out.head(n) = psi->gradient(Vec(out.head(n)));
    return out;
}

CMat dbar_b_residual(const BaseMap& f, const Vec& x, const Vec& y, double t) {
    const int n = f.dim();
    const MapJet j = f.jet(x);
    CMat r = CMat::Zero(n, n);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += j.hess(k, a, l) * y[a];
            r(k, l) = cplx(0.0, 0.5 * t * s);
        }
    return r;
}

CMat dbar_b_fd(const BaseMap& f, const Vec& x, const Vec& y, double t, double h) {
    const int n = f.dim();
    const Vec Y = t * y;
    auto G = [&](const Vec& xx, const Vec& yy) {
        const MapJet j = f.jet(xx);
        return CVec(j.value.cast<cplx>() + cplx(0.0, 1.0) * (j.jac * yy).cast<cplx>());
    };
    CMat r(n, n);
    for (int l = 0; l < n; ++l) {
        Vec xp = x, xm = x, yp = Y, ym = Y;
        xp[l] += h;
        xm[l] -= h;
        yp[l] += h;
        ym[l] -= h;
        const CVec dx = (G(xp, Y) - G(xm, Y)) / (2 * h);
        const CVec dy = (G(x, yp) - G(x, ym)) / (2 * h);
        r.col(l) = 0.5 * (dx + cplx(0.0, 1.0) * dy);
    }
    return r;
}

Mat varpi_residual(const BaseMap& f, PotentialPtr phi, const Vec& p, const Vec& y) {
    const int n = f.dim();
    const MapJet j = conjugate(f, phi).jet(p);
    Mat r = Mat::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int k = 0; k < n; ++k) r(a, b) += y[k] * j.hess(k, a, b);
    return r;
}

Mat varpi_pullback_fd(const BaseMap& f, PotentialPtr phi, const Vec& p, const Vec& y, double h) {
    const int n = f.dim();
    const BaseMap fhat = conjugate(f, phi);
    auto Phi = [&](const Vec& pp) {
        const MapJet j = fhat.jet(pp);
        Vec out(2 * n);
        out << j.value, j.jac.transpose().lu().solve(y);
        return out;
    };
    Mat dPhi(2 * n, n);
    for (int a = 0; a < n; ++a) {
        auto at = [&](double s) {
            Vec q = p;
            q[a] += s;
            return Phi(q);
        };
        dPhi.col(a) = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
    }
    // varpi(d_a, d_b) on base directions is zero; the pullback pairs dx-parts with dy-parts
    return dPhi.topRows(n).transpose() * dPhi.bottomRows(n);
}

namespace {

Mat fd_jacobian(const std::function<Vec(const Vec&)>& F, const Vec& z, double h) {
    const int m = static_cast<int>(z.size());
    Mat J(m, m);
    for (int a = 0; a < m; ++a) {
        Vec zp = z, zm = z;
        zp[a] += h;
        zm[a] -= h;
        J.col(a) = (F(zp) - F(zm)) / (2 * h);
    }
    return J;
}

}  // namespace

double symplectic_pullback_residual(const InducedMap& F, const Vec& xy, double h) {
    const int n = F.n;
    const Mat J = fd_jacobian(F.apply, xy, h);
    Mat W = Mat::Zero(2 * n, 2 * n);
    W.topRightCorner(n, n) = Mat::Identity(n, n);
    W.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return max_abs(J.transpose() * W * J - W);
}

double metric_pullback_residual(const InducedMap& F, const Vec& xy, double h) {
    const int n = F.n;
    if (!F.potential) throw InvalidArgument("metric pullback needs the potential of the map");
    const PotentialPtr chi = F.flavor == InducedMap::Flavor::A ? dual_of(F.potential) : F.potential;
    auto metric = [&](const Vec& z) {
        const Mat H = chi->hessian(z.head(n));
        Mat g = Mat::Zero(2 * n, 2 * n);
        g.topLeftCorner(n, n) = H;
        g.bottomRightCorner(n, n) = H;
        return g;
    };
    const Mat J = fd_jacobian(F.apply, xy, h);
    return max_abs(J.transpose() * metric(F(xy)) * J - metric(xy));
}

InducedMap mirror_flip(const InducedMap& F, const Vec& probe) {
    const int n = F.n;
    // fiber linearity at the probe: F(x, 2y) and F(x, 0) must bracket F(x, y)
    Vec twice = probe, zero = probe;
    twice.tail(n) *= 2.0;
    zero.tail(n).setZero();
    const Vec a = F(probe), b = F(twice), c = F(zero);
    const double scale = 1.0 + a.norm();
    if (max_abs(Vec(b.head(n) - a.head(n))) > 1e-10 * scale || max_abs(Vec(b.tail(n) - 2.0 * a.tail(n))) > 1e-10 * scale ||
        max_abs(Vec(c.tail(n))) > 1e-10 * scale)
        throw NotFiberLinear("mirror flip needs a fiberwise linear map");
    if (!F.base || !F.potential || F.flavor == InducedMap::Flavor::Custom)
        throw NotFiberLinear("mirror flip needs an induced map with a base map and potential");
    const BaseMap fhat = conjugate(*F.base, F.potential);
    const PotentialPtr psi = dual_of(F.potential);
    return F.flavor == InducedMap::Flavor::B ? induce_a(fhat, psi) : induce_b(fhat, psi);
}

}  // namespace msym
