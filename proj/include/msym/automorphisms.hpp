#pragma once

#include <functional>
#include <vector>

#include "msym/geometry.hpp"

namespace msym {

// Value, Jacobian jac(k, j) = df^k/dx^j and second derivatives hess(k, j, l).
struct MapJet {
    Vec value;
    Mat jac;
    Tensor3 hess;
};

// Chain rule for jets: (outer o inner), outer evaluated at inner.value.
MapJet compose_jet(const MapJet& outer, const MapJet& inner);

// A smooth self-map of a convex domain, known through its 2-jet.
class BaseMap {
public:
    using JetFn = std::function<MapJet(const Vec&)>;

    BaseMap(int n, JetFn f, Domain d);
    static BaseMap identity(const Domain& d);
    static BaseMap affine(const Mat& A, const Vec& b, const Domain& d);
    static BaseMap polynomial(const std::vector<Polynomial>& components, const Domain& d);
    // x -> grad phi(x), from D to D*.
    static BaseMap gradient_map(PotentialPtr phi);

    int dim() const { return n_; }
    const Domain& domain() const { return domain_; }
    MapJet jet(const Vec& x) const { return f_(x); }
    Vec operator()(const Vec& x) const { return f_(x).value; }
    // Solves f(x) = y by damped Newton from `start` (domain center if empty).
    // Throws NotInvertible when the iteration fails or leaves the domain.
    Vec inverse(const Vec& y, const Vec& start = Vec()) const;
    MapJet inverse_jet(const Vec& y, const Vec& start = Vec()) const;
    // Affine iff all second derivatives vanish (sup < 1e-12) on the points.
    bool is_affine(const std::vector<Vec>& points) const;

private:
    int n_;
    JetFn f_;
    Domain domain_;
};

// f o g
BaseMap compose(const BaseMap& f, const BaseMap& g);
// fhat = grad phi o f^{-1} o grad psi on D*, psi the Legendre dual of phi.
BaseMap conjugate(const BaseMap& f, PotentialPtr phi);

// A fiberwise-linear map of a tangent or cotangent bundle of a domain, in the
// coordinates (base, fiber) of that side.
struct InducedMap {
    enum class Flavor { A, B, Custom };
    Flavor flavor = Flavor::Custom;
    int n = 0;
    std::function<Vec(const Vec&)> apply;  // (x, y) -> (x', y'), size 2n
    std::shared_ptr<BaseMap> base;         // the map it is induced from
    PotentialPtr potential;                // potential of base->domain()

    Vec operator()(const Vec& xy) const { return apply(xy); }
};

// f_B(x, y) = (f(x), Df(x) y). Throws SingularJacobian at a point where Df is singular.
InducedMap induce_b(const BaseMap& f, PotentialPtr phi = nullptr);
// f_A on T*D*: (p, y) -> (fhat^{-1}(p), Dfhat(fhat^{-1}(p))^T y).
InducedMap induce_a(const BaseMap& f, PotentialPtr phi);
// f_A composed with the chart changes p = grad phi(x) on both sides.
Vec induce_a_in_base_chart(const InducedMap& fa, const Vec& xy);

// d/dzbar_l of the k-th component of f_B at fiber scale t:
// t (i/2) sum_j f^k_jl y^j.
CMat dbar_b_residual(const BaseMap& f, const Vec& x, const Vec& y, double t);
// The same from central differences of G(x, Y) = f(x) + i Df(x) Y at Y = t y.
CMat dbar_b_fd(const BaseMap& f, const Vec& x, const Vec& y, double t, double h = 1e-4);

// sum_k y^k d^2 fhat_k / dx_j dx_l at the dual point p.
Mat varpi_residual(const BaseMap& f, PotentialPtr phi, const Vec& p, const Vec& y);
// Phi^* varpi - varpi on base directions for Phi(p, y) = (fhat(p), (Dfhat^T)^{-1} y),
// by 5-point central differences; equals -varpi_residual at (p, Y) with Y
// the image fiber coordinate.
Mat varpi_pullback_fd(const BaseMap& f, PotentialPtr phi, const Vec& p, const Vec& y, double h = 1e-3);

// max |F^* omega - omega| for omega = sum dx_j ^ dy^j, F's Jacobian by central differences.
double symplectic_pullback_residual(const InducedMap& F, const Vec& xy, double h = 1e-5);
// max |F^* g - g| for the metric of `metric_side` evaluated on both ends
// (g = diag(Hess, Hess) on TD for a B-side map, diag(Hess psi, Hess psi)... via the potential).
double metric_pullback_residual(const InducedMap& F, const Vec& xy, double h = 1e-5);

// B-maps go to the A-lift of the conjugated base map on the dual side and
// back. Throws NotFiberLinear if F fails linearity at the probe point.
InducedMap mirror_flip(const InducedMap& F, const Vec& probe);

}  // namespace msym
