#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "msym/polynomial.hpp"
#include "msym/scalar_field.hpp"

namespace msym {

// Axis-aligned box D with its sampling grid, the lattice covolume of the torus
// fibers, and the fiber quadrature resolution.
struct Domain {
    int n = 2;
    std::vector<std::pair<double, double>> bounds;
    int grid_resolution = 17;
    double lattice_covolume = 1.0;
    int fiber_resolution = 8;

    static Domain box(int n, double lo, double hi, int resolution = 17);
    void validate() const;

    double spacing(int axis) const;
    double length(int axis) const { return bounds[axis].second - bounds[axis].first; }
    double volume() const;
    Vec center() const;
    bool contains(const Vec& x, double margin = 0.0) const;

    std::size_t node_count() const;
    // Node index in row-major order: the last axis varies fastest.
    Vec node(std::size_t flat) const;
    std::array<int, kMaxDim> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::array<int, kMaxDim>& idx) const;
    bool on_boundary(std::size_t flat, int collar = 1) const;
};

enum class PotentialKind { Quadratic, Polynomial, ExpQuadratic, RadialMA, Grid, LegendreDual };
std::string to_string(PotentialKind k);

// A strictly convex function on a domain: the single source of all geometry.
class Potential : public ScalarField {
public:
    explicit Potential(Domain d) : domain_(std::move(d)) {}
    int dim() const override { return domain_.n; }
    const Domain& domain() const { return domain_; }
    virtual PotentialKind kind() const = 0;
    virtual bool contains(const Vec& x) const { return domain_.contains(x); }
    // Points at which jets may be taken (grid kinds keep a two-cell collar).
    virtual bool jet_admissible(const Vec& x) const { return contains(x); }
    virtual Vec center() const { return domain_.center(); }
    // C in det Hess = C; for potentials that do not solve it, the value at the center.
    double target_constant() const { return target_constant_; }

protected:
    Domain domain_;
    double target_constant_ = 1.0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

class QuadraticPotential : public Potential {
public:
    // phi(x) = 1/2 x^T A x + b.x + c
    QuadraticPotential(Domain d, Mat A, Vec b = Vec(), double c = 0.0);
    static std::shared_ptr<QuadraticPotential> flat(Domain d);
    PotentialKind kind() const override { return PotentialKind::Quadratic; }
    Derivs eval(const Vec& x, int order) const override;
    const Mat& A() const { return A_; }

private:
    Mat A_;
    Vec b_;
    double c_;
};

class PolynomialPotential : public Potential {
public:
    PolynomialPotential(Domain d, Polynomial p);
    PotentialKind kind() const override { return PotentialKind::Polynomial; }
    Derivs eval(const Vec& x, int order) const override { return field_.eval(x, order); }
    const Polynomial& polynomial() const { return field_.polynomial(); }

private:
    PolynomialField field_;
};

// phi(x) = 1/2 x^T A x + sum_m w_m exp(a_m . x) with A positive definite and
// w_m > 0: analytic, strictly convex, and not a Monge-Ampere solution.
class ExpQuadraticPotential : public Potential {
public:
    ExpQuadraticPotential(Domain d, Mat A, std::vector<Vec> dirs, std::vector<double> weights);
    static std::shared_ptr<ExpQuadraticPotential> random(Domain d, std::mt19937_64& rng, int terms = 2,
                                                         double strength = 0.3);
    PotentialKind kind() const override { return PotentialKind::ExpQuadratic; }
    Derivs eval(const Vec& x, int order) const override;

private:
    Mat A_;
    std::vector<Vec> dirs_;
    std::vector<double> w_;
};

// Exact radial solution of det Hess u = C away from the origin:
// u'(r) = (C r^n + beta)^(1/n). Not quadratic, so it exercises every third
// derivative term while keeping det Hess constant.
class RadialMAPotential : public Potential {
public:
    RadialMAPotential(Domain d, double C, double beta);
    PotentialKind kind() const override { return PotentialKind::RadialMA; }
    Derivs eval(const Vec& x, int order) const override;
    double radial_value(double r) const;

private:
    double C_, beta_;
};

// Nodal values on the domain grid plus centered-difference derivative fields,
// multilinearly interpolated between nodes.
struct GridData {
    Domain domain;
    std::vector<double> values;
};

class GridPotential : public Potential {
public:
    explicit GridPotential(GridData g, double target_constant = 1.0);
    PotentialKind kind() const override { return PotentialKind::Grid; }
    Derivs eval(const Vec& x, int order) const override;
    bool jet_admissible(const Vec& x) const override;
    const GridData& data() const { return data_; }
    // Nodal derivative fields (flat node index).
    const std::vector<double>& nodal_values() const { return data_.values; }
    Mat nodal_hessian(std::size_t node) const;

private:
    GridData data_;
    std::vector<double> grad_, hess_, third_;
};

void save_grid_csv(const GridData& g, const std::string& path);
GridData load_grid_csv(const std::string& path);
GridData sample_on_grid(const ScalarField& f, const Domain& d);

// Per-point derivative bundle every operator consumes.
struct JetFrame {
    int n = 0;
    Vec x;
    double value = 0.0;
    Vec gradient;  // the Legendre image x_j
    Mat hessian;
    Mat inverse_hessian;
    Tensor3 third;
    double det_hessian = 0.0;
};

JetFrame jet(const Potential& phi, const Vec& x);

// Convex conjugate psi(p) = <p, x(p)> - phi(x(p)) where x(p) inverts grad phi.
class LegendreDual : public Potential {
public:
    explicit LegendreDual(PotentialPtr phi, double tol = 1e-13, int max_iter = 100);
    PotentialKind kind() const override { return PotentialKind::LegendreDual; }
    Derivs eval(const Vec& p, int order) const override;
    bool contains(const Vec& p) const override;
    Vec center() const override { return center_; }
    // The inverse gradient map p -> x with grad phi(x) = p.
    Vec inverse_gradient(const Vec& p) const;
    const PotentialPtr& primal() const { return phi_; }

private:
    PotentialPtr phi_;
    Vec center_;
    double tol_;
    int max_iter_;
};

std::shared_ptr<LegendreDual> legendre_dual(PotentialPtr phi);

// ma_residual(jet, C) = det phi_jk - C
double ma_residual(const JetFrame& j, double C);

struct StructureTensors {
    int n = 0;
    Mat g_M, omega_M;  // basis (dx^1..dx^n, dy^1..dy^n)
    Mat g_W, omega_W;  // basis (dx^1..dx^n, dy_1..dy_n)
    Mat J;             // block complex structure dx -> dy
    cplx Omega_M{1.0, 0.0};  // coefficient of dz^1...dz^n
    cplx Omega_W{1.0, 0.0};  // coefficient of dz_1...dz_n
    double fiber_volume = 1.0;       // V on M
    double dual_fiber_volume = 1.0;  // V^{-1}-side volume on W
};

StructureTensors structures(const JetFrame& j, double covolume = 1.0);

// det g_t - det g_1 for g_t = phi_jk((1/t) dx dx + t dy dy)
double shrink_volume_check(const Potential& phi, double t, const Vec& x);

// phi together with a B-field potential eta; theta_jk = phi_jk + i eta_jk.
struct ComplexifiedPotential {
    PotentialPtr phi;
    ScalarFieldPtr eta;
    cplx C{1.0, 0.0};

    CMat theta(const Vec& x) const;
};

cplx complexified_residual(const ComplexifiedPotential& cp, const Vec& x);

// Interior grid nodes of the domain (excluding `collar` layers), optionally thinned.
std::vector<Vec> interior_nodes(const Domain& d, int collar = 1, int stride = 1);
// Uniform random points in the box shrunk by `margin` on each side.
std::vector<Vec> random_points(const Domain& d, std::mt19937_64& rng, int count, double margin = 0.1);

}  // namespace msym
