#include "msym/geometry.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "msym/errors.hpp"
#include "msym/quadrature.hpp"

namespace msym {

// ---------------------------------------------------------------- Domain

Domain Domain::box(int n, double lo, double hi, int resolution) {
    Domain d;
    d.n = n;
    d.bounds.assign(n, {lo, hi});
    d.grid_resolution = resolution;
    return d;
}

void Domain::validate() const {
    if (n < 1 || n > kMaxDim) throw InvalidArgument("dimension must be in 1..4");
    if (static_cast<int>(bounds.size()) != n) throw InvalidArgument("bounds arity does not match n");
    for (const auto& [lo, hi] : bounds)
        if (!(hi > lo)) throw InvalidArgument("empty interval in bounds");
    if (grid_resolution < 3) throw InvalidArgument("grid resolution too small");
    if (!(lattice_covolume > 0.0)) throw InvalidArgument("lattice covolume must be positive");
    if (fiber_resolution < 1) throw InvalidArgument("fiber resolution must be positive");
}

double Domain::spacing(int axis) const { return length(axis) / (grid_resolution - 1); }

double Domain::volume() const {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= length(i);
    return v;
}

Vec Domain::center() const {
    Vec c(n);
    for (int i = 0; i < n; ++i) c(i) = 0.5 * (bounds[i].first + bounds[i].second);
    return c;
}

bool Domain::contains(const Vec& x, double margin) const {
    for (int i = 0; i < n; ++i)
        if (x(i) < bounds[i].first + margin || x(i) > bounds[i].second - margin) return false;
    return true;
}

std::size_t Domain::node_count() const {
    std::size_t c = 1;
    for (int i = 0; i < n; ++i) c *= grid_resolution;
    return c;
}

std::array<int, kMaxDim> Domain::unflatten(std::size_t flat) const {
    std::array<int, kMaxDim> idx{};
    for (int d = n - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % grid_resolution);
        flat /= grid_resolution;
    }
    return idx;
}

std::size_t Domain::flatten(const std::array<int, kMaxDim>& idx) const {
    std::size_t f = 0;
    for (int d = 0; d < n; ++d) f = f * grid_resolution + idx[d];
    return f;
}

Vec Domain::node(std::size_t flat) const {
    const auto idx = unflatten(flat);
    Vec x(n);
    for (int d = 0; d < n; ++d) x(d) = bounds[d].first + idx[d] * spacing(d);
    return x;
}

bool Domain::on_boundary(std::size_t flat, int collar) const {
    const auto idx = unflatten(flat);
    for (int d = 0; d < n; ++d)
        if (idx[d] < collar || idx[d] > grid_resolution - 1 - collar) return true;
    return false;
}

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::Quadratic: return "quadratic";
        case PotentialKind::Polynomial: return "polynomial";
        case PotentialKind::ExpQuadratic: return "exp-quadratic";
        case PotentialKind::RadialMA: return "radial-ma";
        case PotentialKind::Grid: return "grid";
        case PotentialKind::LegendreDual: return "legendre-dual";
    }
    return "unknown";
}

// ---------------------------------------------------------------- analytic kinds

QuadraticPotential::QuadraticPotential(Domain d, Mat A, Vec b, double c)
    : Potential(std::move(d)), A_(std::move(A)), b_(std::move(b)), c_(c) {
    if (b_.size() == 0) b_ = Vec::Zero(domain_.n);
    A_ = 0.5 * (A_ + A_.transpose()).eval();
    target_constant_ = A_.determinant();
}

std::shared_ptr<QuadraticPotential> QuadraticPotential::flat(Domain d) {
    const int n = d.n;
    return std::make_shared<QuadraticPotential>(std::move(d), Mat::Identity(n, n));
}

Derivs QuadraticPotential::eval(const Vec& x, int order) const {
    Derivs d;
    d.value = 0.5 * x.dot(A_ * x) + b_.dot(x) + c_;
    if (order >= 1) d.grad = A_ * x + b_;
    if (order >= 2) d.hess = A_;
    if (order >= 3) d.third = Tensor3(domain_.n);
    return d;
}

PolynomialPotential::PolynomialPotential(Domain d, Polynomial p)
    : Potential(std::move(d)), field_(std::move(p)) {
    target_constant_ = field_.eval(domain_.center(), 2).hess.determinant();
}

ExpQuadraticPotential::ExpQuadraticPotential(Domain d, Mat A, std::vector<Vec> dirs, std::vector<double> weights)
    : Potential(std::move(d)), A_(std::move(A)), dirs_(std::move(dirs)), w_(std::move(weights)) {
    if (dirs_.size() != w_.size()) throw InvalidArgument("direction/weight count mismatch");
    for (double w : w_)
        if (w < 0.0) throw InvalidArgument("exponential weights must be nonnegative");
    target_constant_ = eval(domain_.center(), 2).hess.determinant();
}

std::shared_ptr<ExpQuadraticPotential> ExpQuadraticPotential::random(Domain d, std::mt19937_64& rng, int terms,
                                                                     double strength) {
    const int n = d.n;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) R(i, j) = 0.4 * u(rng);
    Mat A = Mat::Identity(n, n) + R * R.transpose();
    std::vector<Vec> dirs;
    std::vector<double> w;
    for (int m = 0; m < terms; ++m) {
        Vec a(n);
        for (int i = 0; i < n; ++i) a(i) = u(rng);
        dirs.push_back(a);
        w.push_back(strength * (0.5 + 0.5 * std::abs(u(rng))));
    }
    return std::make_shared<ExpQuadraticPotential>(std::move(d), std::move(A), std::move(dirs), std::move(w));
}

Derivs ExpQuadraticPotential::eval(const Vec& x, int order) const {
    const int n = domain_.n;
    Derivs d;
    d.value = 0.5 * x.dot(A_ * x);
    if (order >= 1) d.grad = A_ * x;
    if (order >= 2) d.hess = A_;
    if (order >= 3) d.third = Tensor3(n);
    for (std::size_t m = 0; m < w_.size(); ++m) {
        const Vec& a = dirs_[m];
        const double e = w_[m] * std::exp(a.dot(x));
        d.value += e;
        if (order >= 1) d.grad += e * a;
        if (order >= 2) d.hess += e * a * a.transpose();
        if (order >= 3)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) d.third(i, j, k) += e * a(i) * a(j) * a(k);
    }
    return d;
}

RadialMAPotential::RadialMAPotential(Domain d, double C, double beta) : Potential(std::move(d)), C_(C), beta_(beta) {
    if (!(C_ > 0.0) || !(beta_ > 0.0)) throw InvalidArgument("radial solution needs C > 0 and beta > 0");
    for (int i = 0; i < domain_.n; ++i)
        if (domain_.bounds[i].first <= 0.0 && domain_.bounds[i].second >= 0.0 && domain_.n == 1)
            throw InvalidArgument("radial solution requires a domain away from the origin");
    target_constant_ = C_;
}

double RadialMAPotential::radial_value(double r) const {
    const int n = domain_.n;
    if (n == 1) return 0.5 * C_ * r * r + beta_ * r;
    if (n == 2) {
        const double sc = std::sqrt(C_);
        return 0.5 * r * std::sqrt(C_ * r * r + beta_) + beta_ / (2.0 * sc) * std::asinh(sc * r / std::sqrt(beta_));
    }
    // composite Gauss-Legendre on [0, r]; the integrand is analytic there
    static const auto rule = [] {
        std::pair<std::vector<double>, std::vector<double>> nw;
        gauss_legendre(16, nw.first, nw.second);
        return nw;
    }();
    const int panels = 16;
    const double hp = r / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = p * hp;
        for (std::size_t i = 0; i < rule.first.size(); ++i) {
            const double t = a + 0.5 * hp * (rule.first[i] + 1.0);
            s += 0.5 * hp * rule.second[i] * std::pow(C_ * std::pow(t, n) + beta_, 1.0 / n);
        }
    }
    return s;
}

Derivs RadialMAPotential::eval(const Vec& x, int order) const {
    const int n = domain_.n;
    const double r = x.norm();
    if (r <= 0.0) throw OutOfDomain("radial solution evaluated at the origin");
    Derivs d;
    d.value = radial_value(r);
    const double rn = std::pow(r, n);
    const double w = std::pow(C_ * rn + beta_, 1.0 / n);                         // u'
    const double w1 = C_ * std::pow(r, n - 1) * std::pow(w, 1 - n);               // u''
    const double w2 = C_ * (n - 1) * std::pow(r, n - 2) * std::pow(w, 1 - n) +    // u'''
                      C_ * std::pow(r, n - 1) * (1 - n) * std::pow(w, -n) * w1;
    const double a = w / r;
    const double b = (w1 * r - w) / (r * r * r);
    const double c = (w2 / (r * r) - 3.0 * (w1 * r - w) / (r * r * r * r)) / r;
    if (order >= 1) d.grad = a * x;
    if (order >= 2) d.hess = a * Mat::Identity(n, n) + b * x * x.transpose();
    if (order >= 3) {
        d.third = Tensor3(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    d.third(i, j, k) = b * (x(k) * (i == j) + x(j) * (i == k) + x(i) * (j == k)) + c * x(i) * x(j) * x(k);
    }
    return d;
}

// ---------------------------------------------------------------- grid kind

namespace {

std::size_t stride_of(const Domain& d, int axis) {
    std::size_t s = 1;
    for (int k = axis + 1; k < d.n; ++k) s *= d.grid_resolution;
    return s;
}

// First derivative along one axis of a nodal field: centered inside, second
// order one-sided at the two ends.
std::vector<double> diff_axis(const Domain& d, const std::vector<double>& f, int axis) {
    const std::size_t s = stride_of(d, axis);
    const int N = d.grid_resolution;
    const double h = d.spacing(axis);
    std::vector<double> out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const int i = d.unflatten(k)[axis];
        if (i == 0)
            out[k] = (-3.0 * f[k] + 4.0 * f[k + s] - f[k + 2 * s]) / (2.0 * h);
        else if (i == N - 1)
            out[k] = (3.0 * f[k] - 4.0 * f[k - s] + f[k - 2 * s]) / (2.0 * h);
        else
            out[k] = (f[k + s] - f[k - s]) / (2.0 * h);
    }
    return out;
}

std::vector<double> second_axis(const Domain& d, const std::vector<double>& f, int axis) {
    const std::size_t s = stride_of(d, axis);
    const int N = d.grid_resolution;
    const double h = d.spacing(axis);
    std::vector<double> out(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const int i = d.unflatten(k)[axis];
        if (i == 0)
            out[k] = (2.0 * f[k] - 5.0 * f[k + s] + 4.0 * f[k + 2 * s] - f[k + 3 * s]) / (h * h);
        else if (i == N - 1)
            out[k] = (2.0 * f[k] - 5.0 * f[k - s] + 4.0 * f[k - 2 * s] - f[k - 3 * s]) / (h * h);
        else
            out[k] = (f[k + s] - 2.0 * f[k] + f[k - s]) / (h * h);
    }
    return out;
}

}  // namespace

GridPotential::GridPotential(GridData g, double target_constant) : Potential(g.domain), data_(std::move(g)) {
    const Domain& d = data_.domain;
    d.validate();
    if (d.grid_resolution < 5) throw InvalidArgument("grid potential needs at least 5 nodes per axis");
    if (data_.values.size() != d.node_count()) throw InvalidArgument("grid value count does not match domain");
    target_constant_ = target_constant;
    const int n = d.n;
    const std::size_t M = d.node_count();
    grad_.assign(M * n, 0.0);
    hess_.assign(M * n * n, 0.0);
    third_.assign(M * n * n * n, 0.0);
    std::vector<std::vector<double>> g1(n);
    for (int a = 0; a < n; ++a) {
        g1[a] = diff_axis(d, data_.values, a);
        for (std::size_t k = 0; k < M; ++k) grad_[k * n + a] = g1[a][k];
    }
    std::vector<std::vector<double>> h2(n * n);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            h2[a * n + b] = (a == b) ? second_axis(d, data_.values, a) : diff_axis(d, g1[a], b);
            h2[b * n + a] = h2[a * n + b];
        }
    for (std::size_t k = 0; k < M; ++k)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) hess_[(k * n + a) * n + b] = h2[a * n + b][k];
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const auto t = diff_axis(d, h2[a * n + b], c);
                for (std::size_t k = 0; k < M; ++k) {
                    third_[((k * n + a) * n + b) * n + c] = t[k];
                    third_[((k * n + b) * n + a) * n + c] = t[k];
                }
            }
    // symmetrize the third-derivative field node by node
    for (std::size_t k = 0; k < M; ++k) {
        Tensor3 t(n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) t(a, b, c) = third_[((k * n + a) * n + b) * n + c];
        t.symmetrize();
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) third_[((k * n + a) * n + b) * n + c] = t(a, b, c);
    }
}

bool GridPotential::jet_admissible(const Vec& x) const {
    double margin = 0.0;
    for (int i = 0; i < domain_.n; ++i) margin = std::max(margin, 2.0 * domain_.spacing(i));
    for (int i = 0; i < domain_.n; ++i)
        if (x(i) < domain_.bounds[i].first + 2.0 * domain_.spacing(i) - 1e-12 ||
            x(i) > domain_.bounds[i].second - 2.0 * domain_.spacing(i) + 1e-12)
            return false;
    return true;
}

Mat GridPotential::nodal_hessian(std::size_t node) const {
    const int n = domain_.n;
    Mat H(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) H(a, b) = hess_[(node * n + a) * n + b];
    return H;
}

Derivs GridPotential::eval(const Vec& x, int order) const {
    const Domain& d = domain_;
    const int n = d.n;
    const int N = d.grid_resolution;
    if (!d.contains(x, -1e-12)) throw OutOfDomain("grid potential evaluated outside its box");
    std::array<int, kMaxDim> base{};
    std::array<double, kMaxDim> t{};
    for (int a = 0; a < n; ++a) {
        const double s = (x(a) - d.bounds[a].first) / d.spacing(a);
        int i = static_cast<int>(std::floor(s));
        i = std::clamp(i, 0, N - 2);
        base[a] = i;
        t[a] = s - i;
    }
    Derivs out;
    out.value = 0.0;
    if (order >= 1) out.grad = Vec::Zero(n);
    if (order >= 2) out.hess = Mat::Zero(n, n);
    if (order >= 3) out.third = Tensor3(n);
    for (unsigned corner = 0; corner < (1u << n); ++corner) {
        std::array<int, kMaxDim> idx = base;
        double w = 1.0;
        for (int a = 0; a < n; ++a) {
            const bool up = corner >> a & 1u;
            idx[a] += up ? 1 : 0;
            w *= up ? t[a] : 1.0 - t[a];
        }
        if (w == 0.0) continue;
        const std::size_t k = d.flatten(idx);
        out.value += w * data_.values[k];
        if (order >= 1)
            for (int a = 0; a < n; ++a) out.grad(a) += w * grad_[k * n + a];
        if (order >= 2)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) out.hess(a, b) += w * hess_[(k * n + a) * n + b];
        if (order >= 3)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) out.third(a, b, c) += w * third_[((k * n + a) * n + b) * n + c];
    }
    return out;
}

void save_grid_csv(const GridData& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    const Domain& d = g.domain;
    os << std::setprecision(17);
    os << d.n << ',' << d.grid_resolution;
    for (const auto& [lo, hi] : d.bounds) os << ',' << lo << ',' << hi;
    os << '\n';
    const int N = d.grid_resolution;
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        os << g.values[k];
        os << (((k + 1) % N == 0) ? '\n' : ',');
    }
    if (!os) throw IoError("write failed for " + path);
}

GridData load_grid_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty grid file " + path);
    std::vector<double> head;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) head.push_back(std::stod(tok));
    }
    if (head.size() < 2) throw IoError("malformed grid header in " + path);
    GridData g;
    g.domain.n = static_cast<int>(head[0]);
    g.domain.grid_resolution = static_cast<int>(head[1]);
    if (static_cast<int>(head.size()) != 2 + 2 * g.domain.n) throw IoError("header bounds do not match n");
    for (int a = 0; a < g.domain.n; ++a) g.domain.bounds.emplace_back(head[2 + 2 * a], head[3 + 2 * a]);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) g.values.push_back(std::stod(tok));
    }
    g.domain.validate();
    if (g.values.size() != g.domain.node_count()) throw IoError("grid value count does not match header");
    return g;
}

GridData sample_on_grid(const ScalarField& f, const Domain& d) {
    GridData g{d, std::vector<double>(d.node_count())};
    for (std::size_t k = 0; k < g.values.size(); ++k) g.values[k] = f.value(d.node(k));
    return g;
}

// ---------------------------------------------------------------- jets

JetFrame jet(const Potential& phi, const Vec& x) {
    if (!phi.jet_admissible(x)) throw OutOfDomain("jet requested outside the admissible region");
    const Derivs d = phi.eval(x, 3);
    JetFrame j;
    j.n = phi.dim();
    j.x = x;
    j.value = d.value;
    j.gradient = d.grad;
    j.hessian = 0.5 * (d.hess + d.hess.transpose());
    j.third = d.third;
    Eigen::LLT<Mat> llt(j.hessian);
    if (llt.info() != Eigen::Success || min_eigenvalue(j.hessian) <= 0.0) {
        std::ostringstream os;
        os << "Hessian not positive definite at x = " << x.transpose();
        throw NonConvexAt(os.str());
    }
    j.inverse_hessian = llt.solve(Mat::Identity(j.n, j.n));
    j.inverse_hessian = 0.5 * (j.inverse_hessian + j.inverse_hessian.transpose()).eval();
    j.det_hessian = j.hessian.determinant();
    return j;
}

// ---------------------------------------------------------------- Legendre dual

namespace {

Domain dual_bounding_domain(const Potential& phi) {
    Domain dd = phi.domain();
    const int n = dd.n;
    std::vector<double> lo(n, 1e300), hi(n, -1e300);
    Domain probe = phi.domain();
    probe.grid_resolution = std::min(probe.grid_resolution, 9);
    for (std::size_t k = 0; k < probe.node_count(); ++k) {
        Vec x = probe.node(k);
        if (!phi.jet_admissible(x)) continue;
        const Vec g = phi.gradient(x);
        for (int a = 0; a < n; ++a) {
            lo[a] = std::min(lo[a], g(a));
            hi[a] = std::max(hi[a], g(a));
        }
    }
    for (int a = 0; a < n; ++a) {
        if (!(hi[a] > lo[a])) hi[a] = lo[a] + 1.0;
        dd.bounds[a] = {lo[a], hi[a]};
    }
    return dd;
}

}  // namespace

LegendreDual::LegendreDual(PotentialPtr phi, double tol, int max_iter)
    : Potential(dual_bounding_domain(*phi)), phi_(std::move(phi)), tol_(tol), max_iter_(max_iter) {
    center_ = phi_->gradient(phi_->center());
    target_constant_ = 1.0 / phi_->target_constant();
}

Vec LegendreDual::inverse_gradient(const Vec& p) const {
    Vec x = phi_->center();
    const double scale = 1.0 + p.norm();
    Derivs d = phi_->eval(x, 2);
    Vec r = d.grad - p;
    double rn = r.norm();
    for (int it = 0; it < max_iter_; ++it) {
        if (rn <= tol_ * scale) return x;
        Eigen::LLT<Mat> llt(d.hess);
        if (llt.info() != Eigen::Success) throw NewtonDivergence("Hessian lost definiteness during inversion");
        const Vec step = -llt.solve(r);
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Vec trial = x + t * step;
            if (phi_->jet_admissible(trial)) {
                Derivs dt = phi_->eval(trial, 2);
                const Vec rt = dt.grad - p;
                const double rtn = rt.norm();
                if (rtn <= (1.0 - 1e-4 * t) * rn || rtn <= tol_ * scale) {
                    x = trial;
                    d = std::move(dt);
                    r = rt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (rn <= 1e3 * tol_ * scale) return x;  // stagnated at roundoff level
            throw NewtonDivergence("line search failed while inverting the gradient map");
        }
    }
    if (rn <= 1e3 * tol_ * scale) return x;
    throw NewtonDivergence("gradient-map inversion did not converge");
}

bool LegendreDual::contains(const Vec& p) const {
    try {
        const Vec x = inverse_gradient(p);
        return phi_->jet_admissible(x);
    } catch (const Error&) {
        return false;
    }
}

Derivs LegendreDual::eval(const Vec& p, int order) const {
    const Vec x = inverse_gradient(p);
    const int n = dim();
    const Derivs d = phi_->eval(x, std::max(order, 2) >= 3 ? 3 : 2);
    Derivs out;
    out.value = p.dot(x) - d.value;
    if (order >= 1) out.grad = x;
    Mat Hi;
    if (order >= 2) {
        Eigen::LLT<Mat> llt(d.hess);
        if (llt.info() != Eigen::Success) throw NonConvexAt("primal Hessian not positive definite");
        Hi = llt.solve(Mat::Identity(n, n));
        out.hess = 0.5 * (Hi + Hi.transpose());
    }
    if (order >= 3) {
        // psi_abc = -phi^{ai} phi^{bj} phi^{ck} phi_ijk
        out.third = Tensor3(n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            for (int k = 0; k < n; ++k) s += Hi(a, i) * Hi(b, j) * Hi(c, k) * d.third(i, j, k);
                    out.third(a, b, c) = -s;
                }
    }
    return out;
}

std::shared_ptr<LegendreDual> legendre_dual(PotentialPtr phi) { return std::make_shared<LegendreDual>(std::move(phi)); }

// ---------------------------------------------------------------- structures

double ma_residual(const JetFrame& j, double C) { return j.det_hessian - C; }

StructureTensors structures(const JetFrame& j, double covolume) {
    const int n = j.n;
    StructureTensors s;
    s.n = n;
    const Mat I = Mat::Identity(n, n);
    s.J = Mat::Zero(2 * n, 2 * n);
    s.J.block(n, 0, n, n) = I;
    s.J.block(0, n, n, n) = -I;
    s.g_M = Mat::Zero(2 * n, 2 * n);
    s.g_M.block(0, 0, n, n) = j.hessian;
    s.g_M.block(n, n, n, n) = j.hessian;
    s.omega_M = s.J.transpose() * s.g_M;
    s.g_W = Mat::Zero(2 * n, 2 * n);
    s.g_W.block(0, 0, n, n) = j.hessian;
    s.g_W.block(n, n, n, n) = j.inverse_hessian;
    s.omega_W = Mat::Zero(2 * n, 2 * n);
    s.omega_W.block(0, n, n, n) = I;
    s.omega_W.block(n, 0, n, n) = -I;
    s.fiber_volume = std::sqrt(j.det_hessian) * covolume;
    s.dual_fiber_volume = covolume / std::sqrt(j.det_hessian);
    return s;
}

double shrink_volume_check(const Potential& phi, double t, const Vec& x) {
    if (!(t > 0.0)) throw InvalidArgument("shrink parameter must be positive");
    const Mat H = phi.hessian(x);
    const int n = static_cast<int>(H.rows());
    Mat gt = Mat::Zero(2 * n, 2 * n), g1 = Mat::Zero(2 * n, 2 * n);
    gt.block(0, 0, n, n) = H / t;
    gt.block(n, n, n, n) = t * H;
    g1.block(0, 0, n, n) = H;
    g1.block(n, n, n, n) = H;
    return gt.determinant() - g1.determinant();
}

CMat ComplexifiedPotential::theta(const Vec& x) const {
    const Mat H = phi->hessian(x);
    const Mat E = eta ? eta->hessian(x) : Mat::Zero(H.rows(), H.cols());
    CMat th(H.rows(), H.cols());
    for (int i = 0; i < H.rows(); ++i)
        for (int k = 0; k < H.cols(); ++k) th(i, k) = cplx(H(i, k), E(i, k));
    return th;
}

cplx complexified_residual(const ComplexifiedPotential& cp, const Vec& x) {
    const CMat th = cp.theta(x);
    const Mat re = th.real();
    if (min_eigenvalue(0.5 * (re + re.transpose())) <= 0.0) throw NonConvexAt("Re theta not positive definite");
    return th.determinant() - cp.C;
}

std::vector<Vec> interior_nodes(const Domain& d, int collar, int stride) {
    std::vector<Vec> pts;
    for (std::size_t k = 0; k < d.node_count(); ++k) {
        if (d.on_boundary(k, collar)) continue;
        const auto idx = d.unflatten(k);
        bool keep = true;
        for (int a = 0; a < d.n; ++a)
            if ((idx[a] - collar) % stride != 0) keep = false;
        if (keep) pts.push_back(d.node(k));
    }
    return pts;
}

std::vector<Vec> random_points(const Domain& d, std::mt19937_64& rng, int count, double margin) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> pts;
    for (int c = 0; c < count; ++c) {
        Vec x(d.n);
        for (int a = 0; a < d.n; ++a) {
            const double lo = d.bounds[a].first + margin * d.length(a);
            const double hi = d.bounds[a].second - margin * d.length(a);
            x(a) = lo + (hi - lo) * u(rng);
        }
        pts.push_back(x);
    }
    return pts;
}

}  // namespace msym
