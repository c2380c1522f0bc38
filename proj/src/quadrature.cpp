#include "msym/quadrature.hpp"

#include <cmath>

#include "msym/errors.hpp"

namespace msym {

namespace {

Quadrature tensor(const Domain& d, const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& w) {
    Quadrature q;
    std::size_t total = 1;
    for (int a = 0; a < d.n; ++a) total *= x[a].size();
    q.points.reserve(total);
    q.weights.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t r = k;
        Vec p(d.n);
        double wt = 1.0;
        for (int a = d.n - 1; a >= 0; --a) {
            const std::size_t i = r % x[a].size();
            r /= x[a].size();
            p(a) = x[a][i];
            wt *= w[a][i];
        }
        q.points.push_back(p);
        q.weights.push_back(wt);
    }
    return q;
}

}  // namespace

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(m);
    weights.resize(m);
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= m; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        nodes[i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

Quadrature Quadrature::trapezoid(const Domain& d, int inset_cells) {
    const int N = d.grid_resolution - 2 * inset_cells;
    if (N < 2) throw InvalidArgument("quadrature inset leaves no cells");
    std::vector<std::vector<double>> x(d.n), w(d.n);
    for (int a = 0; a < d.n; ++a) {
        const double h = d.spacing(a);
        const double lo = d.bounds[a].first + inset_cells * h;
        for (int i = 0; i < N; ++i) {
            x[a].push_back(lo + i * h);
            w[a].push_back((i == 0 || i == N - 1) ? 0.5 * h : h);
        }
    }
    return tensor(d, x, w);
}

Quadrature Quadrature::gauss(const Domain& d, int per_axis) {
    std::vector<double> z, wz;
    gauss_legendre(per_axis, z, wz);
    std::vector<std::vector<double>> x(d.n), w(d.n);
    for (int a = 0; a < d.n; ++a) {
        const double c = 0.5 * (d.bounds[a].first + d.bounds[a].second), r = 0.5 * d.length(a);
        for (int i = 0; i < per_axis; ++i) {
            x[a].push_back(c + r * z[i]);
            w[a].push_back(r * wz[i]);
        }
    }
    return tensor(d, x, w);
}

double Quadrature::volume() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

}  // namespace msym
