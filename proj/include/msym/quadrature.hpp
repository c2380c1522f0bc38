#pragma once

#include <vector>

#include "msym/geometry.hpp"
#include "msym/parallel.hpp"

namespace msym {

// Tensor-product rule on a box: nodes and weights with sum of weights = volume.
struct Quadrature {
    std::vector<Vec> points;
    std::vector<double> weights;

    // Trapezoid rule on the domain grid, optionally shrunk by `inset_cells`
    // grid cells per side (grid-backed potentials need the collar).
    static Quadrature trapezoid(const Domain& d, int inset_cells = 0);
    // Gauss-Legendre with `per_axis` nodes per axis.
    static Quadrature gauss(const Domain& d, int per_axis);

    std::size_t size() const { return points.size(); }
    double volume() const;

    template <class T, class F>
    T integrate(F&& f, bool par = true) const {
        const auto vals = parallel_map(points.size(), [&](std::size_t i) { return f(points[i]); }, par);
        T s = T();
        if constexpr (requires { T::Zero(); }) s = T::Zero();
        for (std::size_t i = 0; i < vals.size(); ++i) s += weights[i] * vals[i];
        return s;
    }
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace msym
