#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <json.hpp>

#include "msym/geometry.hpp"

namespace msym {

struct SolverOptions {
    int max_iterations = 60;
    double tolerance = 1e-9;    // sup-norm of det D^2 u - C at interior nodes
    double backtrack = 0.5;     // step reduction factor
    double armijo = 1e-4;
    int max_halvings = 40;
    bool parallel = true;       // OpenMP kernels; false runs the serial reference loops
    int linear_max_iterations = 4000;
    double linear_tolerance = 1e-12;  // relative, for the Krylov solve of each Newton step
    // Optional starting values on the full grid (row-major). Empty selects the
    // default convex guess built from the boundary data.
    std::vector<double> initial;

    void validate() const;
};

struct SolveResult {
    std::shared_ptr<GridPotential> potential;
    std::vector<double> residual_history;  // sup |log det D^2 u - log C| per iterate
    std::vector<double> det_history;       // sup |det D^2 u - C| per iterate
    std::vector<double> step_lengths;      // accepted damping factor per Newton step
    std::vector<double> min_eigenvalue;    // per node; boundary nodes use one-sided differences
    bool converged = false;
    int iterations = 0;
    int direct_fallbacks = 0;  // Newton steps solved by sparse LU after the Krylov solve stalled

    nlohmann::json history_json() const;
};

using BoundaryData = std::function<double(const Vec&)>;

// Damped Newton for det D^2_h u = C with u = g on the boundary of the grid.
SolveResult solve_real_ma(const Domain& d, double C, const BoundaryData& g, const SolverOptions& opts = {});

// The default starting guess: least-squares quadratic fit of the boundary data
// minus a multiple of a concave product bump, scaled so det Hess = C at the center.
std::vector<double> initial_guess(const Domain& d, double C, const BoundaryData& g);

struct ComplexSolveResult {
    std::shared_ptr<GridPotential> phi;
    std::shared_ptr<GridPotential> eta;
    ComplexifiedPotential potential;
    std::vector<int> step_iterations;      // Newton iterations per homotopy step
    std::vector<double> residual_history;  // sup |det theta - C_s| per Newton iterate
    double final_residual = 0.0;           // sup |det theta - C| at interior nodes
    bool converged = false;
};

// Homotopy in arg C from the real solution with |C|; phi takes the boundary
// data g and eta vanishes on the boundary. Real positive C delegates to
// solve_real_ma and returns eta = 0.
ComplexSolveResult solve_complexified_ma(const Domain& d, cplx C, const BoundaryData& g, int homotopy_steps = 5,
                                         const SolverOptions& opts = {});

// Smallest eigenvalue of the nodal discrete Hessian at every grid node.
std::vector<double> convexity_spectrum(const GridPotential& phi);

// Sup over interior nodes of |det D^2_h u - C| for a grid potential.
double grid_ma_residual(const GridPotential& phi, double C);

}  // namespace msym
