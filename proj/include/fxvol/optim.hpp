#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fxvol::optim {

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<void(std::span<const double>, std::span<double>)>;

struct Options {
    int max_iterations = 600;
    double grad_tol = 1e-7;     // scaled by max(1, |f|)
    double step_tol = 1e-12;
};

struct Result {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string status;
};

// Maximizes f with BFGS + Armijo backtracking. Infeasible points may return
// a large negative value; the line search backs off them.
Result bfgs_maximize(const Objective& f, const Gradient& grad,
                     std::vector<double> x0, const Options& opts = {});

// Solves A x = b in place by Gauss elimination with partial pivoting.
// Returns false when A is numerically singular.
bool solve_linear(std::vector<double> a, std::vector<double> b, int n,
                  std::vector<double>& x);

}  // namespace fxvol::optim
