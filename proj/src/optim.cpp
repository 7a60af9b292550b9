#include "fxvol/optim.hpp"

#include <cmath>
#include <cstddef>

namespace fxvol::optim {

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

Result bfgs_maximize(const Objective& f, const Gradient& grad,
                     std::vector<double> x0, const Options& opts) {
    const int n = static_cast<int>(x0.size());
    Result res;
    res.x = x0;
    res.f = f(x0);
    if (!std::isfinite(res.f)) {
        res.status = "infeasible starting point";
        return res;
    }

    // inverse-Hessian approximation, identity start
    std::vector<double> H(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) H[static_cast<std::size_t>(i) * n + i] = 1.0;

    std::vector<double> g(n), g_new(n), p(n), x_new(n), s(n), y(n), Hy(n);
    grad(res.x, g);

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter;
        res.grad_norm = inf_norm(g);
        if (res.grad_norm < opts.grad_tol * std::max(1.0, std::fabs(res.f))) {
            res.converged = true;
            res.status = "gradient tolerance reached";
            return res;
        }

        // ascent direction p = H g
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += H[static_cast<std::size_t>(i) * n + j] * g[j];
            p[i] = acc;
        }
        double dir = 0.0;
        for (int i = 0; i < n; ++i) dir += p[i] * g[i];
        if (!(dir > 0.0)) {
            // reset to steepest ascent when curvature information went bad
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) H[static_cast<std::size_t>(i) * n + j] = (i == j);
                p[i] = g[i];
            }
            dir = 0.0;
            for (int i = 0; i < n; ++i) dir += g[i] * g[i];
            if (dir == 0.0) {
                res.converged = true;
                res.status = "zero gradient";
                return res;
            }
        }

        // Armijo backtracking; cap the trial displacement so gradient
        // blowups near guard boundaries stay recoverable
        const double pnorm = inf_norm(p);
        double step = (pnorm > 2.0) ? 2.0 / pnorm : 1.0;
        double f_new = -1e300;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < n; ++i) x_new[i] = res.x[i] + step * p[i];
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new >= res.f + 1e-4 * step * dir) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.status = "line search failed";
            return res;
        }
        const double step_size = step * inf_norm(p);

        grad(x_new, g_new);
        for (int i = 0; i < n; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = g_new[i] - g[i];  // gradient change (ascent convention)
        }
        res.x = x_new;
        res.f = f_new;
        g = g_new;

        if (step_size < opts.step_tol * std::max(1.0, inf_norm(res.x))) {
            res.grad_norm = inf_norm(g);
            res.converged = res.grad_norm < 1e-3 * std::max(1.0, std::fabs(res.f));
            res.status = "step size underflow";
            return res;
        }

        // BFGS update on the inverse Hessian of the NEGATED objective:
        // with s = x+ - x and y = -(g+ - g), standard formulas apply.
        for (int i = 0; i < n; ++i) y[i] = -y[i];
        double sy = 0.0;
        for (int i = 0; i < n; ++i) sy += s[i] * y[i];
        if (sy > 1e-12) {
            double yHy = 0.0;
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += H[static_cast<std::size_t>(i) * n + j] * y[j];
                Hy[i] = acc;
            }
            for (int i = 0; i < n; ++i) yHy += y[i] * Hy[i];
            const double c1 = (sy + yHy) / (sy * sy);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    H[static_cast<std::size_t>(i) * n + j] +=
                        c1 * s[i] * s[j] - (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
                }
            }
        }
    }
    res.iterations = opts.max_iterations;
    res.grad_norm = inf_norm(g);
    res.status = "maximum iterations reached";
    return res;
}

bool solve_linear(std::vector<double> a, std::vector<double> b, int n,
                  std::vector<double>& x) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(a[static_cast<std::size_t>(r) * n + col]) >
                std::fabs(a[static_cast<std::size_t>(pivot) * n + col])) {
                pivot = r;
            }
        }
        if (std::fabs(a[static_cast<std::size_t>(pivot) * n + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a[static_cast<std::size_t>(pivot) * n + c],
                          a[static_cast<std::size_t>(col) * n + c]);
            }
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double factor = a[static_cast<std::size_t>(r) * n + col] * inv;
            if (factor == 0.0) continue;
            for (int c = col; c < n; ++c) {
                a[static_cast<std::size_t>(r) * n + c] -=
                    factor * a[static_cast<std::size_t>(col) * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[static_cast<std::size_t>(r) * n + c] * x[c];
        x[r] = acc / a[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

}  // namespace fxvol::optim
