#include "fxvol/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fxvol/optim.hpp"

namespace fxvol::model {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
const double kBad = -std::numeric_limits<double>::infinity();
constexpr double kPersistenceWall = 0.9999;
constexpr double kPenaltyWeight = 1e8;

double relu(double v) { return v > 0.0 ? v : 0.0; }

double sample_variance(std::span<const double> r) {
    if (r.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double acc = 0.0;
    for (double v : r) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(r.size() - 1);
}

}  // namespace

Family family_from_string(const std::string& s) {
    if (s == "garch") return Family::garch;
    if (s == "realized_garch" || s == "rgarch") return Family::realized_garch;
    if (s == "realized_jgarch" || s == "rjgarch") return Family::realized_jgarch;
    if (s == "realized_jgarch_scale" || s == "rjgarch_scale") {
        return Family::realized_jgarch_scale;
    }
    throw ConfigError("unknown model family '" + s + "'");
}

std::string family_to_string(Family f) {
    switch (f) {
        case Family::garch: return "garch";
        case Family::realized_garch: return "realized_garch";
        case Family::realized_jgarch: return "realized_jgarch";
        case Family::realized_jgarch_scale: return "realized_jgarch_scale";
    }
    return "?";
}

int ModelSpec::n_params() const {
    switch (family) {
        case Family::garch: return 3;
        case Family::realized_garch: return 8;
        default: return 9;
    }
}

std::string ModelSpec::name() const {
    std::string n = family_to_string(family);
    if (has_measurement()) n += "(" + measure + ")";
    return n;
}

std::vector<double> ParamVector::pack(Family f) const {
    switch (f) {
        case Family::garch: return {omega, alpha, beta};
        case Family::realized_garch:
            return {omega, beta, gamma, xi_m, psi, tau1, tau2, sigma_u};
        default:
            return {omega, beta, gamma, gamma_j, xi_m, psi, tau1, tau2, sigma_u};
    }
}

ParamVector ParamVector::unpack(Family f, std::span<const double> v) {
    ParamVector p;
    switch (f) {
        case Family::garch:
            p.omega = v[0];
            p.alpha = v[1];
            p.beta = v[2];
            break;
        case Family::realized_garch:
            p.omega = v[0];
            p.beta = v[1];
            p.gamma = v[2];
            p.xi_m = v[3];
            p.psi = v[4];
            p.tau1 = v[5];
            p.tau2 = v[6];
            p.sigma_u = v[7];
            break;
        default:
            p.omega = v[0];
            p.beta = v[1];
            p.gamma = v[2];
            p.gamma_j = v[3];
            p.xi_m = v[4];
            p.psi = v[5];
            p.tau1 = v[6];
            p.tau2 = v[7];
            p.sigma_u = v[8];
            break;
    }
    return p;
}

std::vector<std::string> ParamVector::param_names(Family f) {
    switch (f) {
        case Family::garch: return {"omega", "alpha", "beta"};
        case Family::realized_garch:
            return {"omega", "beta", "gamma", "xi_m", "psi", "tau1", "tau2", "sigma_u"};
        default:
            return {"omega", "beta", "gamma", "gamma_j",
                    "xi_m",  "psi",  "tau1",  "tau2",   "sigma_u"};
    }
}

namespace {

struct Prepared {
    ModelSpec spec;
    std::vector<double> r;
    std::vector<double> lx;  // log of floored measure
    std::vector<double> lj;  // log(1 + jv)
    double log_h1 = 0.0;
    double h1 = 1.0;
    std::size_t floored_x = 0;
};

Prepared prepare(const ModelSpec& spec, const SeriesData& data, double x_floor,
                 double h1_override) {
    Prepared p;
    p.spec = spec;
    p.r.assign(data.r.begin(), data.r.end());
    const std::size_t T = p.r.size();
    if (spec.has_measurement()) {
        if (data.x.size() != T) {
            throw DataError("model data: measure series length mismatch");
        }
        p.lx.resize(T);
        for (std::size_t t = 0; t < T; ++t) {
            double x = data.x[t];
            if (!(x > x_floor)) {
                x = x_floor;
                ++p.floored_x;
            }
            p.lx[t] = std::log(x);
        }
    }
    if (spec.include_jumps()) {
        p.lj.assign(T, 0.0);
        if (!data.jv.empty()) {
            if (data.jv.size() != T) {
                throw DataError("model data: jump series length mismatch");
            }
            for (std::size_t t = 0; t < T; ++t) {
                if (data.jv[t] < 0.0) throw DataError("model data: negative jump variation");
                p.lj[t] = std::log1p(data.jv[t]);
            }
        }
    }
    if (h1_override > 0.0) {
        p.h1 = h1_override;
    } else {
        const auto [rmin, rmax] = std::minmax_element(p.r.begin(), p.r.end());
        if (p.r.empty() || *rmin == *rmax) {
            throw DataError("singular fit: constant return series");
        }
        p.h1 = sample_variance(p.r);
        if (!(p.h1 > 0.0)) {
            throw DataError("singular fit: return series has no variance");
        }
    }
    p.log_h1 = std::log(p.h1);
    return p;
}

struct EvalOut {
    bool ok = false;
    int bad_t = -1;
    double joint = kBad;
    double partial = kBad;
};

// Joint quasi-likelihood of the log-linear recursion:
//   log h_t = omega + beta log h_{t-1} + gamma log x_{t-1} [+ gamma_j log(1+jv_{t-1})]
//   u_t     = log x_t - xi - psi log h_t - tau1 z_t - tau2 z_t^2
// The gradient uses dlogh_t = e_t + beta dlogh_{t-1} for the recursion
// parameters and accumulates direct terms for the measurement block.
EvalOut eval_realized(const Prepared& p, std::span<const double> th, double* grad,
                      double* scores, std::vector<double>* h_out,
                      std::vector<double>* z_out, std::vector<double>* u_out) {
    const bool jumps = p.spec.include_jumps();
    const int P = jumps ? 9 : 8;
    const int i_xi = jumps ? 4 : 3;
    const double omega = th[0], beta = th[1], gamma = th[2];
    const double gamma_j = jumps ? th[3] : 0.0;
    const double xi = th[i_xi], psi = th[i_xi + 1];
    const double tau1 = th[i_xi + 2], tau2 = th[i_xi + 3];
    const double sigma_u = th[i_xi + 4];

    EvalOut out;
    const std::size_t T = p.r.size();
    if (grad) std::fill(grad, grad + P, 0.0);
    if (scores) std::fill(scores, scores + T * P, 0.0);
    if (!(sigma_u > 1e-8) || !std::isfinite(sigma_u)) return out;
    const double inv_su2 = 1.0 / (sigma_u * sigma_u);

    const int n_rec = jumps ? 4 : 3;
    double dL[4] = {0, 0, 0, 0};  // d log h_t / d(omega, beta, gamma[, gamma_j])

    double L = p.log_h1;
    double lr_acc = 0.0, lx_acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            const double e0 = 1.0;
            const double e1 = L;  // log h_{t-1} before update
            const double e2 = p.lx[t - 1];
            const double e3 = jumps ? p.lj[t - 1] : 0.0;
            const double L_new =
                omega + beta * L + gamma * e2 + (jumps ? gamma_j * e3 : 0.0);
            if (grad || scores) {
                dL[0] = e0 + beta * dL[0];
                dL[1] = e1 + beta * dL[1];
                dL[2] = e2 + beta * dL[2];
                if (jumps) dL[3] = e3 + beta * dL[3];
            }
            L = L_new;
        }
        if (!std::isfinite(L) || std::fabs(L) > 60.0) {
            out.bad_t = static_cast<int>(t);
            return out;
        }
        const double z = p.r[t] * std::exp(-0.5 * L);
        const double z2 = z * z;
        const double u = p.lx[t] - xi - psi * L - tau1 * z - tau2 * z2;

        lr_acc += kLog2Pi + L + z2;
        lx_acc += kLog2Pi + 2.0 * std::log(sigma_u) + u * u * inv_su2;

        if (h_out) {
            (*h_out)[t] = std::exp(L);
            (*z_out)[t] = z;
            (*u_out)[t] = u;
        }

        if (grad || scores) {
            const double us = u * inv_su2;
            const double w =
                -0.5 * (1.0 - z2) + us * (psi - 0.5 * z * (tau1 + 2.0 * tau2 * z));
            double row[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
            for (int k = 0; k < n_rec; ++k) row[k] = w * dL[k];
            row[i_xi] = us;
            row[i_xi + 1] = us * L;
            row[i_xi + 2] = us * z;
            row[i_xi + 3] = us * z2;
            row[i_xi + 4] = (u * u * inv_su2 - 1.0) / sigma_u;
            if (grad) {
                for (int k = 0; k < P; ++k) grad[k] += row[k];
            }
            if (scores) {
                for (int k = 0; k < P; ++k) scores[t * P + k] = row[k];
            }
        }
    }
    out.partial = -0.5 * lr_acc;
    out.joint = out.partial - 0.5 * lx_acc;
    out.ok = std::isfinite(out.joint);
    return out;
}

EvalOut eval_garch(const Prepared& p, std::span<const double> th, double* grad,
                   double* scores, std::vector<double>* h_out,
                   std::vector<double>* z_out) {
    const double omega = th[0], alpha = th[1], beta = th[2];
    EvalOut out;
    const std::size_t T = p.r.size();
    double dh[3] = {0, 0, 0};
    if (grad) std::fill(grad, grad + 3, 0.0);
    if (scores) std::fill(scores, scores + T * 3, 0.0);

    double h = p.h1;
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            const double r2 = p.r[t - 1] * p.r[t - 1];
            const double h_prev = h;
            if (grad || scores) {
                dh[0] = 1.0 + beta * dh[0];
                dh[1] = r2 + beta * dh[1];
                dh[2] = h_prev + beta * dh[2];
            }
            h = omega + alpha * r2 + beta * h_prev;
        }
        if (!(h > 1e-300) || !std::isfinite(h)) {
            out.bad_t = static_cast<int>(t);
            return out;
        }
        const double z2 = p.r[t] * p.r[t] / h;
        acc += kLog2Pi + std::log(h) + z2;
        if (h_out) {
            (*h_out)[t] = h;
            (*z_out)[t] = p.r[t] / std::sqrt(h);
        }
        if (grad || scores) {
            const double w = 0.5 * (z2 - 1.0) / h;
            for (int k = 0; k < 3; ++k) {
                const double v = w * dh[k];
                if (grad) grad[k] += v;
                if (scores) scores[t * 3 + k] = v;
            }
        }
    }
    out.partial = -0.5 * acc;
    out.joint = out.partial;
    out.ok = std::isfinite(out.joint);
    return out;
}

EvalOut eval_model(const Prepared& p, std::span<const double> th, double* grad,
                   double* scores, std::vector<double>* h_out = nullptr,
                   std::vector<double>* z_out = nullptr,
                   std::vector<double>* u_out = nullptr) {
    if (p.spec.family == Family::garch) {
        return eval_garch(p, th, grad, scores, h_out, z_out);
    }
    return eval_realized(p, th, grad, scores, h_out, z_out, u_out);
}

// Stationarity of the filtered recursion is kept by penalty rather than a
// hard reparameterization; psi enters the constraint bilinearly.
double penalty(const Prepared& p, std::span<const double> th, double* grad) {
    double pen = 0.0;
    if (p.spec.family == Family::garch) {
        const double over = relu(th[1] + th[2] - kPersistenceWall);
        const double no = relu(-th[0]), na = relu(-th[1]), nb = relu(-th[2]);
        pen = kPenaltyWeight * (over * over + no * no + na * na + nb * nb);
        if (grad) {
            grad[0] -= kPenaltyWeight * 2.0 * no * (-1.0);
            grad[1] -= kPenaltyWeight * 2.0 * (over - na);
            grad[2] -= kPenaltyWeight * 2.0 * (over - nb);
        }
        return pen;
    }
    const bool jumps = p.spec.include_jumps();
    const double beta = th[1], gamma = th[2];
    const double psi = th[jumps ? 5 : 4];
    const double v = beta + gamma * psi;
    const double over = relu(std::fabs(v) - kPersistenceWall);
    pen = kPenaltyWeight * over * over;
    if (grad && over > 0.0) {
        const double s = (v >= 0.0 ? 1.0 : -1.0) * kPenaltyWeight * 2.0 * over;
        grad[1] -= s;
        grad[2] -= s * psi;
        grad[jumps ? 5 : 4] -= s * gamma;
    }
    // keep beta itself inside the unit circle; explosive beta compensated by
    // negative gamma*psi is a ridge artifact on short samples
    const double ob = relu(std::fabs(beta) - kPersistenceWall);
    pen += kPenaltyWeight * ob * ob;
    if (grad && ob > 0.0) {
        grad[1] -= (beta >= 0.0 ? 1.0 : -1.0) * kPenaltyWeight * 2.0 * ob;
    }
    return pen;
}

struct Ols2 {
    double a = 0.0, b = 0.0, resid_std = 0.0;
};

Ols2 ols2(std::span<const double> y, std::span<const double> x) {
    const std::size_t n = y.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Ols2 o;
    o.b = sxx > 1e-14 ? sxy / sxx : 0.0;
    o.a = my - o.b * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - o.a - o.b * x[i];
        rss += e * e;
    }
    o.resid_std = std::sqrt(rss / static_cast<double>(n > 2 ? n - 2 : 1));
    return o;
}

ParamVector init_garch(const Prepared& p) {
    ParamVector th;
    th.alpha = 0.05;
    th.beta = 0.90;
    th.omega = std::max(1e-10, p.h1 * (1.0 - th.alpha - th.beta));
    return th;
}

std::vector<double> fit_garch_h(const Prepared& p) {
    // quick internal pre-fit used to seed the measurement equation
    Prepared pg = p;
    pg.spec.family = Family::garch;
    auto obj = [&](std::span<const double> th) {
        const auto e = eval_garch(pg, th, nullptr, nullptr, nullptr, nullptr);
        return e.ok ? e.joint - penalty(pg, th, nullptr) : kBad;
    };
    auto grd = [&](std::span<const double> th, std::span<double> g) {
        eval_garch(pg, th, g.data(), nullptr, nullptr, nullptr);
        penalty(pg, th, g.data());
    };
    optim::Options o;
    o.max_iterations = 200;
    auto res = optim::bfgs_maximize(obj, grd, init_garch(pg).pack(Family::garch), o);
    std::vector<double> h(p.r.size()), z(p.r.size());
    eval_garch(pg, res.x, nullptr, nullptr, &h, &z);
    return h;
}

ParamVector init_realized(const Prepared& p) {
    const std::size_t T = p.r.size();
    const auto hg = fit_garch_h(p);
    std::vector<double> log_hg(T);
    for (std::size_t t = 0; t < T; ++t) log_hg[t] = std::log(std::max(hg[t], 1e-300));

    // measurement block from regressing log x on the pre-fit variance path
    const Ols2 meas = ols2(p.lx, log_hg);
    ParamVector th;
    th.psi = std::clamp(meas.b, 0.3, 3.0);
    th.xi_m = std::clamp(meas.a, -20.0, 20.0);
    th.sigma_u = std::clamp(meas.resid_std, 0.05, 2.0);

    // variance block from the AR(1) projection of log x
    std::vector<double> y(p.lx.begin() + 1, p.lx.end());
    std::vector<double> x(p.lx.begin(), p.lx.end() - 1);
    const Ols2 ar = ols2(y, x);
    const double b = std::clamp(ar.b, 0.05, 0.97);
    th.beta = 0.6 * b;
    th.gamma = std::clamp(0.4 * b / th.psi, 1e-3, 2.0);
    th.omega = (ar.a - th.xi_m * (1.0 - th.beta)) / th.psi;
    if (!std::isfinite(th.omega)) th.omega = 0.0;
    th.omega = std::clamp(th.omega, -10.0, 10.0);
    th.tau1 = 0.0;
    th.tau2 = 0.0;
    th.gamma_j = 0.0;
    return th;
}

// Moment-based fallback that keeps the filtered recursion near log h1; used
// as an extra start so a degenerate regression init cannot strand the fit.
ParamVector canonical_start(const Prepared& p) {
    ParamVector th;
    th.beta = 0.6;
    th.gamma = 0.3;
    th.psi = 1.0;
    double mean_lx = 0.0;
    for (double v : p.lx) mean_lx += v;
    mean_lx /= static_cast<double>(p.lx.size());
    th.xi_m = std::clamp(mean_lx - p.log_h1, -20.0, 20.0);
    th.omega =
        std::clamp((1.0 - th.beta) * p.log_h1 - th.gamma * mean_lx, -10.0, 10.0);
    double var_lx = 0.0;
    for (double v : p.lx) var_lx += (v - mean_lx) * (v - mean_lx);
    var_lx /= static_cast<double>(p.lx.size());
    th.sigma_u = std::clamp(std::sqrt(var_lx), 0.1, 2.0);
    return th;
}

}  // namespace

FilteredStates filter_states(const ParamVector& theta, const ModelSpec& spec,
                             const SeriesData& data, double h1, double x_floor) {
    const Prepared p = prepare(spec, data, x_floor, h1);
    const auto th = theta.pack(spec.family);
    FilteredStates st;
    st.h.resize(p.r.size());
    st.z.resize(p.r.size());
    if (spec.has_measurement()) st.u.resize(p.r.size());
    const auto e = eval_model(p, th, nullptr, nullptr, &st.h, &st.z,
                              spec.has_measurement() ? &st.u : nullptr);
    if (!e.ok) {
        throw NumericError("filter_states: recursion left the finite range at t=" +
                           std::to_string(e.bad_t));
    }
    return st;
}

LogLik loglik(const ParamVector& theta, const ModelSpec& spec,
              const SeriesData& data, double h1, double x_floor) {
    const Prepared p = prepare(spec, data, x_floor, h1);
    const auto th = theta.pack(spec.family);
    const auto e = eval_model(p, th, nullptr, nullptr);
    if (!e.ok) {
        throw NumericError("loglik: recursion left the finite range at t=" +
                           std::to_string(e.bad_t));
    }
    return LogLik{e.joint, e.partial};
}

std::vector<double> loglik_gradient(const ParamVector& theta, const ModelSpec& spec,
                                    const SeriesData& data, double h1,
                                    double x_floor) {
    const Prepared p = prepare(spec, data, x_floor, h1);
    const auto th = theta.pack(spec.family);
    std::vector<double> g(spec.n_params(), 0.0);
    const auto e = eval_model(p, th, g.data(), nullptr);
    if (!e.ok) {
        throw NumericError("loglik_gradient: recursion left the finite range at t=" +
                           std::to_string(e.bad_t));
    }
    return g;
}

namespace {

// central-difference Hessian of the pure log-likelihood, using the analytic
// gradient; also reused as curvature for the Newton polish
std::vector<double> fd_hessian(const Prepared& p, std::span<const double> th) {
    const int P = static_cast<int>(th.size());
    std::vector<double> H(static_cast<std::size_t>(P) * P, 0.0);
    std::vector<double> x(th.begin(), th.end());
    std::vector<double> gp(P), gm(P);
    for (int i = 0; i < P; ++i) {
        const double step = 1e-5 * std::max(1.0, std::fabs(th[i]));
        x[i] = th[i] + step;
        eval_model(p, x, gp.data(), nullptr);
        x[i] = th[i] - step;
        eval_model(p, x, gm.data(), nullptr);
        x[i] = th[i];
        for (int j = 0; j < P; ++j) {
            H[static_cast<std::size_t>(i) * P + j] = (gp[j] - gm[j]) / (2.0 * step);
        }
    }
    // symmetrize
    for (int i = 0; i < P; ++i) {
        for (int j = i + 1; j < P; ++j) {
            const double v = 0.5 * (H[static_cast<std::size_t>(i) * P + j] +
                                    H[static_cast<std::size_t>(j) * P + i]);
            H[static_cast<std::size_t>(i) * P + j] = v;
            H[static_cast<std::size_t>(j) * P + i] = v;
        }
    }
    return H;
}

std::vector<double> sandwich_se(const Prepared& p, std::span<const double> th) {
    const int P = static_cast<int>(th.size());
    const std::size_t T = p.r.size();
    std::vector<double> scores(T * P);
    eval_model(p, th, nullptr, scores.data());

    std::vector<double> B(static_cast<std::size_t>(P) * P, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (int i = 0; i < P; ++i) {
            for (int j = 0; j < P; ++j) {
                B[static_cast<std::size_t>(i) * P + j] +=
                    scores[t * P + i] * scores[t * P + j];
            }
        }
    }
    std::vector<double> A = fd_hessian(p, th);
    for (double& v : A) v = -v;  // observed information

    // Ainv via P solves
    std::vector<double> Ainv(static_cast<std::size_t>(P) * P, 0.0);
    for (int c = 0; c < P; ++c) {
        std::vector<double> e(P, 0.0), col;
        e[c] = 1.0;
        if (!optim::solve_linear(A, e, P, col)) {
            return std::vector<double>(P, std::numeric_limits<double>::quiet_NaN());
        }
        for (int r = 0; r < P; ++r) Ainv[static_cast<std::size_t>(r) * P + c] = col[r];
    }
    // cov = Ainv * B * Ainv
    std::vector<double> tmp(static_cast<std::size_t>(P) * P, 0.0);
    for (int i = 0; i < P; ++i) {
        for (int j = 0; j < P; ++j) {
            double acc = 0.0;
            for (int k = 0; k < P; ++k) {
                acc += Ainv[static_cast<std::size_t>(i) * P + k] *
                       B[static_cast<std::size_t>(k) * P + j];
            }
            tmp[static_cast<std::size_t>(i) * P + j] = acc;
        }
    }
    std::vector<double> se(P);
    for (int i = 0; i < P; ++i) {
        double acc = 0.0;
        for (int k = 0; k < P; ++k) {
            acc += tmp[static_cast<std::size_t>(i) * P + k] *
                   Ainv[static_cast<std::size_t>(k) * P + i];
        }
        se[i] = acc > 0.0 ? std::sqrt(acc) : std::numeric_limits<double>::quiet_NaN();
    }
    return se;
}

}  // namespace

FitResult fit(const ModelSpec& spec, const SeriesData& data, const FitOptions& opts) {
    if (data.size() < opts.min_observations) {
        throw DataError("fit: " + std::to_string(data.size()) +
                        " observations < required minimum " +
                        std::to_string(opts.min_observations));
    }
    const Prepared p = prepare(spec, data, opts.x_floor, opts.h1_override);

    auto obj = [&](std::span<const double> th) {
        const auto e = eval_model(p, th, nullptr, nullptr);
        return e.ok ? e.joint - penalty(p, th, nullptr) : kBad;
    };
    auto grd = [&](std::span<const double> th, std::span<double> g) {
        eval_model(p, th, g.data(), nullptr);
        penalty(p, th, g.data());
    };

    const ParamVector th0 =
        spec.family == Family::garch ? init_garch(p) : init_realized(p);
    std::vector<std::vector<double>> starts;
    starts.push_back(th0.pack(spec.family));
    {
        ParamVector a = th0;
        a.beta *= 0.7;
        a.gamma *= 1.3;
        a.alpha *= 1.5;
        starts.push_back(a.pack(spec.family));
        ParamVector b = th0;
        b.beta = std::min(0.95, th0.beta * 1.2 + 0.05);
        b.gamma *= 0.7;
        b.sigma_u *= 1.5;
        starts.push_back(b.pack(spec.family));
    }
    if (spec.family != Family::garch) {
        starts.push_back(canonical_start(p).pack(spec.family));
    }

    optim::Options oo;
    oo.max_iterations = opts.max_iterations;
    oo.grad_tol = opts.grad_tol;
    optim::Result best;
    best.x = starts.front();
    best.f = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        const auto r = optim::bfgs_maximize(obj, grd, s, oo);
        if (r.f > best.f && !r.x.empty()) best = r;
    }
    if (!std::isfinite(best.f)) best.f = obj(best.x);

    // Newton polish with the finite-difference curvature; quadratic local
    // convergence pins the optimum well past the BFGS tolerance.
    const int P = spec.n_params();
    for (int pass = 0; pass < 8; ++pass) {
        std::vector<double> g(P);
        grd(best.x, g);
        auto H = fd_hessian(p, best.x);
        for (double& v : H) v = -v;
        std::vector<double> step;
        if (!optim::solve_linear(H, g, P, step)) break;
        std::vector<double> trial(P);
        double scale = 1.0;
        bool improved = false;
        for (int bs = 0; bs < 12; ++bs) {
            for (int i = 0; i < P; ++i) trial[i] = best.x[i] + scale * step[i];
            const double f_trial = obj(trial);
            if (f_trial > best.f) {
                const double gain = f_trial - best.f;
                best.x = trial;
                best.f = f_trial;
                improved = true;
                if (gain < 1e-10 * std::max(1.0, std::fabs(best.f))) pass = 8;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) break;
    }

    std::vector<double> g_final(P);
    grd(best.x, g_final);
    double gnorm = 0.0;
    for (double v : g_final) gnorm = std::max(gnorm, std::fabs(v));

    FitResult out;
    out.spec = spec;
    out.theta = ParamVector::unpack(spec.family, best.x);
    out.h1 = p.h1;
    out.floored_x = p.floored_x;
    out.convergence.iterations = best.iterations;
    out.convergence.grad_norm = gnorm;
    out.convergence.converged =
        std::isfinite(best.f) && gnorm < 1e-4 * std::max(1.0, std::fabs(best.f));
    out.convergence.status = best.status;

    out.states.h.resize(p.r.size());
    out.states.z.resize(p.r.size());
    if (spec.has_measurement()) out.states.u.resize(p.r.size());
    const auto e = eval_model(p, best.x, nullptr, nullptr, &out.states.h,
                              &out.states.z,
                              spec.has_measurement() ? &out.states.u : nullptr);
    out.loglik_joint = e.joint;
    out.loglik_partial = e.partial;
    out.std_errors = sandwich_se(p, best.x);

    if (!out.convergence.converged && opts.require_convergence) {
        throw FitError("fit did not converge (" + best.status +
                           ", grad_norm=" + std::to_string(gnorm) + ")",
                       out);
    }
    return out;
}

namespace {

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-290) d = 1e-290;
        c = b + an / c;
        if (std::fabs(c) < 1e-290) c = 1e-290;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_sf(double x, int df) {
    if (x <= 0.0) return 1.0;
    const double a = 0.5 * df;
    const double hx = 0.5 * x;
    if (hx < a + 1.0) return 1.0 - gamma_p_series(a, hx);
    return gamma_q_cf(a, hx);
}

ModelComparison compare_models(std::span<const FitResult> fits) {
    ModelComparison cmp;
    if (fits.empty()) return cmp;
    for (std::size_t i = 1; i < fits.size(); ++i) {
        if (fits[i].states.h.size() != fits[0].states.h.size()) {
            throw DataError("compare_models: fits cover different sample ranges");
        }
    }
    for (const auto& f : fits) {
        ComparisonRow row;
        row.name = f.spec.name();
        row.n_params = f.spec.n_params();
        row.has_joint = f.spec.has_measurement();
        row.loglik_joint = f.loglik_joint;
        row.loglik_partial = f.loglik_partial;
        cmp.rows.push_back(row);
    }
    for (std::size_t i = 0; i < fits.size(); ++i) {
        for (std::size_t j = 0; j < fits.size(); ++j) {
            if (i == j) continue;
            const auto& a = fits[i];
            const auto& b = fits[j];
            // realized_garch nests inside realized_jgarch on the same measure
            if (a.spec.family == Family::realized_garch &&
                b.spec.family == Family::realized_jgarch &&
                a.spec.measure == b.spec.measure) {
                LrTest t;
                t.smaller = a.spec.name();
                t.larger = b.spec.name();
                t.statistic = std::max(0.0, 2.0 * (b.loglik_joint - a.loglik_joint));
                t.df = 1;
                t.p_value = chi2_sf(t.statistic, t.df);
                cmp.tests.push_back(t);
            }
            // GARCH against measurement families by the partial likelihood
            if (a.spec.family == Family::garch && b.spec.has_measurement()) {
                LrTest t;
                t.smaller = a.spec.name();
                t.larger = b.spec.name();
                t.statistic = std::max(0.0, 2.0 * (b.loglik_partial - a.loglik_partial));
                t.df = std::max(1, b.spec.n_params() - a.spec.n_params());
                t.p_value = chi2_sf(t.statistic, t.df);
                t.partial_only = true;
                cmp.tests.push_back(t);
            }
        }
    }
    return cmp;
}

}  // namespace fxvol::model
