#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fxvol/common.hpp"

namespace fxvol::model {

enum class Family { garch, realized_garch, realized_jgarch, realized_jgarch_scale };

Family family_from_string(const std::string& s);
std::string family_to_string(Family f);

struct ModelSpec {
    Family family = Family::realized_garch;
    // which measures column feeds x_t: rv | bv | tsrv | rk | jwtsrv | jw_cJ
    std::string measure = "jwtsrv";
    int scale = 0;  // component index for the per-scale family, 1-based

    bool include_jumps() const {
        return family == Family::realized_jgarch ||
               family == Family::realized_jgarch_scale;
    }
    bool has_measurement() const { return family != Family::garch; }
    int n_params() const;
    std::string name() const;
};

// One struct for every family; the packed subset depends on the family:
//   garch:                 [omega, alpha, beta]
//   realized_garch:        [omega, beta, gamma, xi_m, psi, tau1, tau2, sigma_u]
//   realized_jgarch(_scale): adds gamma_j after gamma
struct ParamVector {
    double omega = 0.0;
    double alpha = 0.0;  // plain GARCH only
    double beta = 0.0;
    double gamma = 0.0;
    double gamma_j = 0.0;
    double xi_m = 0.0;
    double psi = 1.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    double sigma_u = 0.3;

    std::vector<double> pack(Family f) const;
    static ParamVector unpack(Family f, std::span<const double> v);
    static std::vector<std::string> param_names(Family f);
};

// Daily series aligned by date.
struct SeriesData {
    std::vector<Date> dates;
    std::vector<double> r;   // open-to-close returns
    std::vector<double> x;   // realized measure (daily variance units)
    std::vector<double> jv;  // jump variation, may be empty when unused

    std::size_t size() const { return r.size(); }
};

struct FilteredStates {
    std::vector<double> h;
    std::vector<double> z;
    std::vector<double> u;  // empty for plain GARCH
};

struct LogLik {
    double joint = 0.0;    // l(r, x); equals partial for plain GARCH
    double partial = 0.0;  // l(r)
};

// Deterministic recursion at fixed parameters. h1 <= 0 selects the default
// initialization (sample variance of r). Throws NumericError naming t when
// the recursion leaves the representable range.
FilteredStates filter_states(const ParamVector& theta, const ModelSpec& spec,
                             const SeriesData& data, double h1 = 0.0,
                             double x_floor = 1e-12);

LogLik loglik(const ParamVector& theta, const ModelSpec& spec,
              const SeriesData& data, double h1 = 0.0, double x_floor = 1e-12);

// Analytic gradient of the joint log-likelihood with respect to the packed
// parameters (no stationarity penalty).
std::vector<double> loglik_gradient(const ParamVector& theta, const ModelSpec& spec,
                                    const SeriesData& data, double h1 = 0.0,
                                    double x_floor = 1e-12);

struct Convergence {
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
    std::string status;
};

struct FitResult {
    ModelSpec spec;
    ParamVector theta;
    std::vector<double> std_errors;  // packed order, QMLE sandwich
    double loglik_joint = 0.0;
    double loglik_partial = 0.0;
    FilteredStates states;
    Convergence convergence;
    double h1 = 0.0;
    std::size_t floored_x = 0;
};

struct FitOptions {
    std::size_t min_observations = 100;
    double x_floor = 1e-12;
    int max_iterations = 600;
    double grad_tol = 1e-7;
    bool require_convergence = true;
    double h1_override = 0.0;
};

struct FitError : NumericError {
    FitError(const std::string& msg, FitResult best)
        : NumericError(msg), best_result(std::move(best)) {}
    FitResult best_result;
};

// Quasi-maximum likelihood: BFGS with analytic gradients plus a Newton
// polish, stationarity kept by penalty. Deterministic given data and options.
FitResult fit(const ModelSpec& spec, const SeriesData& data,
              const FitOptions& opts = {});

struct ComparisonRow {
    std::string name;
    int n_params = 0;
    bool has_joint = false;
    double loglik_joint = 0.0;
    double loglik_partial = 0.0;
};
struct LrTest {
    std::string smaller, larger;
    double statistic = 0.0;  // 2 * (l_big - l_small)
    int df = 0;
    double p_value = 1.0;
    bool partial_only = false;  // GARCH vs realized families use l(r)
};
struct ModelComparison {
    std::vector<ComparisonRow> rows;
    std::vector<LrTest> tests;
};

// All fits must share the same return series (dates compared); mismatch is
// a DataError.
ModelComparison compare_models(std::span<const FitResult> fits);

double chi2_sf(double x, int df);  // survival function, used for LR p-values

}  // namespace fxvol::model
