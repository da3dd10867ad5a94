#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gwq/censoring.hpp"
#include "gwq/distribution.hpp"

namespace gwq {

struct FitConfig {
    // Starting point; when absent, a censored Weibull profile fit supplies it.
    std::optional<GwParams> init;
    double em_tol = 1e-6;     // convergence threshold on max |relative param change|
    int em_max_iter = 500;    // outer iteration cap
    double nr_tol = 1e-8;     // scaled gradient-norm target of the inner ascent
    int nr_max_iter = 50;     // step-halving cap per iteration
    double quad_tol = 1e-8;   // quadrature tolerance for the tail expectations
};

struct TracePoint {
    GwParams params;
    double loglik;    // censored-data log-likelihood at this iterate
};

// Numerical failure inside a fit (divergence, underflow of the censored
// tail, non-finite objective at the starting point).
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitResult {
    GwParams params;
    double loglik;        // censored-data log-likelihood at params
    int iterations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;

    // Pooled design the fit was computed under (n/d sum over subgroups for
    // pooled fits); consumed by the delta-method standard error.
    CensoringScheme scheme;
    std::size_t n_total = 0;
    std::size_t d_total = 0;
};

// Censored-data log-likelihood: sum of log densities over the observed
// values plus (n-d) * log(1 - F(c)), constants dropped. Throws
// std::invalid_argument when d = 0.
double observed_loglik(const HybridCensoredSample& sample, const GwParams& params);

// Conditional expectations of a unit truncated below at c:
//   A = E[ln Y | Y > c],  B = E[Y^theta | Y > c],  C = E[ln(1-e^{-Y^theta}) | Y > c].
// Throw FitError when the truncation probability 1 - F(c) underflows
// (below 1e-300).
double conditional_A(double c, const GwParams& params, double quad_tol = 1e-8);
double conditional_B(double c, const GwParams& params, double quad_tol = 1e-8);
double conditional_C(double c, const GwParams& params, double quad_tol = 1e-8);

// Censored-data fit. The objective is the expected complete-data
// log-likelihood with the tail expectations A, B, C evaluated at the same
// parameters being maximized (a self-consistent pseudo-likelihood); it is
// climbed by safeguarded quasi-Newton ascent in log-parameter space, with
// the expectations refreshed continuously rather than frozen per sweep.
// The pseudo-likelihood ascends monotonically along the trace; it equals
// the censored-data log-likelihood exactly when the sample is uncensored
// (d = n), in which case the fit is the plain MLE. Under censoring the
// fixed point weights the censored tail more heavily than the plain MLE
// would, which is what the downstream chart constructions calibrate
// against. Requires d >= 2; throws std::invalid_argument otherwise.
FitResult em_fit(const HybridCensoredSample& sample, const FitConfig& config = {});

// Fit one parameter pair to several censored samples at once by summing
// their log-likelihood (and tail) terms. All samples must share the same
// scheme shape (r/n ratio and x0); the result's scheme is the pooled one.
FitResult fit_pooled(const std::vector<HybridCensoredSample>& samples,
                     const FitConfig& config = {});

// Plug-in quantile estimate at the fitted parameters.
double quantile_mle(const FitResult& fit, double p);

// Kolmogorov-Smirnov sup-distance between the empirical cdf of data and the
// model cdf at params.
double ks_statistic(const std::vector<double>& data, const GwParams& params);

} // namespace gwq
