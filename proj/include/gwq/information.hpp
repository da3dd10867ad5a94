#pragma once

#include <array>
#include <cstddef>

#include "gwq/censoring.hpp"
#include "gwq/distribution.hpp"
#include "gwq/estimation.hpp"

namespace gwq {

enum class InfoKind { Complete, Missing, Observed };

// 2x2 symmetric information matrix indexed (theta, alpha).
struct InfoMatrix {
    double i11 = 0.0, i12 = 0.0, i22 = 0.0;
    InfoKind kind = InfoKind::Complete;

    double operator()(int r, int c) const {
        return (r == 0 && c == 0) ? i11 : (r == 1 && c == 1) ? i22 : i12;
    }
    double det() const { return i11 * i22 - i12 * i12; }
    bool positive_definite() const { return i11 > 0.0 && det() > 0.0; }
};

// Expected information of n complete observations. The (alpha,alpha) entry
// is exactly n/alpha^2; the others are single integrals evaluated to
// quad_tol.
InfoMatrix complete_info(std::size_t n, const GwParams& params,
                         double quad_tol = 1e-8);

// Information carried by n_minus_d units right-censored at c: the expected
// negative Hessian of the conditional (truncated at c) log density. The
// (alpha,alpha) entry is closed-form:
//   b22 = 1/alpha^2 - F(c) ln(z1)^2 / (1-F(c))^2,  z1 = 1 - e^{-c^theta}.
InfoMatrix missing_info(std::size_t n_minus_d, double c, const GwParams& params,
                        double quad_tol = 1e-8);

// Observed information = complete - missing, using the sample's (d, c).
InfoMatrix observed_info(const HybridCensoredSample& sample, const GwParams& params,
                         double quad_tol = 1e-8);

// Analytic gradient of the p-th quantile with respect to (theta, alpha).
std::array<double, 2> quantile_gradient(double p, const GwParams& params);

// Delta-method asymptotic standard error of the plug-in quantile estimate
// for a subgroup of size m:
//     se = sqrt( grad' I_m(params)^{-1} grad / m )
// where I_m is the observed information of ONE subgroup of size m under the
// fit's censoring design scaled down to m units (r scaled proportionally,
// x0 unchanged), evaluated at the fitted parameters. The censored count
// plugs in the design expectation: when the failure quota binds at the
// fitted parameters (m F(x0) >= r_m) it is m - r_m at threshold x0,
// otherwise m (1 - F(x0)); for a type-II design the threshold is the
// r_m/m-th fitted quantile. Throws FitError when the information matrix is
// not positive definite.
double quantile_se(const FitResult& fit, double p, std::size_t m,
                   double quad_tol = 1e-8);

} // namespace gwq
