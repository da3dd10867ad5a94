#include "gwq/information.hpp"

#include <cmath>
#include <stdexcept>

#include "gwq/quadrature.hpp"

namespace gwq {

namespace {

constexpr double kMinTailMass = 1e-300;

// Per-unit expected information in the s = x^theta scale, where s has cdf
// (1 - e^{-s})^alpha and the integrands below are the expected negative
// second derivatives of the log density mapped back to (theta, alpha):
//   entry(1,1): 1/t^2 + (1/t^2) E[(ln s)^2 s (1 - (a-1)(z-s)(1-z)/z^2)]
//   entry(1,2): -(1/t)   E[ln s * s (1-z)/z]
//   entry(2,2): 1/a^2
// with z = 1 - e^{-s}. Restricting the expectation to s > w and dividing by
// the tail mass gives the conditional (censored-unit) versions.
struct UnitIntegrals {
    double i11, i12;
};

UnitIntegrals unit_integrals(const GwParams& p, double lo, double tol) {
    const double al = p.alpha;
    const double hi = lo + 120.0 + std::log1p(al);
    const auto dens = [al](double u) {
        const double z = -std::expm1(-u);
        return al * std::exp((al - 1.0) * std::log(z) - u);
    };
    const auto f11 = [&](double u) {
        const double z = -std::expm1(-u);
        const double lu = std::log(u);
        const double corr = (z - u) * (1.0 - z) / (z * z);
        return lu * lu * u * (1.0 - (al - 1.0) * corr) * dens(u);
    };
    const auto f12 = [&](double u) {
        const double z = -std::expm1(-u);
        return std::log(u) * u * (1.0 - z) / z * dens(u);
    };
    const QuadResult r11 = integrate(f11, lo, hi, tol);
    const QuadResult r12 = integrate(f12, lo, hi, tol);
    if (!r11.converged || !r12.converged)
        throw FitError("information: integral did not converge");
    return {r11.value, r12.value};
}

} // namespace

InfoMatrix complete_info(std::size_t n, const GwParams& params, double quad_tol) {
    const UnitIntegrals ui = unit_integrals(params, 0.0, quad_tol);
    const double t2 = params.theta * params.theta;
    InfoMatrix out;
    out.kind = InfoKind::Complete;
    out.i11 = static_cast<double>(n) * (1.0 / t2 + ui.i11 / t2);
    out.i12 = static_cast<double>(n) * (-ui.i12 / params.theta);
    out.i22 = static_cast<double>(n) / (params.alpha * params.alpha);
    return out;
}

InfoMatrix missing_info(std::size_t n_minus_d, double c, const GwParams& params,
                        double quad_tol) {
    InfoMatrix out;
    out.kind = InfoKind::Missing;
    if (n_minus_d == 0)
        return out;
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("missing_info: c must be positive finite");

    const double th = params.theta;
    const double al = params.alpha;
    const double lc = std::log(c);
    const double w0 = std::exp(th * lc);
    const double z1 = -std::expm1(-w0);
    const double lz1 = std::log(z1);
    const double cap_p = std::exp(al * lz1);  // F(c)
    const double s = -std::expm1(al * lz1);   // 1 - F(c)
    if (!(s >= kMinTailMass))
        throw FitError("missing_info: censored tail mass underflow");

    const UnitIntegrals ui = unit_integrals(params, w0, quad_tol);

    // Second derivatives of ln(1 - F(c)).
    const double z1t = (1.0 - z1) * w0 * lc;
    const double z1tt = (1.0 - z1) * w0 * lc * lc * (1.0 - w0);
    const double za1 = std::exp((al - 1.0) * lz1);  // z1^(alpha-1)
    const double pt = al * za1 * z1t;
    const double ptt =
        al * (al - 1.0) * std::exp((al - 2.0) * lz1) * z1t * z1t + al * za1 * z1tt;
    const double s2 = s * s;
    const double d2t = -(ptt * s + pt * pt) / s2;
    const double d2a = -cap_p * lz1 * lz1 / s2;
    const double d2ta = -((pt * lz1 + cap_p * z1t / z1) * s + cap_p * lz1 * pt) / s2;

    const double t2 = th * th;
    const double m = static_cast<double>(n_minus_d);
    out.i11 = m * (1.0 / t2 + ui.i11 / (t2 * s) + d2t);
    out.i12 = m * (-ui.i12 / (th * s) + d2ta);
    out.i22 = m * (1.0 / (al * al) + d2a);
    return out;
}

InfoMatrix observed_info(const HybridCensoredSample& sample, const GwParams& params,
                         double quad_tol) {
    const InfoMatrix full = complete_info(sample.scheme.n, params, quad_tol);
    InfoMatrix out = full;
    out.kind = InfoKind::Observed;
    if (sample.scheme.n > sample.d) {
        const InfoMatrix miss =
            missing_info(sample.scheme.n - sample.d, sample.c, params, quad_tol);
        out.i11 -= miss.i11;
        out.i12 -= miss.i12;
        out.i22 -= miss.i22;
    }
    return out;
}

std::array<double, 2> quantile_gradient(double p, const GwParams& params) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("quantile_gradient: p must be in (0,1)");
    const double th = params.theta;
    const double al = params.alpha;
    const double pa = std::exp(std::log(p) / al);  // p^(1/alpha)
    const double m = -std::expm1(std::log(p) / al);
    const double big_l = -std::log(m);
    const double xi = std::exp(std::log(big_l) / th);
    const double d_theta = -xi * std::log(big_l) / (th * th);
    const double dl_da = -pa * std::log(p) / (m * al * al);
    const double d_alpha = xi / (th * big_l) * dl_da;
    return {d_theta, d_alpha};
}

double quantile_se(const FitResult& fit, double p, std::size_t m,
                   double quad_tol) {
    if (m < 1)
        throw std::invalid_argument("quantile_se: m must be at least 1");
    const GwParams& params = fit.params;
    const CensoringScheme& design = fit.scheme;

    // Rescale the fitted design to one subgroup of m units.
    const double ratio = static_cast<double>(design.r) / static_cast<double>(design.n);
    auto r_m = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(m)));
    r_m = std::min(std::max<std::size_t>(r_m, 1), m);

    double miss = 0.0;
    double c_eff = 0.0;
    if (!std::isfinite(design.x0)) {
        // Failure quota only: threshold at the r_m/m-th fitted quantile.
        if (r_m < m) {
            c_eff = quantile(static_cast<double>(r_m) / static_cast<double>(m), params);
            miss = static_cast<double>(m - r_m);
        }
    } else {
        const double f0 = cdf(design.x0, params);
        c_eff = design.x0;
        if (static_cast<double>(m) * f0 >= static_cast<double>(r_m))
            miss = static_cast<double>(m - r_m);  // quota binds at the fit
        else
            miss = static_cast<double>(m) * (1.0 - f0);
    }

    const InfoMatrix full = complete_info(m, params, quad_tol);
    double i11 = full.i11, i12 = full.i12, i22 = full.i22;
    if (miss > 0.0) {
        const InfoMatrix unit = missing_info(1, c_eff, params, quad_tol);
        i11 -= miss * unit.i11;
        i12 -= miss * unit.i12;
        i22 -= miss * unit.i22;
    }
    const double det = i11 * i22 - i12 * i12;
    if (!(i11 > 0.0) || !(det > 0.0))
        throw FitError("quantile_se: information matrix not positive definite");

    const std::array<double, 2> g = quantile_gradient(p, params);
    const double w1 = (i22 * g[0] - i12 * g[1]) / det;
    const double w2 = (-i12 * g[0] + i11 * g[1]) / det;
    const double quad_form = g[0] * w1 + g[1] * w2;
    return std::sqrt(quad_form / static_cast<double>(m));
}

} // namespace gwq
