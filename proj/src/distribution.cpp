#include "gwq/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gwq/kernels.hpp"

namespace gwq {

GwParams::GwParams(double theta_, double alpha_) : theta(theta_), alpha(alpha_) {
    if (!(theta > 0.0) || !std::isfinite(theta) || !(alpha > 0.0) ||
        !std::isfinite(alpha))
        throw std::invalid_argument("GwParams: theta and alpha must be positive finite");
}

double pdf(double x, const GwParams& params) {
    if (!(x > 0.0))
        throw std::domain_error("pdf: x must be positive");
    const double s = std::exp(params.theta * std::log(x));
    const double v = -std::expm1(-s);
    const double logf = std::log(params.alpha) + std::log(params.theta) +
                        (params.alpha - 1.0) * std::log(v) - s +
                        (params.theta - 1.0) * std::log(x);
    return std::exp(logf);
}

double cdf(double x, const GwParams& params) {
    if (!(x > 0.0))
        throw std::domain_error("cdf: x must be positive");
    const double s = std::exp(params.theta * std::log(x));
    return std::exp(params.alpha * std::log(-std::expm1(-s)));
}

double quantile(double p, const GwParams& params) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("quantile: p must be in (0,1)");
    const double m = -std::expm1(std::log(p) / params.alpha);
    const double big_l = -std::log(m);
    return std::exp(std::log(big_l) / params.theta);
}

std::vector<double> sample(const GwParams& params, std::size_t n, RngStream& rng) {
    std::vector<double> u(n), x(n);
    for (std::size_t i = 0; i < n; ++i)
        u[i] = rng.uniform();
    kernels::active().vquantile(u.data(), x.data(), n, params.theta, params.alpha);
    std::sort(x.begin(), x.end());
    return x;
}

HazardShape classify_hazard(const GwParams& params) {
    const double at = params.alpha * params.theta;
    if (params.alpha == 1.0 || at == 1.0)
        return HazardShape::Boundary;
    if (params.alpha > 1.0 && at < 1.0)
        return HazardShape::Bathtub;
    if (params.alpha < 1.0 && at > 1.0)
        return HazardShape::Unimodal;
    if (params.alpha > 1.0)
        return HazardShape::Increasing;
    return HazardShape::Decreasing;
}

} // namespace gwq
