#pragma once

#include <cstddef>
#include <vector>

#include "gwq/rng.hpp"

namespace gwq {

// Unit-scale generalized (exponentiated) Weibull parameter pair. The cdf is
// F(x) = (1 - exp(-x^theta))^alpha for x > 0.
struct GwParams {
    double theta;
    double alpha;

    GwParams(double theta_, double alpha_);
};

enum class HazardShape { Bathtub, Unimodal, Increasing, Decreasing, Boundary };

double pdf(double x, const GwParams& params);
double cdf(double x, const GwParams& params);
double quantile(double p, const GwParams& params);

// n iid draws by inverse-cdf transform, returned sorted ascending.
std::vector<double> sample(const GwParams& params, std::size_t n, RngStream& rng);

// Hazard-rate shape by parameter region: bathtub for alpha>1, alpha*theta<1;
// unimodal for alpha<1, alpha*theta>1; monotone otherwise; Boundary when
// alpha==1 or alpha*theta==1.
HazardShape classify_hazard(const GwParams& params);

} // namespace gwq
