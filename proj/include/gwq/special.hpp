#pragma once

namespace gwq {

// Quantile of the standard normal distribution (Wichura's PPND16 algorithm,
// accurate to ~1e-15 over (0,1)). Throws std::domain_error outside (0,1).
double normal_quantile(double p);

// Standard normal cdf.
double normal_cdf(double x);

} // namespace gwq
