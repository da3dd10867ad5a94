#pragma once

#include <functional>

namespace gwq {

struct QuadResult {
    double value = 0.0;
    double abserr = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Adaptive 15-point Gauss-Kronrod integration of f over the finite interval
// (a, b). Endpoints are never evaluated, so integrable endpoint
// singularities (log- or power-type) are handled by subdivision. Stops when
// the summed error estimate drops below tol * max(1, |integral|) or the
// subdivision budget is exhausted.
QuadResult integrate(const std::function<double(double)>& f,
                     double a, double b, double tol, int max_intervals = 800);

} // namespace gwq
