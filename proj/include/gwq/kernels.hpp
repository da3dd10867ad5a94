#pragma once

#include <cstddef>

namespace gwq::kernels {

// Batched elementary transforms and the two fused loops that dominate the
// run time (per-observation likelihood terms and quantile-transform
// sampling). A scalar reference implementation always exists; an AVX2+FMA
// variant is selected at runtime when the CPU supports it. Both variants
// are deterministic (fixed evaluation and reduction order per call), and
// the active one can be forced to scalar via force_scalar() or the
// GWQ_FORCE_SCALAR environment variable.

struct FitTerms {
    double sum_s;   // sum of x_i^theta
    double sum_st;  // sum of x_i^theta * ln x_i
    double sum_lv;  // sum of ln(1 - exp(-x_i^theta))
    double sum_w;   // sum of exp(-s_i) * s_i * ln x_i / (1 - exp(-s_i))
};

struct Ops {
    const char* name;

    void (*vexp)(const double* x, double* out, std::size_t n);
    void (*vlog)(const double* x, double* out, std::size_t n);
    void (*vlog1p)(const double* x, double* out, std::size_t n);
    void (*vexpm1)(const double* x, double* out, std::size_t n);

    // Sufficient statistics of the log-likelihood at shape theta, given the
    // precomputed logs of the observed values.
    FitTerms (*fit_terms)(const double* logx, std::size_t n, double theta);

    // Integrand batch for the censored-tail integrals over delta in (0,1):
    //   fB  = (-ln d) (1-d)^(a-1)        fA  = ln(-ln d) (1-d)^(a-1)
    //   fBa = fB * ln(1-d)               fAa = fA * ln(1-d)
    // fBa/fAa may be null when the alpha channel is not needed.
    void (*tail_integrands)(const double* delta, std::size_t n, double alpha,
                            double* fB, double* fA, double* fBa, double* fAa);

    // Inverse-cdf transform u -> x for the unit-scale model
    // F(x) = (1 - exp(-x^theta))^alpha.
    void (*vquantile)(const double* u, double* x, std::size_t n,
                      double theta, double alpha);

    void (*vcdf)(const double* x, double* F, std::size_t n,
                 double theta, double alpha);
};

const Ops& scalar();
bool avx2_available();
const Ops& active();
void force_scalar(bool on);

} // namespace gwq::kernels
