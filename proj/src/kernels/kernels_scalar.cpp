#include "gwq/kernels.hpp"

#include <cmath>

namespace gwq::kernels {

namespace {

void s_vexp(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(x[i]);
}

void s_vlog(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::log(x[i]);
}

void s_vlog1p(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::log1p(x[i]);
}

void s_vexpm1(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::expm1(x[i]);
}

FitTerms s_fit_terms(const double* logx, std::size_t n, double theta) {
    FitTerms acc{0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = logx[i];
        const double s = std::exp(theta * t);
        const double q = std::exp(-s);
        const double v = -std::expm1(-s);
        acc.sum_s += s;
        acc.sum_st += s * t;
        acc.sum_lv += std::log(v);
        acc.sum_w += q * s * t / v;
    }
    return acc;
}

void s_tail_integrands(const double* delta, std::size_t n, double alpha,
                       double* f_b, double* f_a, double* f_ba, double* f_aa) {
    const double am1 = alpha - 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t1 = -std::log(delta[i]);
        const double t2 = std::log(t1);
        const double l1p = std::log1p(-delta[i]);
        const double pw = std::exp(am1 * l1p);
        const double b = t1 * pw;
        const double a = t2 * pw;
        f_b[i] = b;
        f_a[i] = a;
        if (f_ba) {
            f_ba[i] = b * l1p;
            f_aa[i] = a * l1p;
        }
    }
}

void s_vquantile(const double* u, double* x, std::size_t n, double theta,
                 double alpha) {
    for (std::size_t i = 0; i < n; ++i) {
        const double m = -std::expm1(std::log(u[i]) / alpha);
        const double big_l = -std::log(m);
        x[i] = std::exp(std::log(big_l) / theta);
    }
}

void s_vcdf(const double* x, double* f, std::size_t n, double theta,
            double alpha) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = std::exp(theta * std::log(x[i]));
        f[i] = std::exp(alpha * std::log(-std::expm1(-s)));
    }
}

} // namespace

const Ops& scalar() {
    static const Ops ops{
        "scalar",    s_vexp,     s_vlog, s_vlog1p, s_vexpm1,
        s_fit_terms, s_tail_integrands, s_vquantile, s_vcdf};
    return ops;
}

} // namespace gwq::kernels
