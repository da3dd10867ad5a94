#include "gwq/kernels.hpp"

#include <cmath>
#include <cstring>
#include <immintrin.h>

// Vector math built on the classic Cephes rational approximations for
// exp/log, with log1p/expm1 recovered through the correction-factor
// identities. Accuracy is within ~2 ulp of libm across the ranges the
// library exercises; the unit tests pin this down against the scalar path.

namespace gwq::kernels {

namespace {

inline __m256d i64_to_f64(__m256i v) {
    // Exponents fit in int32, so pack and widen through cvtepi32_pd.
    const __m256i perm = _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0);
    __m128i lo = _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(v, perm));
    return _mm256_cvtepi32_pd(lo);
}

inline __m256d pow2i(__m256d n) {
    // n integral in [-1022, 1023]; build 2^n from the exponent bits.
    __m128i ni = _mm256_cvtpd_epi32(n);
    __m256i wide = _mm256_cvtepi32_epi64(ni);
    wide = _mm256_slli_epi64(_mm256_add_epi64(wide, _mm256_set1_epi64x(1023)), 52);
    return _mm256_castsi256_pd(wide);
}

inline __m256d exp4(__m256d x) {
    const __m256d hi = _mm256_set1_pd(709.0);
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d big = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
    const __m256d sml = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    xc = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), xc);
    xc = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), xc);

    const __m256d xx = _mm256_mul_pd(xc, xc);
    __m256d px = _mm256_set1_pd(1.26177193074810590878e-4);
    px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(3.02994407707441961300e-2));
    px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910e-1));
    px = _mm256_mul_pd(px, xc);
    __m256d qx = _mm256_set1_pd(3.00198505138664455042e-6);
    qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.52448340349684104192e-3));
    qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766e-1));
    qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.00000000000000000005e0));

    __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));
    r = _mm256_mul_pd(r, pow2i(n));
    r = _mm256_blendv_pd(r, _mm256_set1_pd(HUGE_VAL), big);
    r = _mm256_blendv_pd(r, _mm256_setzero_pd(), sml);
    return r;
}

inline __m256d log4(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256i xi = _mm256_castpd_si256(x);
    __m256d e = i64_to_f64(
        _mm256_sub_epi64(_mm256_srli_epi64(xi, 52), _mm256_set1_epi64x(1022)));
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
        _mm256_and_si256(xi, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
        _mm256_set1_epi64x(0x3FE0000000000000ll)));

    const __m256d small =
        _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    m = _mm256_add_pd(m, _mm256_and_pd(small, m));
    e = _mm256_sub_pd(e, _mm256_and_pd(small, one));

    const __m256d z = _mm256_sub_pd(m, one);
    const __m256d zz = _mm256_mul_pd(z, z);

    __m256d p = _mm256_set1_pd(1.01875663804580931796e-4);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.97494994976747001425e-1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.70579119878881725854e0));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.44989225341610930846e1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(1.79368678507819816313e1));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(7.70838733755885391666e0));
    __m256d q = _mm256_add_pd(z, _mm256_set1_pd(1.12873587189167450590e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(4.52279145837532221105e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(8.29875266912776603211e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(7.11544750618563894466e1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.31251620126765340583e1));

    __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, zz), _mm256_div_pd(p, q));
    y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, y);
    __m256d res = _mm256_add_pd(z, y);
    res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);

    const __m256d zmask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d nmask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(-HUGE_VAL), zmask);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(NAN), nmask);
    return res;
}

inline __m256d log1p4(__m256d x) {
    // log1p(x) = log(1+x) * x / ((1+x) - 1), exact where 1+x rounds to 1.
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d u = _mm256_add_pd(one, x);
    const __m256d um1 = _mm256_sub_pd(u, one);
    const __m256d exact = _mm256_cmp_pd(u, one, _CMP_EQ_OQ);
    const __m256d corr = _mm256_div_pd(x, um1);
    __m256d res = _mm256_mul_pd(log4(u), corr);
    return _mm256_blendv_pd(res, x, exact);
}

inline __m256d expm14(__m256d x) {
    // expm1(x) = (exp(x) - 1) * x / log(exp(x)), same correction idea.
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d em = exp4(x);
    const __m256d em1 = _mm256_sub_pd(em, one);
    const __m256d exact = _mm256_cmp_pd(em, one, _CMP_EQ_OQ);
    const __m256d zero_em = _mm256_cmp_pd(em1, _mm256_set1_pd(-1.0), _CMP_EQ_OQ);
    __m256d res = _mm256_mul_pd(em1, _mm256_div_pd(x, log4(em)));
    res = _mm256_blendv_pd(res, x, exact);
    res = _mm256_blendv_pd(res, _mm256_set1_pd(-1.0), zero_em);
    return res;
}

inline double hsum(__m256d v) {
    // Fixed reduction order: (lane0+lane2) + (lane1+lane3).
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

template <class F>
void map4(const double* x, double* out, std::size_t n, double pad, F f) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, f(_mm256_loadu_pd(x + i)));
    if (i < n) {
        double buf[4] = {pad, pad, pad, pad};
        std::memcpy(buf, x + i, (n - i) * sizeof(double));
        double res[4];
        _mm256_storeu_pd(res, f(_mm256_loadu_pd(buf)));
        std::memcpy(out + i, res, (n - i) * sizeof(double));
    }
}

void a_vexp(const double* x, double* out, std::size_t n) {
    map4(x, out, n, 0.0, [](__m256d v) { return exp4(v); });
}

void a_vlog(const double* x, double* out, std::size_t n) {
    map4(x, out, n, 1.0, [](__m256d v) { return log4(v); });
}

void a_vlog1p(const double* x, double* out, std::size_t n) {
    map4(x, out, n, 0.0, [](__m256d v) { return log1p4(v); });
}

void a_vexpm1(const double* x, double* out, std::size_t n) {
    map4(x, out, n, 0.0, [](__m256d v) { return expm14(v); });
}

FitTerms a_fit_terms(const double* logx, std::size_t n, double theta) {
    const __m256d th = _mm256_set1_pd(theta);
    __m256d acc_s = _mm256_setzero_pd();
    __m256d acc_st = _mm256_setzero_pd();
    __m256d acc_lv = _mm256_setzero_pd();
    __m256d acc_w = _mm256_setzero_pd();

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = _mm256_loadu_pd(logx + i);
        const __m256d s = exp4(_mm256_mul_pd(th, t));
        const __m256d negs = _mm256_sub_pd(_mm256_setzero_pd(), s);
        const __m256d q = exp4(negs);
        const __m256d v = _mm256_sub_pd(_mm256_setzero_pd(), expm14(negs));
        const __m256d w =
            _mm256_div_pd(_mm256_mul_pd(q, _mm256_mul_pd(s, t)), v);
        acc_s = _mm256_add_pd(acc_s, s);
        acc_st = _mm256_fmadd_pd(s, t, acc_st);
        acc_lv = _mm256_add_pd(acc_lv, log4(v));
        acc_w = _mm256_add_pd(acc_w, w);
    }
    FitTerms acc{hsum(acc_s), hsum(acc_st), hsum(acc_lv), hsum(acc_w)};
    for (; i < n; ++i) {
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

void a_tail_integrands(const double* delta, std::size_t n, double alpha,
                       double* f_b, double* f_a, double* f_ba, double* f_aa) {
    const __m256d am1 = _mm256_set1_pd(alpha - 1.0);
    std::size_t i = 0;
    double buf[4], b4[4], a4[4], ba4[4], aa4[4];
    while (i < n) {
        const std::size_t k = (n - i >= 4) ? 4 : n - i;
        const double* src = delta + i;
        if (k < 4) {
            buf[0] = buf[1] = buf[2] = buf[3] = 0.5;
            std::memcpy(buf, src, k * sizeof(double));
            src = buf;
        }
        const __m256d d = _mm256_loadu_pd(src);
        const __m256d t1 = _mm256_sub_pd(_mm256_setzero_pd(), log4(d));
        const __m256d t2 = log4(t1);
        const __m256d l1p = log1p4(_mm256_sub_pd(_mm256_setzero_pd(), d));
        const __m256d pw = exp4(_mm256_mul_pd(am1, l1p));
        const __m256d b = _mm256_mul_pd(t1, pw);
        const __m256d a = _mm256_mul_pd(t2, pw);
        _mm256_storeu_pd(b4, b);
        _mm256_storeu_pd(a4, a);
        std::memcpy(f_b + i, b4, k * sizeof(double));
        std::memcpy(f_a + i, a4, k * sizeof(double));
        if (f_ba) {
            _mm256_storeu_pd(ba4, _mm256_mul_pd(b, l1p));
            _mm256_storeu_pd(aa4, _mm256_mul_pd(a, l1p));
            std::memcpy(f_ba + i, ba4, k * sizeof(double));
            std::memcpy(f_aa + i, aa4, k * sizeof(double));
        }
        i += k;
    }
}

void a_vquantile(const double* u, double* x, std::size_t n, double theta,
                 double alpha) {
    const __m256d inva = _mm256_set1_pd(1.0 / alpha);
    const __m256d invt = _mm256_set1_pd(1.0 / theta);
    map4(u, x, n, 0.5, [&](__m256d uu) {
        const __m256d m =
            _mm256_sub_pd(_mm256_setzero_pd(), expm14(_mm256_mul_pd(log4(uu), inva)));
        const __m256d big_l = _mm256_sub_pd(_mm256_setzero_pd(), log4(m));
        return exp4(_mm256_mul_pd(log4(big_l), invt));
    });
}

void a_vcdf(const double* x, double* f, std::size_t n, double theta,
            double alpha) {
    const __m256d th = _mm256_set1_pd(theta);
    const __m256d al = _mm256_set1_pd(alpha);
    map4(x, f, n, 1.0, [&](__m256d xx) {
        const __m256d s = exp4(_mm256_mul_pd(th, log4(xx)));
        const __m256d negs = _mm256_sub_pd(_mm256_setzero_pd(), s);
        const __m256d v = _mm256_sub_pd(_mm256_setzero_pd(), expm14(negs));
        return exp4(_mm256_mul_pd(al, log4(v)));
    });
}

} // namespace

const Ops& avx2_ops() {
    static const Ops ops{
        "avx2",      a_vexp,     a_vlog, a_vlog1p, a_vexpm1,
        a_fit_terms, a_tail_integrands, a_vquantile, a_vcdf};
    return ops;
}

} // namespace gwq::kernels
