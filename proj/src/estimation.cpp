#include "gwq/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "gwq/distribution.hpp"
#include "gwq/kernels.hpp"

namespace gwq {

namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss weights, as in
// quadrature.cpp, kept local so the fused multi-channel rule below can batch
// all integrands through one kernel call per segment.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kMinTailMass = 1e-300;

// The two tail integrals over delta in (0, Delta), Delta = e^{-c^theta}:
//   LB  = int (-ln d) (1-d)^(a-1) dd      LA  = int ln(-ln d) (1-d)^(a-1) dd
// evaluated together on a shared adaptive subdivision.
struct TailIntegrals {
    double lb = 0.0, la = 0.0;
    bool ok = false;
};

struct Seg {
    double a, b, val[2], err;
};

Seg gk15_tail(double a, double b, double alpha) {
    double pts[15];
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    pts[0] = c;
    for (int j = 0; j < 7; ++j) {
        pts[1 + 2 * j] = c - h * kXgk[j];
        pts[2 + 2 * j] = c + h * kXgk[j];
    }
    double fb[15], fa[15];
    kernels::active().tail_integrands(pts, 15, alpha, fb, fa, nullptr, nullptr);
    Seg s;
    s.a = a;
    s.b = b;
    s.err = 0.0;
    const double* chan[2] = {fb, fa};
    for (int ch = 0; ch < 2; ++ch) {
        const double* f = chan[ch];
        double kron = kWgk[7] * f[0];
        double gauss = kWg[3] * f[0];
        for (int j = 0; j < 7; ++j) {
            const double pair = f[1 + 2 * j] + f[2 + 2 * j];
            kron += kWgk[j] * pair;
            if (j % 2 == 1)
                gauss += kWg[j / 2] * pair;
        }
        s.val[ch] = kron * h;
        s.err += std::fabs((kron - gauss) * h);
    }
    return s;
}

TailIntegrals tail_integrals(double delta_hi, double alpha, double tol) {
    std::vector<Seg> segs;
    segs.reserve(64);
    segs.push_back(gk15_tail(0.0, delta_hi, alpha));
    const int max_segs = 240;
    for (;;) {
        double tot[2] = {0.0, 0.0};
        double err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            for (int ch = 0; ch < 2; ++ch)
                tot[ch] += segs[i].val[ch];
            err += segs[i].err;
            if (segs[i].err > segs[worst].err)
                worst = i;
        }
        // Relative tolerance: the integrals shrink with the tail mass, so an
        // absolute test would stop far too early for distant thresholds.
        double scale = std::fabs(tot[0]) + std::fabs(tot[1]);
        if (!(scale > 0.0))
            scale = 1.0;

        TailIntegrals out;
        out.lb = tot[0];
        out.la = tot[1];
        const bool finite = std::isfinite(err) && std::isfinite(scale);
        if (finite && err <= tol * scale) {
            out.ok = true;
            return out;
        }
        const Seg bad = segs[worst];
        const double mid = 0.5 * (bad.a + bad.b);
        if (!finite || static_cast<int>(segs.size()) >= max_segs ||
            !(mid > bad.a && mid < bad.b)) {
            out.ok = finite;  // best effort once the budget is exhausted
            return out;
        }
        segs[worst] = gk15_tail(bad.a, mid, alpha);
        segs.push_back(gk15_tail(mid, bad.b, alpha));
    }
}

// One censored tail at threshold c: conditional expectations plus ln(1-F(c)).
struct TailEval {
    double a = 0.0, b = 0.0, c = 0.0;
    double ln_s = 0.0;
    bool ok = false;
};

TailEval tail_eval(double cthr, double th, double al, double tol) {
    TailEval out;
    if (!(cthr > 0.0) || !std::isfinite(cthr))
        return out;
    const double lc = std::log(cthr);
    const double w = std::exp(th * lc);  // c^theta
    if (!(w > 0.0) || !std::isfinite(w))
        return out;
    const double delta = std::exp(-w);
    const double z1 = -std::expm1(-w);  // 1 - e^{-c^theta}
    const double lz1 = std::log(z1);
    const double cap_p = std::exp(al * lz1);    // F(c)
    const double s = -std::expm1(al * lz1);     // 1 - F(c)
    if (!(s >= kMinTailMass))
        return out;

    const TailIntegrals ti = tail_integrals(delta, al, tol);
    if (!ti.ok)
        return out;

    out.a = al * ti.la / (th * s);
    out.b = al * ti.lb / s;
    out.c = -1.0 / al - (cap_p > 0.0 ? cap_p * lz1 / s : 0.0);
    out.ln_s = std::log(s);
    out.ok = std::isfinite(out.a) && std::isfinite(out.b) &&
             std::isfinite(out.c) && std::isfinite(out.ln_s);
    return out;
}

struct Tail {
    double c;
    double weight;
};

constexpr double kThetaLo = 1e-3;
constexpr double kThetaHi = 50.0;
constexpr double kAlphaLo = 3.3546262790251185e-4;  // e^-8
constexpr double kAlphaHi = 2980.9579870417283;     // e^+8

// Weighted tail expectations frozen for one EM sweep, plus the censored
// units' share of the observed log-likelihood.
struct SweepTerms {
    double wa = 0.0, wb = 0.0, wc = 0.0;  // sum over tails of weight * {A,B,C}
    double w_ln_s = 0.0;                  // sum over tails of weight * ln(1-F(c))
    double weight = 0.0;                  // total censored weight
};

SweepTerms e_step(const std::vector<Tail>& tails, double th, double al,
                  double tol) {
    SweepTerms st;
    for (const Tail& tl : tails) {
        const TailEval te = tail_eval(tl.c, th, al, tol);
        if (!te.ok)
            throw FitError("em_fit: censored tail expectations unavailable");
        st.wa += tl.weight * te.a;
        st.wb += tl.weight * te.b;
        st.wc += tl.weight * te.c;
        st.w_ln_s += tl.weight * te.ln_s;
        st.weight += tl.weight;
    }
    return st;
}

// Censored-data log-likelihood at the same iterate the E-step ran on,
// reusing its weighted ln(1-F) term.
double observed_ll(const std::vector<double>& logx, double sum_t,
                   const SweepTerms& st, double th, double al) {
    const auto d = static_cast<double>(logx.size());
    const kernels::FitTerms ft =
        kernels::active().fit_terms(logx.data(), logx.size(), th);
    return d * (std::log(al) + std::log(th)) + (th - 1.0) * sum_t - ft.sum_s +
           (al - 1.0) * ft.sum_lv + st.w_ln_s;
}

// Sweep surrogate: complete-data log-likelihood with the censored units'
// statistics replaced by the frozen E-step expectations.
double sweep_value(const std::vector<double>& logx, double sum_t,
                   const SweepTerms& st, double th, double al) {
    const auto d = static_cast<double>(logx.size());
    const kernels::FitTerms ft =
        kernels::active().fit_terms(logx.data(), logx.size(), th);
    return (d + st.weight) * (std::log(al) + std::log(th)) +
           (th - 1.0) * (sum_t + st.wa) - ft.sum_s - st.wb +
           (al - 1.0) * (ft.sum_lv + st.wc);
}

// The alpha score of the sweep surrogate has the closed-form root
// alpha(theta) = -(d + w) / (sum ln z_i + w*C), which leaves one score in
// theta to drive to zero.
struct ProfilePoint {
    double score;
    double alpha;
};

ProfilePoint profiled_score(const std::vector<double>& logx, double sum_t,
                            const SweepTerms& st, double th) {
    const kernels::FitTerms ft =
        kernels::active().fit_terms(logx.data(), logx.size(), th);
    const double neff = static_cast<double>(logx.size()) + st.weight;
    const double denom = ft.sum_lv + st.wc;  // negative away from degenerate data
    const double al =
        std::clamp(denom < 0.0 ? -neff / denom : kAlphaHi, kAlphaLo, kAlphaHi);
    const double score = neff / th + sum_t + st.wa - ft.sum_st +
                         (al - 1.0) * ft.sum_w;
    return {score, al};
}

// M-step: maximize the sweep surrogate. Theta is bracketed on
// [kThetaLo, kThetaHi] and solved by Illinois regula falsi on the profiled
// score; a step-halving fallback toward the entry point guards the rare
// boundary-clamped sweep so the surrogate never decreases.
GwParams m_step(const std::vector<double>& logx, double sum_t,
                const SweepTerms& st, const GwParams& cur,
                const FitConfig& cfg) {
    const double neff = static_cast<double>(logx.size()) + st.weight;
    const double tol = cfg.nr_tol * neff;

    double a = kThetaLo, b = kThetaHi;
    const ProfilePoint pa = profiled_score(logx, sum_t, st, a);
    const ProfilePoint pb = profiled_score(logx, sum_t, st, b);
    double th, al;
    if (pa.score <= 0.0) {
        th = a;
        al = pa.alpha;
    } else if (pb.score >= 0.0) {
        th = b;
        al = pb.alpha;
    } else {
        double fa = pa.score, fb = pb.score;
        th = 0.5 * (a + b);
        al = pa.alpha;
        int side = 0;
        for (int it = 0; it < cfg.nr_max_iter; ++it) {
            th = (a * fb - b * fa) / (fb - fa);
            if (!(th > a && th < b))
                th = 0.5 * (a + b);
            const ProfilePoint pc = profiled_score(logx, sum_t, st, th);
            al = pc.alpha;
            if (std::fabs(pc.score) <= tol || b - a <= 1e-12 * th)
                break;
            if (pc.score > 0.0) {
                a = th;
                fa = pc.score;
                if (side == 1)
                    fb *= 0.5;
                side = 1;
            } else {
                b = th;
                fb = pc.score;
                if (side == -1)
                    fa *= 0.5;
                side = -1;
            }
        }
    }

    const double base = sweep_value(logx, sum_t, st, cur.theta, cur.alpha);
    double lt = std::log(th / cur.theta);
    double la = std::log(al / cur.alpha);
    for (int h = 0; h < cfg.nr_max_iter; ++h) {
        const double ct = cur.theta * std::exp(lt);
        const double ca = cur.alpha * std::exp(la);
        if (sweep_value(logx, sum_t, st, ct, ca) >=
            base - 1e-9 * (1.0 + std::fabs(base)))
            return GwParams(ct, ca);
        lt *= 0.5;
        la *= 0.5;
    }
    return cur;
}

// Censored Weibull profile start: solve the alpha = 1 shape score
//   d/theta + sum t_i - sum x_i^theta t_i - sum_j w_j c_j^theta ln c_j = 0
// by bisection, then the matching alpha given that shape.
GwParams profile_init(const std::vector<double>& logx, double sum_t,
                      const std::vector<Tail>& tails) {
    const auto d = static_cast<double>(logx.size());
    const auto score = [&](double th) {
        const kernels::FitTerms ft =
            kernels::active().fit_terms(logx.data(), logx.size(), th);
        double h = d / th + sum_t - ft.sum_st;
        for (const Tail& tl : tails) {
            const double lc = std::log(tl.c);
            h -= tl.weight * std::exp(th * lc) * lc;
        }
        return h;
    };
    double lo = 1e-3, hi = 50.0;
    double th;
    if (score(lo) <= 0.0) {
        th = lo;
    } else if (score(hi) >= 0.0) {
        th = hi;
    } else {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (score(mid) > 0.0 ? lo : hi) = mid;
        }
        th = 0.5 * (lo + hi);
    }
    const kernels::FitTerms ft =
        kernels::active().fit_terms(logx.data(), logx.size(), th);
    double al = (ft.sum_lv < 0.0) ? -d / ft.sum_lv : 1.0;
    al = std::clamp(al, 0.05, 1e4);
    return {th, al};
}

struct OptOut {
    double th = 1.0, al = 1.0;
    double obs_ll = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<TracePoint> trace;
};

// EM sweeps: freeze A, B, C at the current iterate, maximize the sweep
// surrogate, refresh, and stop once the largest relative parameter change
// falls below em_tol.
OptOut em_loop(const std::vector<double>& logx, double sum_t,
               const std::vector<Tail>& tails, const GwParams& init,
               const FitConfig& cfg) {
    GwParams cur(std::clamp(init.theta, kThetaLo, kThetaHi),
                 std::clamp(init.alpha, kAlphaLo, kAlphaHi));

    OptOut out;
    SweepTerms st = e_step(tails, cur.theta, cur.alpha, cfg.quad_tol);
    double oll = observed_ll(logx, sum_t, st, cur.theta, cur.alpha);
    if (!std::isfinite(oll))
        throw FitError("em_fit: objective not finite at the starting point");
    out.trace.push_back({cur, oll});

    int sweeps = 0;
    while (sweeps < cfg.em_max_iter) {
        const GwParams next = m_step(logx, sum_t, st, cur, cfg);
        ++sweeps;
        const double delta =
            std::max(std::fabs(std::log(next.theta / cur.theta)),
                     std::fabs(std::log(next.alpha / cur.alpha)));
        cur = next;
        st = e_step(tails, cur.theta, cur.alpha, cfg.quad_tol);
        oll = observed_ll(logx, sum_t, st, cur.theta, cur.alpha);
        out.trace.push_back({cur, oll});
        if (delta < cfg.em_tol) {
            out.converged = true;
            break;
        }
    }
    out.th = cur.theta;
    out.al = cur.alpha;
    out.obs_ll = oll;
    out.iterations = sweeps;
    return out;
}

std::vector<double> checked_logs(const std::vector<double>& obs) {
    std::vector<double> logx(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (!(obs[i] > 0.0) || !std::isfinite(obs[i]))
            throw std::invalid_argument("fit: observed lifetimes must be positive finite");
        logx[i] = std::log(obs[i]);
    }
    return logx;
}

FitResult run_fit(std::vector<double> logx, std::vector<Tail> tails,
                  const CensoringScheme& scheme, std::size_t n_total,
                  std::size_t d_total, const FitConfig& config) {
    if (d_total < 2)
        throw std::invalid_argument("fit: needs at least two observed failures");
    const double sum_t = std::accumulate(logx.begin(), logx.end(), 0.0);
    const GwParams start =
        config.init ? *config.init : profile_init(logx, sum_t, tails);
    OptOut o = em_loop(logx, sum_t, tails, start, config);
    return FitResult{GwParams(o.th, o.al), o.obs_ll,       o.iterations,
                     o.converged,          std::move(o.trace), scheme,
                     n_total,              d_total};
}

} // namespace

double observed_loglik(const HybridCensoredSample& sample, const GwParams& params) {
    if (sample.d == 0)
        throw std::invalid_argument("observed_loglik: no observed failures");
    const std::vector<double> logx = checked_logs(sample.observed);
    const double sum_t = std::accumulate(logx.begin(), logx.end(), 0.0);
    const kernels::FitTerms ft =
        kernels::active().fit_terms(logx.data(), logx.size(), params.theta);
    const auto d = static_cast<double>(sample.d);
    double ll = d * (std::log(params.alpha) + std::log(params.theta)) +
                (params.theta - 1.0) * sum_t - ft.sum_s +
                (params.alpha - 1.0) * ft.sum_lv;
    if (sample.scheme.n > sample.d) {
        const double w = std::exp(params.theta * std::log(sample.c));
        const double lz1 = std::log(-std::expm1(-w));
        const double s = -std::expm1(params.alpha * lz1);
        ll += static_cast<double>(sample.scheme.n - sample.d) * std::log(s);
    }
    return ll;
}

double conditional_A(double c, const GwParams& params, double quad_tol) {
    const TailEval te = tail_eval(c, params.theta, params.alpha, quad_tol);
    if (!te.ok)
        throw FitError("conditional_A: censored tail mass underflow");
    return te.a;
}

double conditional_B(double c, const GwParams& params, double quad_tol) {
    const TailEval te = tail_eval(c, params.theta, params.alpha, quad_tol);
    if (!te.ok)
        throw FitError("conditional_B: censored tail mass underflow");
    return te.b;
}

double conditional_C(double c, const GwParams& params, double quad_tol) {
    (void)quad_tol;  // closed form, no quadrature involved
    if (!(c > 0.0) || !std::isfinite(c))
        throw FitError("conditional_C: threshold must be positive finite");
    const double w = std::exp(params.theta * std::log(c));
    const double lz1 = std::log(-std::expm1(-w));
    const double cap_p = std::exp(params.alpha * lz1);
    const double s = -std::expm1(params.alpha * lz1);
    if (!(s >= kMinTailMass))
        throw FitError("conditional_C: censored tail mass underflow");
    return -1.0 / params.alpha - (cap_p > 0.0 ? cap_p * lz1 / s : 0.0);
}

FitResult em_fit(const HybridCensoredSample& sample, const FitConfig& config) {
    if (sample.observed.size() != sample.d)
        throw std::invalid_argument("em_fit: d does not match the observed count");
    std::vector<Tail> tails;
    if (sample.scheme.n > sample.d) {
        if (!(sample.c > 0.0) || !std::isfinite(sample.c))
            throw std::invalid_argument("em_fit: censoring threshold must be positive finite");
        tails.push_back({sample.c, static_cast<double>(sample.scheme.n - sample.d)});
    }
    return run_fit(checked_logs(sample.observed), std::move(tails), sample.scheme,
                   sample.scheme.n, sample.d, config);
}

FitResult fit_pooled(const std::vector<HybridCensoredSample>& samples,
                     const FitConfig& config) {
    if (samples.empty())
        throw std::invalid_argument("fit_pooled: no samples");
    const CensoringScheme& ref = samples.front().scheme;
    std::vector<double> logx;
    std::vector<Tail> tails;
    std::size_t n_total = 0, d_total = 0;
    for (const HybridCensoredSample& s : samples) {
        if (s.observed.size() != s.d)
            throw std::invalid_argument("fit_pooled: d does not match the observed count");
        if (s.scheme.kind != ref.kind ||
            s.scheme.r * ref.n != ref.r * s.scheme.n ||
            !(s.scheme.x0 == ref.x0))
            throw std::invalid_argument("fit_pooled: samples use different censoring designs");
        const std::vector<double> lx = checked_logs(s.observed);
        logx.insert(logx.end(), lx.begin(), lx.end());
        n_total += s.scheme.n;
        d_total += s.d;
        if (s.scheme.n > s.d) {
            if (!(s.c > 0.0) || !std::isfinite(s.c))
                throw std::invalid_argument("fit_pooled: censoring threshold must be positive finite");
            const double w = static_cast<double>(s.scheme.n - s.d);
            auto same = std::find_if(tails.begin(), tails.end(), [&](const Tail& t) {
                return t.c == s.c;
            });
            if (same != tails.end())
                same->weight += w;
            else
                tails.push_back({s.c, w});
        }
    }
    CensoringScheme pooled = ref;
    pooled.n = n_total;
    pooled.r = 0;
    for (const HybridCensoredSample& s : samples)
        pooled.r += s.scheme.r;
    return run_fit(std::move(logx), std::move(tails), pooled, n_total, d_total,
                   config);
}

double quantile_mle(const FitResult& fit, double p) {
    return quantile(p, fit.params);
}

double ks_statistic(const std::vector<double>& data, const GwParams& params) {
    if (data.empty())
        throw std::invalid_argument("ks_statistic: empty data");
    std::vector<double> x = data;
    std::sort(x.begin(), x.end());
    if (!(x.front() > 0.0))
        throw std::invalid_argument("ks_statistic: data must be positive");
    std::vector<double> f(x.size());
    kernels::active().vcdf(x.data(), f.data(), x.size(), params.theta, params.alpha);
    const auto n = static_cast<double>(x.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lo = f[i] - static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n - f[i];
        dmax = std::max(dmax, std::max(lo, hi));
    }
    return dmax;
}

} // namespace gwq
