#include "gwq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gwq {

namespace {

// 15-point Kronrod nodes on [0,1] offsets plus embedded 7-point Gauss weights.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
};

// One Gauss-Kronrod 15(7) rule application on [a,b].
Interval gk15(const std::function<double(double)>& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        kron += kWgk[j] * (f1 + f2);
        if (j % 2 == 1)
            gauss += kWg[j / 2] * (f1 + f2);
    }
    Interval out;
    out.a = a;
    out.b = b;
    out.value = kron * h;
    out.error = std::fabs((kron - gauss) * h);
    return out;
}

} // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double tol, int max_intervals) {
    if (!(b > a))
        throw std::invalid_argument("integrate: requires b > a");
    if (!(tol > 0.0))
        throw std::invalid_argument("integrate: requires tol > 0");

    std::vector<Interval> segs;
    segs.reserve(64);
    segs.push_back(gk15(f, a, b));

    QuadResult res;
    res.evaluations = 15;
    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error)
                worst = i;
        }
        res.value = total;
        res.abserr = err;
        if (err <= tol * std::max(1.0, std::fabs(total))) {
            res.converged = true;
            return res;
        }
        if (static_cast<int>(segs.size()) >= max_intervals) {
            res.converged = false;
            return res;
        }
        const Interval bad = segs[worst];
        const double mid = 0.5 * (bad.a + bad.b);
        if (!(mid > bad.a && mid < bad.b)) {
            // Interval no longer splittable in double precision.
            res.converged = false;
            return res;
        }
        segs[worst] = gk15(f, bad.a, mid);
        segs.push_back(gk15(f, mid, bad.b));
        res.evaluations += 30;
    }
}

} // namespace gwq
