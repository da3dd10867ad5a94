#include "gwq/censoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CensoringScheme CensoringScheme::hybrid(std::size_t n, std::size_t r, double x0) {
    CensoringScheme s{n, r, x0, CensorKind::Hybrid};
    s.validate();
    return s;
}

CensoringScheme CensoringScheme::type_i(std::size_t n, double x0) {
    CensoringScheme s{n, n, x0, CensorKind::TypeI};
    s.validate();
    return s;
}

CensoringScheme CensoringScheme::type_ii(std::size_t n, std::size_t r) {
    CensoringScheme s{n, r, kInf, CensorKind::TypeII};
    s.validate();
    return s;
}

CensoringScheme CensoringScheme::none(std::size_t n) {
    CensoringScheme s{n, n, kInf, CensorKind::TypeII};
    s.validate();
    return s;
}

void CensoringScheme::validate() const {
    if (n < 1)
        throw std::invalid_argument("CensoringScheme: n must be at least 1");
    if (r < 1 || r > n)
        throw std::invalid_argument("CensoringScheme: r must be in [1, n]");
    if (!(x0 > 0.0))
        throw std::invalid_argument("CensoringScheme: x0 must be positive");
    switch (kind) {
    case CensorKind::Hybrid:
        if (!std::isfinite(x0))
            throw std::invalid_argument("CensoringScheme: hybrid requires finite x0");
        break;
    case CensorKind::TypeI:
        if (r != n)
            throw std::invalid_argument("CensoringScheme: type-I requires r = n");
        if (!std::isfinite(x0))
            throw std::invalid_argument("CensoringScheme: type-I requires finite x0");
        break;
    case CensorKind::TypeII:
        if (std::isfinite(x0))
            throw std::invalid_argument("CensoringScheme: type-II requires x0 = +inf");
        break;
    }
}

HybridCensoredSample censor(const std::vector<double>& complete,
                            const CensoringScheme& scheme) {
    scheme.validate();
    if (complete.size() != scheme.n)
        throw std::invalid_argument("censor: sample size does not match scheme.n");
    if (!(complete.front() > 0.0))
        throw std::invalid_argument("censor: lifetimes must be positive");
    if (!std::is_sorted(complete.begin(), complete.end()))
        throw std::invalid_argument("censor: sample must be sorted ascending");

    HybridCensoredSample out;
    out.scheme = scheme;
    if (complete[scheme.r - 1] < scheme.x0) {
        // Quota reached first: stop at the r-th failure.
        out.d = scheme.r;
        out.c = complete[scheme.r - 1];
    } else {
        // Time bound reached first; ties at x0 count as censored.
        out.d = static_cast<std::size_t>(
            std::lower_bound(complete.begin(), complete.end(), scheme.x0) -
            complete.begin());
        out.c = scheme.x0;
    }
    out.observed.assign(complete.begin(),
                        complete.begin() + static_cast<std::ptrdiff_t>(out.d));
    return out;
}

std::pair<std::size_t, double> effective_threshold(const HybridCensoredSample& sample) {
    return {sample.d, sample.c};
}

} // namespace gwq
