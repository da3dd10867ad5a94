#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace gwq {

enum class CensorKind { Hybrid, TypeI, TypeII };

// Hybrid censoring design: a life test on n units stops at min(X_{r:n}, x0).
// Type-I censoring is the special case r = n; type-II is x0 = +infinity.
struct CensoringScheme {
    std::size_t n = 0;
    std::size_t r = 0;
    double x0 = 0.0;
    CensorKind kind = CensorKind::Hybrid;

    static CensoringScheme hybrid(std::size_t n, std::size_t r, double x0);
    static CensoringScheme type_i(std::size_t n, double x0);
    static CensoringScheme type_ii(std::size_t n, std::size_t r);
    // Degenerate scheme observing every unit (r = n, x0 = +infinity).
    static CensoringScheme none(std::size_t n);

    void validate() const;
};

// Result of applying a scheme to a complete ordered sample: the d observed
// order statistics, the censoring threshold c actually in force, and the
// scheme. The remaining n - d units are right-censored at c. d may be 0
// (no failures before either bound); estimation refuses such samples.
struct HybridCensoredSample {
    std::vector<double> observed;
    std::size_t d = 0;
    double c = 0.0;
    CensoringScheme scheme;
};

// Case I (quota first): x_{r:n} < x0 -> d = r, c = x_{r:n}.
// Case II (time bound first): d = #{x_i < x0} (ties at x0 count as
// censored), c = x0. Input must be sorted ascending with length scheme.n.
HybridCensoredSample censor(const std::vector<double>& complete,
                            const CensoringScheme& scheme);

// The (d, c) pair the likelihood uses.
std::pair<std::size_t, double> effective_threshold(const HybridCensoredSample& sample);

} // namespace gwq
