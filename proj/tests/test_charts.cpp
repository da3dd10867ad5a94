#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwq/censoring.hpp"
#include "gwq/charts.hpp"
#include "gwq/distribution.hpp"
#include "gwq/estimation.hpp"
#include "gwq/rng.hpp"
#include "gwq/special.hpp"

using namespace gwq;

namespace {

std::vector<HybridCensoredSample> make_phase1(const GwParams& truth,
                                              const CensoringScheme& scheme,
                                              std::size_t k, std::uint64_t seed) {
    const RngStream base(seed);
    std::vector<HybridCensoredSample> out;
    for (std::size_t j = 0; j < k; ++j) {
        RngStream sub = base.substream(j);
        out.push_back(censor(sample(truth, scheme.n, sub), scheme));
    }
    return out;
}

ChartConfig small_config() {
    ChartConfig cc;
    cc.p = 0.5;
    cc.nu = 0.02;
    cc.k = 6;
    cc.m = 25;
    cc.scheme = CensoringScheme::hybrid(25, 15, 8.0);
    cc.B = 400;
    cc.seed = 11;
    return cc;
}

} // namespace

TEST_SUITE("charts") {

TEST_CASE("sample quantile worked examples") {
    CHECK(empirical_quantile({10, 20, 30, 40}, 0.25) ==
          doctest::Approx(14.1666666667).epsilon(1e-9));
    CHECK(empirical_quantile({1, 2}, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(empirical_quantile({5}, 0.7) == doctest::Approx(5.0));
    // Extremes clamp to the order statistics.
    CHECK(empirical_quantile({3, 1, 2}, 1e-9) == doctest::Approx(1.0));
    CHECK(empirical_quantile({3, 1, 2}, 1.0 - 1e-9) == doctest::Approx(3.0));
    // Median-unbiased default agrees with definition 8 requested explicitly.
    CHECK(empirical_quantile({4, 8, 1, 9, 3}, 0.3) ==
          doctest::Approx(empirical_quantile({4, 8, 1, 9, 3}, 0.3, 8)));
    // The supported family disagrees somewhere.
    const std::vector<double> xs{2, 4, 6, 8, 10};
    bool all_equal = true;
    const double ref = empirical_quantile(xs, 0.25, 4);
    for (int def = 5; def <= 9; ++def)
        all_equal = all_equal && empirical_quantile(xs, 0.25, def) == ref;
    CHECK_FALSE(all_equal);
    // Definition 7 at the median of 1..9 is the middle value.
    CHECK(empirical_quantile({1, 2, 3, 4, 5, 6, 7, 8, 9}, 0.5, 7) ==
          doctest::Approx(5.0));

    // q = 0 and q = 1 are legal and land on the extreme order statistics.
    CHECK(empirical_quantile({3, 1, 2}, 0.0) == doctest::Approx(1.0));
    CHECK(empirical_quantile({3, 1, 2}, 1.0) == doctest::Approx(3.0));

    CHECK_THROWS_AS(empirical_quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(empirical_quantile({1.0}, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(empirical_quantile({1.0}, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(empirical_quantile({1.0}, 0.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(empirical_quantile({1.0}, 0.5, 10), std::invalid_argument);
}

TEST_CASE("bootstrap chart has ordered limits bracketing the plug-in quantile") {
    const GwParams truth(0.51, 11.1);
    const ChartConfig cc = small_config();
    const auto phase1 = make_phase1(truth, cc.scheme, cc.k, 5);
    const ControlChart chart = build_bhc(phase1, cc);

    CHECK(chart.kind == ChartKind::BHC);
    CHECK(chart.lcl < chart.cl);
    CHECK(chart.cl < chart.ucl);
    CHECK(chart.phase1_fit.converged);
    CHECK(chart.config.B == 400);
    // The centre line sits near the plug-in estimate of the monitored quantile.
    const double xi = quantile(cc.p, chart.phase1_fit.params);
    CHECK(chart.cl == doctest::Approx(xi).epsilon(0.15));
    CHECK(chart.lcl < xi);
    CHECK(chart.ucl > xi);
}

TEST_CASE("bootstrap chart is deterministic in the seed") {
    const GwParams truth(0.51, 11.1);
    const ChartConfig cc = small_config();
    const auto phase1 = make_phase1(truth, cc.scheme, cc.k, 5);

    const ControlChart a = build_bhc(phase1, cc);
    const ControlChart b = build_bhc(phase1, cc);
    CHECK(chart_to_json(a) == chart_to_json(b));

    ChartConfig other = cc;
    other.seed = 12;
    const ControlChart c = build_bhc(phase1, other);
    CHECK(a.lcl != c.lcl);
}

TEST_CASE("bootstrap chart at known parameters skips the phase-I fit") {
    const GwParams ic(0.51, 11.1);
    const ChartConfig cc = small_config();
    const ControlChart chart = build_bhc_at(ic, cc);

    CHECK(chart.phase1_fit.params.theta == ic.theta);
    CHECK(chart.phase1_fit.params.alpha == ic.alpha);
    CHECK(std::isnan(chart.phase1_fit.loglik));
    CHECK(chart.phase1_fit.n_total == 0);
    CHECK(chart.lcl < chart.cl);
    CHECK(chart.cl < chart.ucl);

    const ControlChart again = build_bhc_at(ic, cc);
    CHECK(chart_to_json(chart) == chart_to_json(again));

    // The centre line is the median of the refitted-quantile law: estimate
    // that law directly with independent draws and compare.
    std::vector<double> direct;
    const RngStream rng(404);
    for (int j = 0; j < 300; ++j) {
        RngStream sub = rng.substream(j);
        const auto cs = censor(sample(ic, cc.m, sub), cc.scheme);
        if (cs.d < 2) continue;
        const FitResult fr = em_fit(cs);
        if (!fr.converged) continue;
        direct.push_back(quantile(cc.p, fr.params));
    }
    REQUIRE(direct.size() > 250);
    const double med = empirical_quantile(direct, 0.5);
    CHECK(chart.cl == doctest::Approx(med).epsilon(0.1));
}

TEST_CASE("a single bootstrap draw degenerates to equal limits") {
    ChartConfig cc = small_config();
    cc.B = 1;
    const ControlChart chart = build_bhc_at(GwParams(0.51, 11.1), cc);
    CHECK(chart.lcl == chart.cl);
    CHECK(chart.cl == chart.ucl);
}

TEST_CASE("shewhart chart centres on the mean subgroup estimate") {
    const GwParams truth(0.51, 11.1);
    ChartConfig cc = small_config();
    cc.nu = 0.0027;
    const auto phase1 = make_phase1(truth, cc.scheme, cc.k, 7);
    const ControlChart chart = build_shc(phase1, cc);

    CHECK(chart.kind == ChartKind::SHC);
    // Limits are symmetric about the centre line.
    CHECK(chart.ucl - chart.cl == doctest::Approx(chart.cl - chart.lcl).epsilon(1e-9));
    // Centre line: mean of per-subgroup plug-in estimates, refit directly.
    double acc = 0.0;
    for (const auto& s : phase1)
        acc += quantile(cc.p, em_fit(s).params);
    acc /= static_cast<double>(phase1.size());
    CHECK(chart.cl == doctest::Approx(acc).epsilon(1e-6));
    // Widening the false-alarm rate narrows the band.
    ChartConfig wide = cc;
    wide.nu = 0.05;
    const ControlChart narrow = build_shc(phase1, wide);
    CHECK(narrow.ucl - narrow.lcl < chart.ucl - chart.lcl);
    CHECK(narrow.cl == doctest::Approx(chart.cl).epsilon(1e-12));
}

TEST_CASE("monitor classifies subgroups against the limits") {
    // Chart at known parameters: phase-II draws at the same parameters then
    // follow exactly the bootstrap law the limits were cut from, so the
    // in-control rate is pinned near 1 - nu by construction.
    const GwParams truth(0.51, 11.1);
    const ChartConfig cc = small_config();
    const ControlChart chart = build_bhc_at(truth, cc);
    const RngStream rng(99);

    SUBCASE("in-control data mostly stays in control") {
        int in = 0, total = 0;
        for (int j = 0; j < 40; ++j) {
            RngStream sub = rng.substream(j);
            const auto cs = censor(sample(truth, cc.m, sub), cc.scheme);
            const MonitorVerdict v = monitor(chart, cs);
            if (v.signal == Signal::Unassessable) continue;
            ++total;
            in += (v.signal == Signal::InControl);
            CHECK(std::isfinite(v.statistic));
        }
        REQUIRE(total > 30);
        CHECK(static_cast<double>(in) / total > 0.85);
    }
    SUBCASE("a sharp shape drop pushes the monitored quantile high") {
        const GwParams shifted(truth.theta * 0.7, truth.alpha);
        int high = 0, total = 0;
        for (int j = 0; j < 40; ++j) {
            RngStream sub = rng.substream(1000 + j);
            const auto cs = censor(sample(shifted, cc.m, sub), cc.scheme);
            const MonitorVerdict v = monitor(chart, cs);
            if (v.signal == Signal::Unassessable) continue;
            ++total;
            high += (v.signal == Signal::OutOfControlHigh);
        }
        REQUIRE(total > 30);
        CHECK(static_cast<double>(high) / total > 0.5);
    }
    SUBCASE("a sharp scale drop in alpha signals low") {
        const GwParams shifted(truth.theta, truth.alpha * 0.3);
        int low = 0, total = 0;
        for (int j = 0; j < 40; ++j) {
            RngStream sub = rng.substream(2000 + j);
            const auto cs = censor(sample(shifted, cc.m, sub), cc.scheme);
            const MonitorVerdict v = monitor(chart, cs);
            if (v.signal == Signal::Unassessable) continue;
            ++total;
            low += (v.signal == Signal::OutOfControlLow);
        }
        REQUIRE(total > 30);
        CHECK(static_cast<double>(low) / total > 0.5);
    }
    SUBCASE("fewer than two failures is unassessable") {
        HybridCensoredSample bad;
        bad.observed = {0.1};
        bad.d = 1;
        bad.c = 0.2;
        bad.scheme = cc.scheme;
        const MonitorVerdict v = monitor(chart, bad);
        CHECK(v.signal == Signal::Unassessable);
        CHECK(std::isnan(v.statistic));
    }
}

TEST_CASE("chart json round trip") {
    const GwParams truth(0.51, 11.1);
    const ChartConfig cc = small_config();
    const auto phase1 = make_phase1(truth, cc.scheme, cc.k, 5);
    for (const ControlChart& chart :
         {build_bhc(phase1, cc), build_shc(phase1, cc)}) {
        const std::string text = chart_to_json(chart);
        const ControlChart back = chart_from_json(text);
        CHECK(back.kind == chart.kind);
        CHECK(back.lcl == doctest::Approx(chart.lcl).epsilon(1e-12));
        CHECK(back.cl == doctest::Approx(chart.cl).epsilon(1e-12));
        CHECK(back.ucl == doctest::Approx(chart.ucl).epsilon(1e-12));
        CHECK(back.config.p == chart.config.p);
        CHECK(back.config.nu == chart.config.nu);
        CHECK(back.config.B == chart.config.B);
        CHECK(back.config.seed == chart.config.seed);
        CHECK(back.config.scheme.n == chart.config.scheme.n);
        CHECK(back.config.scheme.r == chart.config.scheme.r);
        CHECK(back.config.scheme.x0 == chart.config.scheme.x0);
        CHECK(back.phase1_fit.params.theta ==
              doctest::Approx(chart.phase1_fit.params.theta).epsilon(1e-12));
        // A round-tripped chart still monitors.
        RngStream rng(4);
        const auto cs = censor(sample(truth, cc.m, rng), cc.scheme);
        const MonitorVerdict v1 = monitor(chart, cs);
        const MonitorVerdict v2 = monitor(back, cs);
        CHECK(v1.signal == v2.signal);
    }
    CHECK_THROWS_AS(chart_from_json("{not json"), std::invalid_argument);
    CHECK_THROWS_AS(chart_from_json("{}"), std::invalid_argument);
}

TEST_CASE("signal names are stable identifiers") {
    CHECK(std::strcmp(signal_name(Signal::InControl), "in_control") == 0);
    CHECK(std::strcmp(signal_name(Signal::OutOfControlLow), "ooc_low") == 0);
    CHECK(std::strcmp(signal_name(Signal::OutOfControlHigh), "ooc_high") == 0);
    CHECK(std::strcmp(signal_name(Signal::Unassessable), "unassessable") == 0);
}

TEST_CASE("configuration is validated") {
    const GwParams truth(0.51, 11.1);
    const ChartConfig good = small_config();
    const auto phase1 = make_phase1(truth, good.scheme, good.k, 5);

    ChartConfig bad = good;
    bad.p = 1.0;
    CHECK_THROWS_AS(build_bhc(phase1, bad), std::invalid_argument);
    bad = good;
    bad.nu = 0.0;
    CHECK_THROWS_AS(build_bhc(phase1, bad), std::invalid_argument);
    bad = good;
    bad.m = 10;  // disagrees with scheme.n
    CHECK_THROWS_AS(build_bhc(phase1, bad), std::invalid_argument);
    bad = good;
    bad.B = 0;
    CHECK_THROWS_AS(build_bhc(phase1, bad), std::invalid_argument);
    CHECK_THROWS_AS(build_bhc_at(truth, bad), std::invalid_argument);
    CHECK_THROWS_AS(build_bhc({}, good), std::invalid_argument);
}

TEST_CASE("published chart limits at reduced bootstrap scale") {
    // Five round-robin subgroups of the benchmark sample; at B=2,000 the
    // bootstrap limits should already be in the neighbourhood of the
    // published full-scale values (3.742, 6.524, 10.564) for the 0.9
    // quantile of the remission-time fit.
    std::vector<double> all;
    {
        std::ifstream in(std::string(GWQ_DATA_DIR) + "/bladder_cancer_125.csv");
        REQUIRE(in.good());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line))
            if (!line.empty()) all.push_back(std::stod(line));
        std::sort(all.begin(), all.end());
    }
    REQUIRE(all.size() == 125);
    std::vector<HybridCensoredSample> groups;
    const CensoringScheme scheme = CensoringScheme::hybrid(25, 15, 7.6);
    for (int g = 0; g < 5; ++g) {
        std::vector<double> sub;
        for (std::size_t i = g; i < all.size(); i += 5) sub.push_back(all[i]);
        groups.push_back(censor(sub, scheme));
    }

    ChartConfig cc;
    cc.p = 0.9;
    cc.nu = 0.0027;
    cc.k = 5;
    cc.m = 25;
    cc.scheme = scheme;
    cc.B = 2000;
    cc.seed = 3;

    const ControlChart bhc = build_bhc(groups, cc);
    CHECK(bhc.phase1_fit.params.theta == doctest::Approx(0.63326).epsilon(2e-3));
    CHECK(bhc.phase1_fit.params.alpha == doctest::Approx(8.95994).epsilon(2e-3));
    CHECK(bhc.lcl == doctest::Approx(3.742).epsilon(0.12));
    CHECK(bhc.cl == doctest::Approx(6.524).epsilon(0.08));
    CHECK(bhc.ucl == doctest::Approx(10.564).epsilon(0.12));

    ChartConfig sc = cc;
    sc.p = 0.9;
    const ControlChart shc = build_shc(groups, sc);
    CHECK(shc.lcl == doctest::Approx(8.802).epsilon(0.03));
    CHECK(shc.cl == doctest::Approx(10.333).epsilon(0.03));
    CHECK(shc.ucl == doctest::Approx(11.864).epsilon(0.03));
}

} // TEST_SUITE
