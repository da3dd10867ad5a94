#include "gwq/charts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gwq/distribution.hpp"
#include "gwq/rng.hpp"
#include "gwq/special.hpp"
#include "gwq/information.hpp"

#include "json.hpp"

namespace gwq {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kMaxRedrawsPerSlot = 1024;

void validate_chart_config(const ChartConfig& config, std::size_t k_actual) {
    if (!(config.p > 0.0 && config.p < 1.0))
        throw std::invalid_argument("chart: p must be in (0,1)");
    if (!(config.nu > 0.0 && config.nu < 1.0))
        throw std::invalid_argument("chart: nu must be in (0,1)");
    if (config.m != config.scheme.n)
        throw std::invalid_argument("chart: m must equal scheme.n");
    if (config.k != 0 && config.k != k_actual)
        throw std::invalid_argument("chart: k does not match the phase-I subgroup count");
    if (k_actual == 0)
        throw std::invalid_argument("chart: no phase-I subgroups");
    config.scheme.validate();
}

const char* kind_name(CensorKind k) {
    switch (k) {
    case CensorKind::Hybrid: return "hybrid";
    case CensorKind::TypeI: return "type1";
    default: return "type2";
    }
}

CensorKind kind_from_name(const std::string& s) {
    if (s == "hybrid") return CensorKind::Hybrid;
    if (s == "type1") return CensorKind::TypeI;
    if (s == "type2") return CensorKind::TypeII;
    throw std::invalid_argument("chart json: unknown censoring kind '" + s + "'");
}

} // namespace

double empirical_quantile(std::vector<double> values, double q, int definition) {
    if (values.empty())
        throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("empirical_quantile: q must be in [0,1]");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    double h;
    switch (definition) {
    case 4: h = n * q; break;
    case 5: h = n * q + 0.5; break;
    case 6: h = (n + 1.0) * q; break;
    case 7: h = (n - 1.0) * q + 1.0; break;
    case 8: h = (n + 1.0 / 3.0) * q + 1.0 / 3.0; break;
    case 9: h = (n + 0.25) * q + 0.375; break;
    default:
        throw std::invalid_argument("empirical_quantile: definition must be in 4..9");
    }
    h = std::clamp(h, 1.0, n);
    const auto lo = static_cast<std::size_t>(h);  // 1-based
    const double frac = h - static_cast<double>(lo);
    if (lo >= values.size())
        return values.back();
    return values[lo - 1] + frac * (values[lo] - values[lo - 1]);
}

namespace {

// Shared bootstrap core: B refitted-quantile draws at `generator`, with
// per-slot deterministic redraws for infeasible resamples.
std::vector<double> bootstrap_quantiles(const GwParams& generator,
                                        const ChartConfig& config,
                                        const FitConfig& warm,
                                        std::size_t& failed) {
    const RngStream master(config.seed);
    std::vector<double> xs(config.B);
    failed = 0;
    for (std::size_t b = 0; b < config.B; ++b) {
        bool done = false;
        for (std::size_t attempt = 0; attempt < kMaxRedrawsPerSlot; ++attempt) {
            RngStream sub = master.substream(b * kMaxRedrawsPerSlot + attempt);
            const std::vector<double> complete = sample(generator, config.m, sub);
            const HybridCensoredSample cs = censor(complete, config.scheme);
            if (cs.d < 2) {
                ++failed;
                continue;
            }
            try {
                const FitResult fr = em_fit(cs, warm);
                if (!fr.converged) {
                    ++failed;
                    continue;
                }
                xs[b] = quantile(config.p, fr.params);
            } catch (const FitError&) {
                ++failed;
                continue;
            }
            done = true;
            break;
        }
        if (!done)
            throw FitError("build_bhc: a bootstrap slot exhausted its redraw budget");
    }
    return xs;
}

ControlChart finish_bhc(std::vector<double> xs, FitResult phase1_fit,
                        const ChartConfig& config, std::size_t failed) {
    return ControlChart{
        ChartKind::BHC,
        empirical_quantile(xs, config.nu / 2.0, config.hf_definition),
        empirical_quantile(xs, 0.5, config.hf_definition),
        empirical_quantile(std::move(xs), 1.0 - config.nu / 2.0, config.hf_definition),
        std::move(phase1_fit),
        config,
        failed};
}

} // namespace

ControlChart build_bhc(const std::vector<HybridCensoredSample>& phase1,
                       const ChartConfig& config, const FitConfig& fit_config) {
    validate_chart_config(config, phase1.size());
    if (config.B < 1)
        throw std::invalid_argument("build_bhc: B must be positive");

    FitResult pooled = fit_pooled(phase1, fit_config);
    if (!pooled.converged)
        throw FitError("build_bhc: phase-I pooled fit did not converge");
    FitConfig warm = fit_config;
    warm.init = pooled.params;

    std::size_t failed = 0;
    std::vector<double> xs = bootstrap_quantiles(pooled.params, config, warm, failed);
    return finish_bhc(std::move(xs), std::move(pooled), config, failed);
}

ControlChart build_bhc_at(const GwParams& ic_params, const ChartConfig& config,
                          const FitConfig& fit_config) {
    if (!(config.p > 0.0 && config.p < 1.0))
        throw std::invalid_argument("chart: p must be in (0,1)");
    if (!(config.nu > 0.0 && config.nu < 1.0))
        throw std::invalid_argument("chart: nu must be in (0,1)");
    if (config.m != config.scheme.n)
        throw std::invalid_argument("chart: m must equal scheme.n");
    config.scheme.validate();
    if (config.B < 1)
        throw std::invalid_argument("build_bhc_at: B must be positive");

    FitConfig warm = fit_config;
    warm.init = ic_params;
    FitResult known{ic_params,
                    std::numeric_limits<double>::quiet_NaN(),
                    0,
                    true,
                    {},
                    config.scheme,
                    0,
                    0};

    std::size_t failed = 0;
    std::vector<double> xs = bootstrap_quantiles(ic_params, config, warm, failed);
    return finish_bhc(std::move(xs), std::move(known), config, failed);
}

ControlChart build_shc(const std::vector<HybridCensoredSample>& phase1,
                       const ChartConfig& config, const FitConfig& fit_config) {
    validate_chart_config(config, phase1.size());

    FitResult pooled = fit_pooled(phase1, fit_config);
    if (!pooled.converged)
        throw FitError("build_shc: phase-I pooled fit did not converge");

    double cl = 0.0;
    for (const HybridCensoredSample& sub : phase1) {
        const FitResult fr = em_fit(sub, fit_config);
        if (!fr.converged)
            throw FitError("build_shc: a phase-I subgroup fit did not converge");
        cl += quantile(config.p, fr.params);
    }
    cl /= static_cast<double>(phase1.size());

    const double se = quantile_se(pooled, config.p, config.m, fit_config.quad_tol);
    const double z = normal_quantile(1.0 - config.nu / 2.0);
    ControlChart chart{ChartKind::SHC, cl - z * se, cl, cl + z * se,
                       std::move(pooled), config, 0};
    return chart;
}

MonitorVerdict monitor(const ControlChart& chart, const HybridCensoredSample& test,
                       const FitConfig& fit_config) {
    MonitorVerdict v;
    if (test.d < 2) {
        v.statistic = std::numeric_limits<double>::quiet_NaN();
        v.signal = Signal::Unassessable;
        return v;
    }
    FitConfig warm = fit_config;
    warm.init = chart.phase1_fit.params;
    try {
        const FitResult fr = em_fit(test, warm);
        if (!fr.converged)
            throw FitError("monitor: refit did not converge");
        v.statistic = quantile(chart.config.p, fr.params);
    } catch (const FitError&) {
        v.statistic = std::numeric_limits<double>::quiet_NaN();
        v.signal = Signal::Unassessable;
        return v;
    }
    if (v.statistic > chart.ucl)
        v.signal = Signal::OutOfControlHigh;
    else if (v.statistic < chart.lcl)
        v.signal = Signal::OutOfControlLow;
    else
        v.signal = Signal::InControl;
    return v;
}

std::string chart_to_json(const ControlChart& chart) {
    ordered_json j;
    j["kind"] = (chart.kind == ChartKind::BHC) ? "BHC" : "SHC";
    j["p"] = chart.config.p;
    j["nu"] = chart.config.nu;
    ordered_json s;
    s["n"] = chart.config.scheme.n;
    s["r"] = chart.config.scheme.r;
    if (std::isfinite(chart.config.scheme.x0))
        s["x0"] = chart.config.scheme.x0;
    else
        s["x0"] = "infinity";
    s["kind"] = kind_name(chart.config.scheme.kind);
    j["scheme"] = s;
    j["lcl"] = chart.lcl;
    j["cl"] = chart.cl;
    j["ucl"] = chart.ucl;
    j["theta_hat"] = chart.phase1_fit.params.theta;
    j["alpha_hat"] = chart.phase1_fit.params.alpha;
    j["B"] = chart.config.B;
    j["seed"] = chart.config.seed;
    return j.dump(2);
}

ControlChart chart_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(std::string("chart json: parse failure: ") + e.what());
    }
    try {
        const std::string kind_s = j.at("kind").get<std::string>();
        ChartKind kind;
        if (kind_s == "BHC")
            kind = ChartKind::BHC;
        else if (kind_s == "SHC")
            kind = ChartKind::SHC;
        else
            throw std::invalid_argument("chart json: unknown chart kind '" + kind_s + "'");

        const ordered_json& s = j.at("scheme");
        CensoringScheme scheme;
        scheme.n = s.at("n").get<std::size_t>();
        scheme.r = s.at("r").get<std::size_t>();
        const ordered_json& x0 = s.at("x0");
        scheme.x0 = x0.is_string() ? std::numeric_limits<double>::infinity()
                                   : x0.get<double>();
        scheme.kind = kind_from_name(s.at("kind").get<std::string>());
        scheme.validate();

        ChartConfig config;
        config.p = j.at("p").get<double>();
        config.nu = j.at("nu").get<double>();
        config.k = 0;
        config.m = scheme.n;
        config.scheme = scheme;
        config.B = j.at("B").get<std::size_t>();
        config.seed = j.at("seed").get<std::uint64_t>();

        FitResult fit{GwParams(j.at("theta_hat").get<double>(),
                               j.at("alpha_hat").get<double>()),
                      std::numeric_limits<double>::quiet_NaN(),
                      0,
                      true,
                      {},
                      scheme,
                      scheme.n,
                      0};
        return ControlChart{kind,
                            j.at("lcl").get<double>(),
                            j.at("cl").get<double>(),
                            j.at("ucl").get<double>(),
                            std::move(fit),
                            config,
                            0};
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(std::string("chart json: missing or mistyped field: ") +
                                    e.what());
    }
}

const char* signal_name(Signal s) {
    switch (s) {
    case Signal::InControl: return "in_control";
    case Signal::OutOfControlLow: return "ooc_low";
    case Signal::OutOfControlHigh: return "ooc_high";
    default: return "unassessable";
    }
}

} // namespace gwq
