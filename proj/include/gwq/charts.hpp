#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gwq/censoring.hpp"
#include "gwq/estimation.hpp"

namespace gwq {

enum class ChartKind { BHC, SHC };

struct ChartConfig {
    double p = 0.9;            // monitored quantile
    double nu = 0.0027;        // false alarm rate
    std::size_t k = 0;         // phase-I subgroups
    std::size_t m = 0;         // subgroup size
    CensoringScheme scheme;    // per-subgroup censoring design
    std::size_t B = 5000;      // bootstrap replications (BHC)
    std::uint64_t seed = 0;
    int hf_definition = 8;     // Hyndman-Fan sample-quantile definition (4..9)
};

struct ControlChart {
    ChartKind kind = ChartKind::BHC;
    double lcl = 0.0, cl = 0.0, ucl = 0.0;
    FitResult phase1_fit;
    ChartConfig config;
    std::size_t failed_refits = 0;  // bootstrap redraws caused by infeasible resamples
};

enum class Signal { InControl, OutOfControlLow, OutOfControlHigh, Unassessable };

struct MonitorVerdict {
    double statistic = 0.0;  // quantile estimate of the test subgroup (NaN if unassessable)
    Signal signal = Signal::InControl;
};

// Sample quantile by the Hyndman-Fan plotting-position family
// (definition 8, the median-unbiased recommendation, by default):
// h = (n + 1/3) q + 1/3 with linear interpolation, clamped at the extremes.
double empirical_quantile(std::vector<double> values, double q, int definition = 8);

// Bootstrap chart: fit the pooled phase-I samples, then B times draw a
// complete subgroup of size m at the fitted parameters, censor it under
// config.scheme, refit, and record the plug-in quantile estimate. LCL/UCL
// are the nu/2 and 1-nu/2 empirical quantiles of the B estimates and CL is
// their median. Infeasible resamples (fewer than two failures, or a refit
// that fails) are redrawn and counted in failed_refits. Deterministic given
// config.seed regardless of execution order.
ControlChart build_bhc(const std::vector<HybridCensoredSample>& phase1,
                       const ChartConfig& config, const FitConfig& fit_config = {});

// Bootstrap chart with the generating parameters taken as known: identical
// to build_bhc except the phase-I pooling and fit are skipped and the B
// subgroups are drawn directly at ic_params. This is the construction used
// by run-length benchmarks, where the in-control parameters are part of the
// design; the returned chart's phase1_fit carries ic_params with no data
// behind it (loglik is NaN, n_total is 0).
ControlChart build_bhc_at(const GwParams& ic_params, const ChartConfig& config,
                          const FitConfig& fit_config = {});

// Shewhart-type chart: CL is the mean over subgroups of the per-subgroup
// plug-in quantile estimates; the limits are CL +- z_{1-nu/2} * se, where
// se is the delta-method standard error at the pooled fit with the
// information of one subgroup of size m (see quantile_se).
ControlChart build_shc(const std::vector<HybridCensoredSample>& phase1,
                       const ChartConfig& config, const FitConfig& fit_config = {});

// Refit the test subgroup, compute its quantile estimate, and classify it
// against the limits. A refit failure yields Signal::Unassessable with a
// NaN statistic rather than a signal.
MonitorVerdict monitor(const ControlChart& chart, const HybridCensoredSample& test,
                       const FitConfig& fit_config = {});

// JSON round trip. The serialized shape is
// {kind, p, nu, scheme{n,r,x0,kind}, lcl, cl, ucl, theta_hat, alpha_hat, B, seed}.
std::string chart_to_json(const ControlChart& chart);
ControlChart chart_from_json(const std::string& text);

const char* signal_name(Signal s);

} // namespace gwq
