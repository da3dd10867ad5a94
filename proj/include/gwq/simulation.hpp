#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gwq/charts.hpp"
#include "gwq/distribution.hpp"
#include "gwq/rng.hpp"

namespace gwq {

// How the per-replication chart is constructed.
//
// Fitted (default): regenerate k phase-I subgroups at true_params, fit, and
// bootstrap at the pooled fit. The phase-II in-control generator is then the
// chart's own reference (see estimate_arl below), which keeps the bootstrap
// world and the monitored world identical and the false-alarm rate
// calibrated while still exercising the phase-I estimation step.
//
// Known: skip phase-I data entirely and bootstrap directly at true_params.
// Same calibration with the estimation layer removed; cheaper, and useful
// when the in-control parameters are taken as given.
enum class Phase1Mode { Known, Fitted };

struct SimDesign {
    GwParams true_params;            // in-control generating parameters
    // Phase-II shift applied to the in-control reference (the pooled
    // phase-I fit for BHC in Fitted mode, true_params otherwise).
    // Additive by default: theta+delta_theta. With relative_shift the
    // deltas are fractions: theta*(1+delta_theta), so -0.04 means a 4%
    // decrease of whatever the reference happens to be.
    double delta_theta = 0.0;
    double delta_alpha = 0.0;
    bool relative_shift = false;
    ChartKind chart_kind = ChartKind::BHC;
    ChartConfig chart_config;        // scheme, p, nu, k, m, B; seed unused here
    std::size_t replications = 1000;
    std::size_t run_length_cap = 0;  // 0 -> 100/nu
    std::uint64_t seed = 0;
    bool fixed_chart = false;        // build one chart and reuse across replications
    Phase1Mode phase1_mode = Phase1Mode::Fitted;
    int threads = 1;

    explicit SimDesign(const GwParams& truth) : true_params(truth) {}
};

struct RunLength {
    std::size_t length = 0;
    bool capped = false;
};

struct RunLengthSummary {
    double arl = 0.0;
    double sdrl = 0.0;
    std::size_t replications = 0;
    std::size_t censored_runs = 0;  // runs that hit the cap
    // Per-replication phase-I averages, for reporting.
    double mean_theta_hat = 0.0;
    double mean_alpha_hat = 0.0;
    double mean_lcl = 0.0;
    double mean_ucl = 0.0;
};

// The eight benchmark subgroup censoring designs (m, r, x0).
std::vector<CensoringScheme> scheme_catalog();

// First 1-based index of a signaling subgroup in a stream of subgroups
// drawn at ooc_params and censored under scheme, or cap with capped=true.
// Unassessable subgroups consume an index without signaling.
RunLength run_length(const ControlChart& chart, const GwParams& ooc_params,
                     const CensoringScheme& scheme, RngStream& rng,
                     std::size_t cap, const FitConfig& fit_config = {});

// Monte-Carlo run-length study: per replication, rebuild the chart (per
// design.phase1_mode) and measure one run length. The phase-II generator is
// the chart's in-control reference with the design shift applied: for BHC
// that reference is the bootstrap generator itself (the pooled phase-I fit,
// or true_params in Known mode), so a zero shift reproduces the nominal
// false-alarm rate exactly; for SHC it is true_params, whose refit
// distribution the center line estimates. Summaries are deterministic given
// design.seed, for any thread count (per-replication substreams).
RunLengthSummary estimate_arl(const SimDesign& design);

// CSV report, one row per design:
// scheme_id,m,r,x0,p,nu,delta_theta,delta_alpha,lcl,ucl,arl,sdrl,reps,capped
std::string table1_report(const std::vector<SimDesign>& designs);

// JSON echo of a design, for provenance alongside report CSVs.
std::string design_to_json(const SimDesign& design);

} // namespace gwq
