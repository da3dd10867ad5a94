#include "gwq/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "json.hpp"

namespace gwq {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kMaxBuildAttempts = 32;

struct RepRecord {
    double rl = 0.0;
    bool capped = false;
    double theta = 0.0, alpha = 0.0, lcl = 0.0, ucl = 0.0;
};

// Substream layout: each (replication, attempt) pair owns four ids, so
// results are independent of thread count and execution order.
std::uint64_t slot_id(std::size_t rep, std::size_t attempt, std::uint64_t lane) {
    return (static_cast<std::uint64_t>(rep) * kMaxBuildAttempts + attempt) * 4 + lane;
}

ControlChart build_phase1_chart(const SimDesign& design, const RngStream& base,
                                std::size_t rep, const FitConfig& fc,
                                RngStream* phase2_out) {
    const ChartConfig& cc = design.chart_config;
    if (design.chart_kind == ChartKind::BHC &&
        design.phase1_mode == Phase1Mode::Known) {
        // Calibrated benchmark: bootstrap directly at the design parameters.
        ChartConfig local = cc;
        local.seed = base.substream(slot_id(rep, 0, 1)).seed();
        if (phase2_out)
            *phase2_out = base.substream(slot_id(rep, 0, 2));
        return build_bhc_at(design.true_params, local, fc);
    }
    for (std::size_t attempt = 0; attempt < kMaxBuildAttempts; ++attempt) {
        RngStream p1 = base.substream(slot_id(rep, attempt, 0));
        ChartConfig local = cc;
        local.seed = base.substream(slot_id(rep, attempt, 1)).seed();
        if (phase2_out)
            *phase2_out = base.substream(slot_id(rep, attempt, 2));
        std::vector<HybridCensoredSample> groups;
        groups.reserve(cc.k);
        for (std::size_t j = 0; j < cc.k; ++j)
            groups.push_back(censor(sample(design.true_params, cc.m, p1), cc.scheme));
        try {
            return (design.chart_kind == ChartKind::BHC)
                       ? build_bhc(groups, local, fc)
                       : build_shc(groups, local, fc);
        } catch (const FitError&) {
            // Redraw phase I deterministically and try again.
        }
    }
    throw FitError("estimate_arl: phase-I chart construction kept failing");
}

} // namespace

std::vector<CensoringScheme> scheme_catalog() {
    return {CensoringScheme::hybrid(25, 15, 55.0), CensoringScheme::hybrid(25, 20, 55.0),
            CensoringScheme::hybrid(40, 30, 55.0), CensoringScheme::hybrid(40, 35, 55.0),
            CensoringScheme::hybrid(25, 15, 70.0), CensoringScheme::hybrid(25, 20, 70.0),
            CensoringScheme::hybrid(40, 30, 70.0), CensoringScheme::hybrid(40, 35, 70.0)};
}

RunLength run_length(const ControlChart& chart, const GwParams& ooc_params,
                     const CensoringScheme& scheme, RngStream& rng,
                     std::size_t cap, const FitConfig& fit_config) {
    if (cap == 0)
        throw std::invalid_argument("run_length: cap must be positive");
    for (std::size_t j = 1; j <= cap; ++j) {
        const HybridCensoredSample cs = censor(sample(ooc_params, scheme.n, rng), scheme);
        const MonitorVerdict v = monitor(chart, cs, fit_config);
        if (v.signal == Signal::OutOfControlLow || v.signal == Signal::OutOfControlHigh)
            return {j, false};
    }
    return {cap, true};
}

RunLengthSummary estimate_arl(const SimDesign& design) {
    if (design.replications < 1)
        throw std::invalid_argument("estimate_arl: needs at least one replication");
    if (design.chart_config.k < 1)
        throw std::invalid_argument("estimate_arl: chart_config.k must be positive");
    design.chart_config.scheme.validate();
    // Early validity probe at the design parameters; the per-replication
    // shift is applied to the chart's own reference below.
    const auto shift = [&design](const GwParams& ref) {
        if (design.relative_shift)
            return GwParams(ref.theta * (1.0 + design.delta_theta),
                            ref.alpha * (1.0 + design.delta_alpha));
        return GwParams(ref.theta + design.delta_theta,
                        ref.alpha + design.delta_alpha);
    };
    (void)shift(design.true_params);

    const std::size_t cap =
        design.run_length_cap > 0
            ? design.run_length_cap
            : static_cast<std::size_t>(std::ceil(100.0 / design.chart_config.nu));
    const std::size_t reps = design.replications;
    const FitConfig fc;
    const RngStream base(design.seed);

    std::vector<RepRecord> rec(reps);

    // Optional shared chart, built from the substream block just past the
    // per-replication ids.
    ControlChart* shared = nullptr;
    std::unique_ptr<ControlChart> shared_holder;
    if (design.fixed_chart) {
        shared_holder = std::make_unique<ControlChart>(
            build_phase1_chart(design, base, reps, fc, nullptr));
        shared = shared_holder.get();
    }

    const auto run_rep = [&](std::size_t rep) {
        RngStream phase2 = base.substream(slot_id(rep, 0, 2));
        const ControlChart* chart = shared;
        std::unique_ptr<ControlChart> own;
        if (!chart) {
            own = std::make_unique<ControlChart>(
                build_phase1_chart(design, base, rep, fc, &phase2));
            chart = own.get();
        }
        const GwParams& ref = (design.chart_kind == ChartKind::BHC)
                                  ? chart->phase1_fit.params
                                  : design.true_params;
        const GwParams ooc = shift(ref);
        const RunLength rl =
            run_length(*chart, ooc, design.chart_config.scheme, phase2, cap, fc);
        rec[rep] = {static_cast<double>(rl.length), rl.capped,
                    chart->phase1_fit.params.theta, chart->phase1_fit.params.alpha,
                    chart->lcl, chart->ucl};
    };

    const int threads = std::clamp(design.threads, 1, 64);
    if (threads == 1 || reps == 1) {
        for (std::size_t rep = 0; rep < reps; ++rep)
            run_rep(rep);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::mutex err_mutex;
        const std::size_t chunk = (reps + threads - 1) / static_cast<std::size_t>(threads);
        for (int t = 0; t < threads; ++t) {
            const std::size_t lo = static_cast<std::size_t>(t) * chunk;
            const std::size_t hi = std::min(reps, lo + chunk);
            if (lo >= hi)
                break;
            pool.emplace_back([&, lo, hi] {
                try {
                    for (std::size_t rep = lo; rep < hi; ++rep)
                        run_rep(rep);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool)
            th.join();
        if (first_error)
            std::rethrow_exception(first_error);
    }

    RunLengthSummary sum;
    sum.replications = reps;
    double mean = 0.0;
    for (const RepRecord& r : rec) {
        mean += r.rl;
        sum.censored_runs += r.capped ? 1 : 0;
        sum.mean_theta_hat += r.theta;
        sum.mean_alpha_hat += r.alpha;
        sum.mean_lcl += r.lcl;
        sum.mean_ucl += r.ucl;
    }
    const auto n = static_cast<double>(reps);
    mean /= n;
    sum.arl = mean;
    sum.mean_theta_hat /= n;
    sum.mean_alpha_hat /= n;
    sum.mean_lcl /= n;
    sum.mean_ucl /= n;
    if (reps > 1) {
        double ss = 0.0;
        for (const RepRecord& r : rec)
            ss += (r.rl - mean) * (r.rl - mean);
        sum.sdrl = std::sqrt(ss / (n - 1.0));
    }
    return sum;
}

namespace {

int catalog_id(const CensoringScheme& s) {
    const std::vector<CensoringScheme> cat = scheme_catalog();
    for (std::size_t i = 0; i < cat.size(); ++i) {
        if (cat[i].n == s.n && cat[i].r == s.r && cat[i].x0 == s.x0 &&
            cat[i].kind == s.kind)
            return static_cast<int>(i) + 1;
    }
    return 0;
}

void put_num(std::ostringstream& out, double v) {
    if (std::isfinite(v))
        out << std::setprecision(6) << v;
    else
        out << "inf";
}

} // namespace

std::string table1_report(const std::vector<SimDesign>& designs) {
    std::ostringstream out;
    out << "scheme_id,m,r,x0,p,nu,delta_theta,delta_alpha,lcl,ucl,arl,sdrl,reps,capped\n";
    for (const SimDesign& d : designs) {
        const RunLengthSummary s = estimate_arl(d);
        const CensoringScheme& sc = d.chart_config.scheme;
        out << catalog_id(sc) << ',' << sc.n << ',' << sc.r << ',';
        put_num(out, sc.x0);
        out << ',';
        put_num(out, d.chart_config.p);
        out << ',';
        put_num(out, d.chart_config.nu);
        out << ',';
        put_num(out, d.delta_theta);
        out << ',';
        put_num(out, d.delta_alpha);
        out << ',';
        put_num(out, s.mean_lcl);
        out << ',';
        put_num(out, s.mean_ucl);
        out << ',';
        put_num(out, s.arl);
        out << ',';
        put_num(out, s.sdrl);
        out << ',' << s.replications << ',' << s.censored_runs << '\n';
    }
    return out.str();
}

std::string design_to_json(const SimDesign& design) {
    ordered_json j;
    j["true_params"] = {{"theta", design.true_params.theta},
                        {"alpha", design.true_params.alpha}};
    j["delta_theta"] = design.delta_theta;
    j["delta_alpha"] = design.delta_alpha;
    j["relative_shift"] = design.relative_shift;
    j["chart_kind"] = (design.chart_kind == ChartKind::BHC) ? "BHC" : "SHC";
    ordered_json c;
    c["p"] = design.chart_config.p;
    c["nu"] = design.chart_config.nu;
    c["k"] = design.chart_config.k;
    c["m"] = design.chart_config.m;
    ordered_json s;
    s["n"] = design.chart_config.scheme.n;
    s["r"] = design.chart_config.scheme.r;
    if (std::isfinite(design.chart_config.scheme.x0))
        s["x0"] = design.chart_config.scheme.x0;
    else
        s["x0"] = "infinity";
    switch (design.chart_config.scheme.kind) {
    case CensorKind::Hybrid: s["kind"] = "hybrid"; break;
    case CensorKind::TypeI: s["kind"] = "type1"; break;
    default: s["kind"] = "type2"; break;
    }
    c["scheme"] = s;
    c["B"] = design.chart_config.B;
    c["hf_definition"] = design.chart_config.hf_definition;
    j["chart_config"] = c;
    j["replications"] = design.replications;
    j["run_length_cap"] = design.run_length_cap;
    j["seed"] = design.seed;
    j["fixed_chart"] = design.fixed_chart;
    j["phase1_mode"] = (design.phase1_mode == Phase1Mode::Known) ? "known" : "fitted";
    j["threads"] = design.threads;
    return j.dump(2);
}

} // namespace gwq
