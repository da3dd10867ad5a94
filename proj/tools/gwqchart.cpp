#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gwq/charts.hpp"
#include "gwq/distribution.hpp"
#include "gwq/estimation.hpp"
#include "gwq/simulation.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitSignal = 3;  // monitor only: at least one out-of-control verdict

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt6(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Lifetime files: one or more comma-separated numbers per line; blank lines
// and a single non-numeric header line are tolerated.
std::vector<double> read_lifetimes(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        std::stringstream ss(line);
        std::string tok;
        bool any = false;
        std::vector<double> row;
        bool bad = false;
        while (std::getline(ss, tok, ',')) {
            const auto b = tok.find_first_not_of(" \t");
            if (b == std::string::npos)
                continue;
            const auto e = tok.find_last_not_of(" \t");
            tok = tok.substr(b, e - b + 1);
            any = true;
            try {
                std::size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size())
                    throw std::invalid_argument(tok);
                row.push_back(v);
            } catch (const std::exception&) {
                bad = true;
                break;
            }
        }
        if (!any)
            continue;
        if (bad) {
            if (header_allowed && out.empty()) {
                header_allowed = false;
                continue;
            }
            throw InputError(path + ":" + std::to_string(lineno) + ": malformed value");
        }
        header_allowed = false;
        for (const double v : row) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw InputError(path + ":" + std::to_string(lineno) +
                                 ": lifetimes must be positive finite");
            out.push_back(v);
        }
    }
    if (out.size() < 2)
        throw InputError(path + ": needs at least two lifetimes");
    return out;
}

gwq::CensoringScheme make_scheme(const std::string& censoring, std::size_t n,
                                 std::size_t r, bool r_given, double x0,
                                 bool x0_given) {
    using gwq::CensoringScheme;
    if (censoring == "none") {
        if (r_given || x0_given)
            throw InputError("--censoring none takes neither --r nor --x0");
        return CensoringScheme::none(n);
    }
    if (censoring == "hybrid") {
        if (!r_given || !x0_given)
            throw InputError("--censoring hybrid needs --r and --x0");
        return CensoringScheme::hybrid(n, r, x0);
    }
    if (censoring == "type1") {
        if (!x0_given || r_given)
            throw InputError("--censoring type1 needs --x0 (and no --r)");
        return CensoringScheme::type_i(n, x0);
    }
    if (censoring == "type2") {
        if (!r_given || x0_given)
            throw InputError("--censoring type2 needs --r (and no --x0)");
        return CensoringScheme::type_ii(n, r);
    }
    throw InputError("unknown censoring kind '" + censoring + "'");
}

// Deterministic phase-I layout: sort the pooled data ascending and deal it
// round-robin into k subgroups, so subgroup j holds every k-th order
// statistic starting at the j-th.
std::vector<std::vector<double>> round_robin_split(std::vector<double> data,
                                                   std::size_t k) {
    std::sort(data.begin(), data.end());
    std::vector<std::vector<double>> groups(k);
    const std::size_t m = data.size() / k;
    for (auto& g : groups)
        g.reserve(m);
    for (std::size_t i = 0; i < data.size(); ++i)
        groups[i % k].push_back(data[i]);
    return groups;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path + "'");
    out << text;
    if (!text.empty() && text.back() != '\n')
        out << '\n';
}

// ---------------------------------------------------------------- fit ----

struct FitArgs {
    std::string file;
    std::string censoring = "none";
    std::size_t n = 0;
    std::size_t r = 0;
    double x0 = 0.0;
    bool r_given = false, x0_given = false, n_given = false;
    double init_theta = 0.0, init_alpha = 0.0;
    bool init_given = false;
    gwq::FitConfig config;
    std::string out_json;
};

int cmd_fit(const FitArgs& a) {
    std::vector<double> data = read_lifetimes(a.file);
    std::sort(data.begin(), data.end());
    if (a.n_given && a.n != data.size())
        throw InputError("--n does not match the file's row count");
    const gwq::CensoringScheme scheme =
        make_scheme(a.censoring, data.size(), a.r, a.r_given, a.x0, a.x0_given);
    const gwq::HybridCensoredSample cs = gwq::censor(data, scheme);

    gwq::FitConfig fc = a.config;
    if (a.init_given)
        fc.init = gwq::GwParams(a.init_theta, a.init_alpha);

    gwq::FitResult fit = gwq::em_fit(cs, fc);
    const double ks = gwq::ks_statistic(data, fit.params);

    std::cout << "theta_hat " << fmt6(fit.params.theta) << '\n'
              << "alpha_hat " << fmt6(fit.params.alpha) << '\n'
              << "loglik " << fmt6(fit.loglik) << '\n'
              << "iterations " << fit.iterations << '\n'
              << "converged " << (fit.converged ? "yes" : "no") << '\n'
              << "ks " << fmt6(ks) << '\n'
              << "d " << cs.d << '\n'
              << "c " << fmt6(cs.c) << '\n';

    if (!a.out_json.empty()) {
        ordered_json j;
        j["theta_hat"] = fit.params.theta;
        j["alpha_hat"] = fit.params.alpha;
        j["loglik"] = fit.loglik;
        j["iterations"] = fit.iterations;
        j["converged"] = fit.converged;
        j["ks"] = ks;
        j["d"] = cs.d;
        j["c"] = cs.c;
        ordered_json s;
        s["n"] = scheme.n;
        s["r"] = scheme.r;
        if (std::isfinite(scheme.x0))
            s["x0"] = scheme.x0;
        else
            s["x0"] = "infinity";
        s["kind"] = (scheme.kind == gwq::CensorKind::Hybrid)  ? "hybrid"
                    : (scheme.kind == gwq::CensorKind::TypeI) ? "type1"
                                                              : "type2";
        j["scheme"] = s;
        write_file(a.out_json, j.dump(2));
    }
    return fit.converged ? kExitOk : kExitNumeric;
}

// -------------------------------------------------------- chart-build ----

struct ChartArgs {
    std::string file;
    std::string kind = "bhc";
    std::string censoring = "hybrid";
    std::size_t k = 5;
    std::size_t m = 0;
    std::size_t r = 0;
    double x0 = 0.0;
    bool r_given = false, x0_given = false, m_given = false;
    double p = 0.9;
    double nu = 0.0027;
    std::size_t B = 5000;
    std::uint64_t seed = 1;
    int hf_def = 8;
    std::string out = "chart.json";
    gwq::FitConfig config;
};

int cmd_chart_build(const ChartArgs& a) {
    std::vector<double> data = read_lifetimes(a.file);
    if (a.k < 1)
        throw InputError("--k must be positive");
    std::size_t m = a.m;
    if (!a.m_given) {
        if (data.size() % a.k != 0)
            throw InputError("row count is not divisible by --k; pass --m");
        m = data.size() / a.k;
    }
    if (m * a.k != data.size())
        throw InputError("row count must equal k*m");

    const gwq::CensoringScheme scheme =
        make_scheme(a.censoring, m, a.r, a.r_given, a.x0, a.x0_given);
    std::vector<gwq::HybridCensoredSample> phase1;
    phase1.reserve(a.k);
    for (std::vector<double>& g : round_robin_split(std::move(data), a.k))
        phase1.push_back(gwq::censor(g, scheme));

    gwq::ChartConfig cc;
    cc.p = a.p;
    cc.nu = a.nu;
    cc.k = a.k;
    cc.m = m;
    cc.scheme = scheme;
    cc.B = a.B;
    cc.seed = a.seed;
    cc.hf_definition = a.hf_def;

    const gwq::ControlChart chart = (a.kind == "bhc")
                                        ? gwq::build_bhc(phase1, cc, a.config)
                                        : gwq::build_shc(phase1, cc, a.config);

    std::cout << "kind " << (chart.kind == gwq::ChartKind::BHC ? "BHC" : "SHC") << '\n'
              << "lcl " << fmt6(chart.lcl) << '\n'
              << "cl " << fmt6(chart.cl) << '\n'
              << "ucl " << fmt6(chart.ucl) << '\n'
              << "theta_hat " << fmt6(chart.phase1_fit.params.theta) << '\n'
              << "alpha_hat " << fmt6(chart.phase1_fit.params.alpha) << '\n'
              << "failed_refits " << chart.failed_refits << '\n';
    write_file(a.out, gwq::chart_to_json(chart));
    return kExitOk;
}

// ------------------------------------------------------------ monitor ----

struct MonitorArgs {
    std::string chart_file;
    std::vector<std::string> subgroup_files;
    std::string out;
    gwq::FitConfig config;
};

int cmd_monitor(const MonitorArgs& a) {
    std::ifstream in(a.chart_file);
    if (!in)
        throw InputError("cannot open '" + a.chart_file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    gwq::ControlChart chart = [&] {
        try {
            return gwq::chart_from_json(buf.str());
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }();

    // Parse every input before emitting anything.
    std::vector<gwq::HybridCensoredSample> tests;
    tests.reserve(a.subgroup_files.size());
    for (const std::string& f : a.subgroup_files) {
        std::vector<double> g = read_lifetimes(f);
        if (g.size() != chart.config.scheme.n)
            throw InputError(f + ": expected " + std::to_string(chart.config.scheme.n) +
                             " lifetimes per subgroup");
        std::sort(g.begin(), g.end());
        tests.push_back(gwq::censor(g, chart.config.scheme));
    }

    std::ostringstream csv;
    csv << "index,statistic,lcl,cl,ucl,signal\n";
    bool any_ooc = false;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const gwq::MonitorVerdict v = gwq::monitor(chart, tests[i], a.config);
        if (v.signal == gwq::Signal::OutOfControlLow ||
            v.signal == gwq::Signal::OutOfControlHigh)
            any_ooc = true;
        csv << (i + 1) << ',' << fmt6(v.statistic) << ',' << fmt6(chart.lcl) << ','
            << fmt6(chart.cl) << ',' << fmt6(chart.ucl) << ','
            << gwq::signal_name(v.signal) << '\n';
    }
    if (a.out.empty())
        std::cout << csv.str();
    else
        write_file(a.out, csv.str());
    return any_ooc ? kExitSignal : kExitOk;
}

// ----------------------------------------------------------- simulate ----

struct SimArgs {
    std::string preset;   // "", "table1", "schemes", "ooc-grid"
    std::string design_file;
    std::string kind = "bhc";
    int scheme_id = 1;
    std::size_t m = 0, r = 0;
    double x0 = 0.0;
    std::string censoring = "hybrid";
    bool m_given = false, r_given = false, x0_given = false, censoring_given = false;
    bool kind_given = false, scheme_given = false;
    double p = 0.9, nu = 0.0027;
    bool p_given = false, nu_given = false;
    std::size_t k = 20, B = 1000, reps = 1000, cap = 0;
    bool k_given = false, B_given = false, reps_given = false, cap_given = false;
    double theta = 0.51, alpha = 11.1;
    bool theta_given = false, alpha_given = false;
    double delta_theta = 0.0, delta_alpha = 0.0;
    bool dth_given = false, dal_given = false;
    bool relative_shift = false;
    bool rel_given = false;
    std::uint64_t seed = 1;
    bool seed_given = false;
    bool paper_scale = false;
    int threads = 1;
    bool threads_given = false;
    bool fixed_chart = false;
    bool fixed_given = false;
    std::string phase1 = "fitted";
    bool phase1_given = false;
    std::string out;
    std::string design_out;
};

gwq::SimDesign design_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw InputError(std::string("design json: parse failure: ") + e.what());
    }
    try {
        const ordered_json& tp = j.at("true_params");
        gwq::SimDesign d(gwq::GwParams(tp.at("theta").get<double>(),
                                       tp.at("alpha").get<double>()));
        d.delta_theta = j.value("delta_theta", 0.0);
        d.delta_alpha = j.value("delta_alpha", 0.0);
        d.relative_shift = j.value("relative_shift", false);
        const std::string kind = j.value("chart_kind", std::string("BHC"));
        d.chart_kind = (kind == "SHC") ? gwq::ChartKind::SHC : gwq::ChartKind::BHC;
        const ordered_json& c = j.at("chart_config");
        d.chart_config.p = c.at("p").get<double>();
        d.chart_config.nu = c.at("nu").get<double>();
        d.chart_config.k = c.at("k").get<std::size_t>();
        d.chart_config.m = c.at("m").get<std::size_t>();
        const ordered_json& s = c.at("scheme");
        gwq::CensoringScheme scheme;
        scheme.n = s.at("n").get<std::size_t>();
        scheme.r = s.at("r").get<std::size_t>();
        const ordered_json& x0 = s.at("x0");
        scheme.x0 = x0.is_string() ? std::numeric_limits<double>::infinity()
                                   : x0.get<double>();
        const std::string sk = s.at("kind").get<std::string>();
        scheme.kind = (sk == "hybrid")  ? gwq::CensorKind::Hybrid
                      : (sk == "type1") ? gwq::CensorKind::TypeI
                                        : gwq::CensorKind::TypeII;
        scheme.validate();
        d.chart_config.scheme = scheme;
        d.chart_config.B = c.value("B", std::size_t{1000});
        d.chart_config.hf_definition = c.value("hf_definition", 8);
        d.replications = j.value("replications", std::size_t{1000});
        d.run_length_cap = j.value("run_length_cap", std::size_t{0});
        d.seed = j.value("seed", std::uint64_t{1});
        d.fixed_chart = j.value("fixed_chart", false);
        const std::string mode = j.value("phase1_mode", std::string("fitted"));
        if (mode != "known" && mode != "fitted")
            throw InputError("design json: phase1_mode must be 'known' or 'fitted'");
        d.phase1_mode = (mode == "fitted") ? gwq::Phase1Mode::Fitted
                                           : gwq::Phase1Mode::Known;
        d.threads = j.value("threads", 1);
        return d;
    } catch (const ordered_json::exception& e) {
        throw InputError(std::string("design json: missing or mistyped field: ") + e.what());
    }
}

gwq::SimDesign base_design(const SimArgs& a) {
    const std::vector<gwq::CensoringScheme> cat = gwq::scheme_catalog();

    gwq::SimDesign d(gwq::GwParams(0.51, 11.1));
    if (!a.design_file.empty()) {
        std::ifstream in(a.design_file);
        if (!in)
            throw InputError("cannot open '" + a.design_file + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        d = design_from_json(buf.str());
    } else {
        d.chart_config.scheme = cat.front();
        d.chart_config.m = d.chart_config.scheme.n;
        d.chart_config.k = 20;
        d.chart_config.B = 1000;
        d.replications = 1000;
        d.seed = 1;
    }

    if (a.theta_given || a.alpha_given)
        d.true_params = gwq::GwParams(a.theta_given ? a.theta : d.true_params.theta,
                                      a.alpha_given ? a.alpha : d.true_params.alpha);
    if (a.kind_given)
        d.chart_kind = (a.kind == "shc") ? gwq::ChartKind::SHC : gwq::ChartKind::BHC;
    if (a.scheme_given) {
        if (a.scheme_id < 1 || a.scheme_id > static_cast<int>(cat.size()))
            throw InputError("--scheme must be in 1..8");
        d.chart_config.scheme = cat[static_cast<std::size_t>(a.scheme_id) - 1];
        d.chart_config.m = d.chart_config.scheme.n;
    }
    if (a.m_given || a.r_given || a.x0_given || a.censoring_given) {
        const std::size_t m = a.m_given ? a.m : d.chart_config.scheme.n;
        const std::string ck = a.censoring_given
                                   ? a.censoring
                                   : (d.chart_config.scheme.kind == gwq::CensorKind::Hybrid
                                          ? "hybrid"
                                          : d.chart_config.scheme.kind == gwq::CensorKind::TypeI
                                                ? "type1"
                                                : "type2");
        std::size_t r = a.r;
        bool rg = a.r_given;
        double x0 = a.x0;
        bool xg = a.x0_given;
        if (!rg && (ck == "hybrid" || ck == "type2")) {
            r = d.chart_config.scheme.r;
            rg = true;
        }
        if (!xg && (ck == "hybrid" || ck == "type1") &&
            std::isfinite(d.chart_config.scheme.x0)) {
            x0 = d.chart_config.scheme.x0;
            xg = true;
        }
        d.chart_config.scheme = make_scheme(ck, m, r, rg, x0, xg);
        d.chart_config.m = m;
    }
    if (a.p_given)
        d.chart_config.p = a.p;
    if (a.nu_given)
        d.chart_config.nu = a.nu;
    if (a.k_given)
        d.chart_config.k = a.k;
    if (a.paper_scale) {
        d.chart_config.B = 5000;
        d.replications = 5000;
    }
    if (a.B_given)
        d.chart_config.B = a.B;
    if (a.reps_given)
        d.replications = a.reps;
    if (a.cap_given)
        d.run_length_cap = a.cap;
    if (a.seed_given)
        d.seed = a.seed;
    if (a.dth_given)
        d.delta_theta = a.delta_theta;
    if (a.dal_given)
        d.delta_alpha = a.delta_alpha;
    if (a.rel_given)
        d.relative_shift = a.relative_shift;
    if (a.threads_given)
        d.threads = a.threads;
    if (a.fixed_given)
        d.fixed_chart = a.fixed_chart;
    if (a.phase1_given)
        d.phase1_mode = (a.phase1 == "fitted") ? gwq::Phase1Mode::Fitted
                                               : gwq::Phase1Mode::Known;
    return d;
}

int cmd_simulate(const SimArgs& a) {
    if (a.preset == "schemes") {
        std::ostringstream csv;
        csv << "scheme_id,m,r,x0\n";
        const std::vector<gwq::CensoringScheme> cat = gwq::scheme_catalog();
        for (std::size_t i = 0; i < cat.size(); ++i)
            csv << (i + 1) << ',' << cat[i].n << ',' << cat[i].r << ','
                << fmt6(cat[i].x0) << '\n';
        if (a.out.empty())
            std::cout << csv.str();
        else
            write_file(a.out, csv.str());
        return kExitOk;
    }

    const gwq::SimDesign base = base_design(a);
    std::vector<gwq::SimDesign> designs;
    if (a.preset == "table1") {
        for (const gwq::CensoringScheme& s : gwq::scheme_catalog()) {
            gwq::SimDesign d = base;
            d.chart_config.scheme = s;
            d.chart_config.m = s.n;
            d.delta_theta = 0.0;
            d.delta_alpha = 0.0;
            designs.push_back(d);
        }
    } else if (a.preset == "ooc-grid") {
        gwq::SimDesign ic = base;
        ic.relative_shift = true;
        ic.delta_theta = 0.0;
        ic.delta_alpha = 0.0;
        designs.push_back(ic);  // in-control reference row
        for (const double rel : {-0.08, -0.04, 0.04, 0.08}) {
            gwq::SimDesign d = ic;
            d.delta_theta = rel;
            designs.push_back(d);
        }
        for (const double rel : {-0.08, -0.04, 0.04, 0.08}) {
            gwq::SimDesign d = ic;
            d.delta_alpha = rel;
            designs.push_back(d);
        }
    } else if (a.preset.empty()) {
        designs.push_back(base);
    } else {
        throw InputError("unknown preset '" + a.preset + "'");
    }

    // Echo the base design for provenance before the long run starts.
    const std::string echo = gwq::design_to_json(base);
    if (a.design_out.empty())
        std::cerr << echo << '\n';
    else
        write_file(a.design_out, echo);

    const std::string csv = gwq::table1_report(designs);
    if (a.out.empty())
        std::cout << csv;
    else
        write_file(a.out, csv);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantile control charts for hybrid-censored lifetime data"};
    app.require_subcommand(1);

    FitArgs fa;
    CLI::App* fit = app.add_subcommand("fit", "Fit the lifetime model to one censored sample");
    fit->add_option("file", fa.file, "CSV of complete lifetimes")->required();
    fit->add_option("--censoring", fa.censoring, "hybrid|type1|type2|none")
        ->check(CLI::IsMember({"hybrid", "type1", "type2", "none"}));
    CLI::Option* f_r = fit->add_option("--r", fa.r, "failure quota");
    CLI::Option* f_x0 = fit->add_option("--x0", fa.x0, "time bound");
    CLI::Option* f_n = fit->add_option("--n", fa.n, "expected sample size (cross-check)");
    CLI::Option* f_it = fit->add_option("--init-theta", fa.init_theta, "starting theta");
    CLI::Option* f_ia = fit->add_option("--init-alpha", fa.init_alpha, "starting alpha");
    fit->add_option("--em-tol", fa.config.em_tol, "outer convergence tolerance");
    fit->add_option("--em-max-iter", fa.config.em_max_iter, "outer iteration cap");
    fit->add_option("--nr-tol", fa.config.nr_tol, "gradient tolerance");
    fit->add_option("--nr-max-iter", fa.config.nr_max_iter, "step-halving cap");
    fit->add_option("--quad-tol", fa.config.quad_tol, "quadrature tolerance");
    fit->add_option("--out", fa.out_json, "write the fit as JSON to this file");

    ChartArgs ca;
    CLI::App* chart = app.add_subcommand("chart-build", "Build a control chart from phase-I data");
    chart->add_option("file", ca.file, "CSV of pooled phase-I lifetimes (k*m rows)")->required();
    chart->add_option("--kind", ca.kind, "bhc|shc")
        ->check(CLI::IsMember({"bhc", "shc"}));
    chart->add_option("--censoring", ca.censoring, "hybrid|type1|type2|none")
        ->check(CLI::IsMember({"hybrid", "type1", "type2", "none"}));
    chart->add_option("--k", ca.k, "number of phase-I subgroups");
    CLI::Option* c_m = chart->add_option("--m", ca.m, "subgroup size");
    CLI::Option* c_r = chart->add_option("--r", ca.r, "per-subgroup failure quota");
    CLI::Option* c_x0 = chart->add_option("--x0", ca.x0, "per-subgroup time bound");
    chart->add_option("--p", ca.p, "monitored quantile");
    chart->add_option("--nu", ca.nu, "false alarm rate");
    chart->add_option("--B", ca.B, "bootstrap replications");
    chart->add_option("--seed", ca.seed, "bootstrap seed");
    chart->add_option("--hf-def", ca.hf_def, "sample-quantile definition (4..9)");
    chart->add_option("--out", ca.out, "chart JSON output path");
    chart->add_option("--quad-tol", ca.config.quad_tol, "quadrature tolerance");

    MonitorArgs ma;
    CLI::App* mon = app.add_subcommand("monitor", "Classify test subgroups against a chart");
    mon->add_option("chart", ma.chart_file, "chart JSON from chart-build")->required();
    mon->add_option("subgroups", ma.subgroup_files, "CSV files, one complete subgroup each")
        ->required();
    mon->add_option("--out", ma.out, "verdict CSV output path (default stdout)");

    SimArgs sa;
    CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo run-length study");
    sim->add_option("--preset", sa.preset, "table1|schemes|ooc-grid")
        ->check(CLI::IsMember({"table1", "schemes", "ooc-grid"}));
    sim->add_option("--design", sa.design_file, "design JSON to start from");
    CLI::Option* s_kind = sim->add_option("--kind", sa.kind, "bhc|shc")
        ->check(CLI::IsMember({"bhc", "shc"}));
    CLI::Option* s_scheme = sim->add_option("--scheme", sa.scheme_id, "catalog scheme id (1..8)");
    CLI::Option* s_m = sim->add_option("--m", sa.m, "subgroup size");
    CLI::Option* s_r = sim->add_option("--r", sa.r, "failure quota");
    CLI::Option* s_x0 = sim->add_option("--x0", sa.x0, "time bound");
    CLI::Option* s_cen = sim->add_option("--censoring", sa.censoring, "hybrid|type1|type2|none")
        ->check(CLI::IsMember({"hybrid", "type1", "type2", "none"}));
    CLI::Option* s_p = sim->add_option("--p", sa.p, "monitored quantile");
    CLI::Option* s_nu = sim->add_option("--nu", sa.nu, "false alarm rate");
    CLI::Option* s_k = sim->add_option("--k", sa.k, "phase-I subgroups per replication");
    CLI::Option* s_B = sim->add_option("--B", sa.B, "bootstrap replications");
    CLI::Option* s_reps = sim->add_option("--reps", sa.reps, "Monte-Carlo replications");
    CLI::Option* s_cap = sim->add_option("--cap", sa.cap, "run-length cap (0 = 100/nu)");
    CLI::Option* s_seed = sim->add_option("--seed", sa.seed, "master seed");
    CLI::Option* s_th = sim->add_option("--theta", sa.theta, "in-control theta");
    CLI::Option* s_al = sim->add_option("--alpha", sa.alpha, "in-control alpha");
    CLI::Option* s_dth = sim->add_option("--delta-theta", sa.delta_theta, "phase-II theta shift");
    CLI::Option* s_dal = sim->add_option("--delta-alpha", sa.delta_alpha, "phase-II alpha shift");
    CLI::Option* s_rel = sim->add_flag(
        "--relative-shift", sa.relative_shift,
        "treat the deltas as fractions of the in-control reference");
    sim->add_flag("--paper-scale", sa.paper_scale, "B = 5000 and reps = 5000");
    CLI::Option* s_thr = sim->add_option("--threads", sa.threads, "worker threads");
    CLI::Option* s_fix = sim->add_flag("--fixed-chart", sa.fixed_chart,
                                       "build one chart and reuse it across replications");
    CLI::Option* s_ph1 = sim->add_option(
        "--phase1", sa.phase1,
        "chart generator: fitted = regenerate k phase-I subgroups and "
        "bootstrap at the pooled fit, known = bootstrap at --theta/--alpha")
        ->check(CLI::IsMember({"known", "fitted"}));
    sim->add_option("--out", sa.out, "report CSV output path (default stdout)");
    sim->add_option("--design-out", sa.design_out, "design JSON echo path (default stderr)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    fa.r_given = f_r->count() > 0;
    fa.x0_given = f_x0->count() > 0;
    fa.n_given = f_n->count() > 0;
    fa.init_given = f_it->count() > 0 || f_ia->count() > 0;
    if (fa.init_given && (f_it->count() == 0 || f_ia->count() == 0)) {
        std::cerr << "fit: --init-theta and --init-alpha go together\n";
        return kExitInput;
    }
    ca.r_given = c_r->count() > 0;
    ca.x0_given = c_x0->count() > 0;
    ca.m_given = c_m->count() > 0;
    sa.kind_given = s_kind->count() > 0;
    sa.scheme_given = s_scheme->count() > 0;
    sa.m_given = s_m->count() > 0;
    sa.r_given = s_r->count() > 0;
    sa.x0_given = s_x0->count() > 0;
    sa.censoring_given = s_cen->count() > 0;
    sa.p_given = s_p->count() > 0;
    sa.nu_given = s_nu->count() > 0;
    sa.k_given = s_k->count() > 0;
    sa.B_given = s_B->count() > 0;
    sa.reps_given = s_reps->count() > 0;
    sa.cap_given = s_cap->count() > 0;
    sa.seed_given = s_seed->count() > 0;
    sa.theta_given = s_th->count() > 0;
    sa.alpha_given = s_al->count() > 0;
    sa.dth_given = s_dth->count() > 0;
    sa.dal_given = s_dal->count() > 0;
    sa.rel_given = s_rel->count() > 0;
    sa.threads_given = s_thr->count() > 0;
    sa.fixed_given = s_fix->count() > 0;
    sa.phase1_given = s_ph1->count() > 0;

    try {
        if (app.got_subcommand(fit))
            return cmd_fit(fa);
        if (app.got_subcommand(chart))
            return cmd_chart_build(ca);
        if (app.got_subcommand(mon))
            return cmd_monitor(ma);
        return cmd_simulate(sa);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const gwq::FitError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}
