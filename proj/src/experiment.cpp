#include "fbr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "fbr/constellation_rate.hpp"
#include "fbr/meta_distribution.hpp"
#include "fbr/mlpcm.hpp"
#include "fbr/network_model.hpp"
#include "fbr/outage_reliability.hpp"
#include "fbr/ppp_simulator.hpp"
#include "fbr/rate_analysis.hpp"
#include "fbr/units.hpp"

namespace fbr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    try {
        std::size_t pos = 0;
        const double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + t + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---- shared parameter handling ---------------------------------------------

NetworkConfig network_from(const Params& p, double snr_db) {
    const double lambda = p.get_double("lambda", 1.0);
    const double eta = p.get_double("eta", 4.0);
    if (!(lambda > 0.0)) throw ConfigError("lambda", "must be positive (BS/km^2)");
    if (!(eta > 2.0)) throw ConfigError("eta", "must exceed 2");
    if (p.has("power_dbm") || p.has("noise_dbm")) {
        if (p.has("noise_dbm") && p.get_string("noise_dbm", "") == "none") {
            NetworkConfig cfg = NetworkConfig::from_dbm(lambda, eta, p.get_double("power_dbm", 0.0), 0.0);
            cfg.noise = 0.0;
            return cfg;
        }
        return NetworkConfig::from_dbm(lambda, eta, p.get_double("power_dbm", 30.0),
                                       p.get_double("noise_dbm", -90.0));
    }
    return NetworkConfig::from_snr_db(lambda, eta, snr_db);
}

double alpha0_db_of(double snr_db, double r0, double eta) {
    return snr_db + 10.0 * eta * std::log10(units::kSnrReferenceMeters / r0);
}

double snr_db_of(double alpha0_db, double r0, double eta) {
    return alpha0_db - 10.0 * eta * std::log10(units::kSnrReferenceMeters / r0);
}

std::optional<double> serving_distance(const Params& p) {
    if (p.get_bool("spatial", false) || !p.has("r0")) return std::nullopt;
    const double r0 = p.get_double("r0", 0.0);
    if (!(r0 > 0.0)) throw ConfigError("r0", "must be positive (m)");
    return r0;
}

// Transmit-SNR points (dB at the 1 km reference), from snr_grid or, for a
// fixed r0, from alpha0_grid.
std::vector<double> snr_points(const Params& p, std::optional<double> r0) {
    const double eta = p.get_double("eta", 4.0);
    if (p.has("alpha0_grid")) {
        if (!r0) throw ConfigError("alpha0_grid", "needs a fixed r0");
        std::vector<double> out;
        for (double a : p.get_list("alpha0_grid", {})) out.push_back(snr_db_of(a, *r0, eta));
        return out;
    }
    return p.get_list("snr_grid", {p.get_double("snr_db", 0.0)});
}

std::vector<std::int64_t> blocklengths(const Params& p, const std::vector<double>& def) {
    std::vector<std::int64_t> out;
    for (double v : p.get_list("n", def)) {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("n", "blocklength must be a positive integer");
        out.push_back(static_cast<std::int64_t>(v));
    }
    return out;
}

std::vector<double> probabilities(const Params& p, const std::string& key, const std::vector<double>& def) {
    auto v = p.get_list(key, def);
    for (double x : v)
        if (!(x > 0.0 && x < 0.5)) throw ConfigError(key, "must lie in (0, 0.5)");
    return v;
}

std::vector<int> orders(const Params& p, const std::vector<double>& def) {
    std::vector<int> out;
    for (double v : p.get_list("mod", def)) {
        const int M = static_cast<int>(v);
        if (M != v || (M != 0 && M != 2 && M != 4 && M != 8 && M != 16))
            throw ConfigError("mod", "supported orders are 2, 4, 8, 16");
        out.push_back(M);
    }
    return out;
}

SimPlan sim_plan(const Params& p, const RunContext& ctx, std::optional<double> r0,
                 std::size_t default_samples, double default_scale) {
    SimPlan plan;
    const long long samples = p.get_int("samples", static_cast<long long>(default_samples));
    if (samples < 2) throw ConfigError("samples", "must be >= 2");
    plan.realizations = static_cast<std::size_t>(samples);
    const long long fd = p.get_int("fading_draws", 1);
    if (fd < 1) throw ConfigError("fading_draws", "must be >= 1");
    plan.fading_draws = static_cast<std::size_t>(fd);
    plan.region_scale = p.get_double("region_scale", default_scale);
    if (!(plan.region_scale >= 10.0)) throw ConfigError("region_scale", "must be >= 10");
    plan.seed = static_cast<std::uint64_t>(p.get_int("seed", static_cast<long long>(ctx.seed)));
    plan.threads = ctx.threads;
    plan.fixed_r0 = r0.has_value();
    if (r0) plan.r0 = *r0;
    plan.batches = std::min<std::size_t>(64, std::max<std::size_t>(2, plan.realizations / 2));
    return plan;
}

void log(const RunContext& ctx, const std::string& msg) {
    if (ctx.log) ctx.log(msg);
}

// ---- commands ------------------------------------------------------------------

void cmd_rate(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto r0 = serving_distance(p);
    const auto ns = blocklengths(p, {128});
    const auto epss = probabilities(p, "eps", {1e-2});
    sink.columns({"snr_db", "alpha0_db", "r0", "n", "eps", "rate", "capacity_term", "dispersion_term",
                  "correction_term", "sqrt_dispersion"});
    for (double snr : snr_points(p, r0)) {
        const NetworkConfig cfg = network_from(p, snr);
        double cap = 0.0, sd = 0.0;
        if (r0) {
            const auto geom = LinkGeometry::make(cfg, *r0);
            cap = avg_capacity_ar(geom, cfg);
            sd = avg_sqrt_dispersion(geom, cfg);
        } else {
            cap = spatial_capacity_ar(cfg);
            sd = spatial_sqrt_dispersion(cfg);
        }
        log(ctx, "rate: snr " + format_number(snr) + " dB done");
        for (auto n : ns)
            for (double eps : epss) {
                const CodingConfig coding{n, eps};
                const auto r = RateResult::compose(cap, sd, coding);
                sink.row({snr, r0 ? alpha0_db_of(snr, *r0, cfg.eta) : kNaN, r0.value_or(0.0),
                          static_cast<double>(n), eps, r.rate, r.capacity_term, r.dispersion_term,
                          r.correction_term, sd});
            }
    }
}

void cmd_rate_qam(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto r0 = serving_distance(p);
    const auto ns = blocklengths(p, {128});
    const auto epss = probabilities(p, "eps", {1e-2});
    const auto Ms = orders(p, {2, 4, 8, 16});
    sink.columns({"snr_db", "alpha0_db", "r0", "M", "n", "eps", "rate", "mi_term", "disp_term",
                  "correction_term", "gaussian_rate"});
    for (double snr : snr_points(p, r0)) {
        const NetworkConfig cfg = network_from(p, snr);
        for (auto n : ns)
            for (double eps : epss) {
                const CodingConfig coding{n, eps};
                const RateResult g = r0 ? avg_rate_fixed_r0(LinkGeometry::make(cfg, *r0), cfg, coding)
                                        : avg_rate_spatial(cfg, coding);
                for (int M : Ms) {
                    const Constellation c = make_qam(M);
                    const RateResult q = r0 ? avg_rate_qam_fixed_r0(c, LinkGeometry::make(cfg, *r0), cfg, coding)
                                            : avg_rate_qam_spatial(c, cfg, coding);
                    sink.row({snr, r0 ? alpha0_db_of(snr, *r0, cfg.eta) : kNaN, r0.value_or(0.0),
                              static_cast<double>(M), static_cast<double>(n), eps, q.rate,
                              q.capacity_term, q.dispersion_term, q.correction_term, g.rate});
                }
            }
        log(ctx, "rate-qam: snr " + format_number(snr) + " dB done");
    }
}

void cmd_outage(const Params& p, const RunContext& ctx, RowSink& sink) {
    const bool spatial = p.get_bool("spatial", false) || !p.has("r0");
    const auto r0s = spatial ? std::vector<double>{0.0} : p.get_list("r0", {});
    const auto rts = p.get_list("rt", {1.0});
    for (double rt : rts)
        if (!(rt >= 0.0)) throw ConfigError("rt", "target rate must be >= 0");
    const auto ns = blocklengths(p, {128});
    const auto ebs = probabilities(p, "eps_bar", {1e-2});
    const auto Ms = orders(p, {0});
    const auto lambdas = p.get_list("lambda", {1.0});
    const long long samples = p.get_int("samples", 0);
    sink.columns({"lambda", "r0", "rt", "n", "eps_bar", "M", "lower", "upper", "mc_estimate",
                  "ci_low", "ci_high"});
    for (double lambda : lambdas) {
        Params q = p;
        q.set("lambda", format_number(lambda));
        const NetworkConfig cfg = network_from(q, p.get_double("snr_db", 0.0));
        for (double r0v : r0s) {
            const std::optional<double> r0 = spatial ? std::nullopt : std::optional<double>(r0v);
            if (r0 && !(*r0 > 0.0)) throw ConfigError("r0", "must be positive (m)");
            std::vector<LinkSample> links;
            SimPlan plan;
            if (samples > 0) {
                plan = sim_plan(q, ctx, r0, static_cast<std::size_t>(samples), 30.0);
                links = sample_links(cfg, plan);
            }
            for (double rt : rts)
                for (auto n : ns)
                    for (double eb : ebs) {
                        OutageQuery query;
                        query.target_rate = rt;
                        query.coding = {n, eb};
                        query.r0 = r0;
                        double lower = 0.0, upper = 0.0;
                        if (r0) {
                            const auto b = outage_bounds(*r0, query, cfg);
                            lower = b.lower;
                            upper = b.upper;
                        } else {
                            lower = outage_spatial_ar(rt, cfg);
                            upper = outage_spatial_upper(query, cfg);
                        }
                        for (int M : Ms) {
                            Estimate e;
                            e.mean = e.ci_low = e.ci_high = kNaN;
                            if (samples > 0) {
                                if (M == 0) {
                                    e = empirical_outage(links, cfg, rt, query.coding, plan.confidence,
                                                         RateMode::gaussian);
                                } else {
                                    const Constellation c = make_qam(M);
                                    if (rt >= c.bits() + query.coding.correction()) {
                                        e.mean = e.ci_low = e.ci_high = 1.0;
                                    } else {
                                        e = empirical_outage(links, cfg, rt, query.coding,
                                                             plan.confidence, RateMode::qam, &c);
                                    }
                                }
                            }
                            sink.row({lambda, r0.value_or(0.0), rt, static_cast<double>(n), eb,
                                      static_cast<double>(M), lower, upper, e.mean, e.ci_low,
                                      e.ci_high});
                        }
                    }
            log(ctx, "outage: lambda " + format_number(lambda) + " r0 " + format_number(r0v) + " done");
        }
    }
}

void cmd_meta(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto rts = p.get_list("rt", {1.0});
    const auto r0s = p.get_list("r0", {150.0});
    const auto ns = blocklengths(p, {128});
    const auto ebs = probabilities(p, "eps_bar", {1e-2});
    auto pts = p.get_list("pt_grid", {});
    if (pts.empty())
        for (int i = 1; i < 20; ++i) pts.push_back(0.05 * i);
    for (double x : pts)
        if (!(x > 0.0 && x < 1.0)) throw ConfigError("pt_grid", "values must lie in (0, 1)");
    const auto methods = split(p.get_string("method", "gilpelaez"), ',');
    const std::string regime = p.get_string("regime", "fbr");
    std::vector<bool> regimes;
    if (regime == "fbr") regimes = {false};
    else if (regime == "ar") regimes = {true};
    else if (regime == "both") regimes = {false, true};
    else throw ConfigError("regime", "expected fbr, ar or both");
    const bool include_noise = p.get_bool("include_noise", false);

    NetworkConfig cfg = network_from(p, p.get_double("snr_db", 0.0));
    if (!include_noise) cfg.noise = 0.0;
    sink.columns({"method", "pt", "rt", "r0", "n", "eps_bar", "asymptotic", "ccdf", "ccdf_approx"});
    for (const auto& m : methods)
        if (m != "gilpelaez" && m != "beta" && m != "mc")
            throw ConfigError("method", "expected gilpelaez, beta or mc, got '" + m + "'");
    for (double r0 : r0s)
        for (double rt : rts)
            for (auto n : ns)
                for (double eb : ebs)
                    for (bool ar : regimes) {
                        MetaQuery q;
                        q.target_rate = rt;
                        q.coding = {n, eb};
                        q.r0 = r0;
                        q.asymptotic = ar;
                        q.validate();
                        for (const auto& m : methods) {
                            const double mid = m == "gilpelaez" ? 0 : m == "beta" ? 1 : 2;
                            std::vector<double> main(pts.size(), kNaN), aux(pts.size(), kNaN);
                            if (m == "gilpelaez") {
                                main = meta_ccdf_gilpelaez(q, cfg, pts);
                            } else if (m == "beta") {
                                const MomentSet ms = moment_set(q, cfg);
                                for (std::size_t i = 0; i < pts.size(); ++i) main[i] = meta_cdf_beta(ms, pts[i]);
                            } else {
                                if (ar) throw ConfigError("method", "mc is available for the fbr regime only");
                                SimPlan plan = sim_plan(p, ctx, r0, 2000, 10.0);
                                plan.fading_draws = static_cast<std::size_t>(p.get_int("fading_draws", 2000));
                                const auto em = empirical_meta(cfg, rt, q.coding, plan, include_noise);
                                for (std::size_t i = 0; i < pts.size(); ++i) {
                                    main[i] = EmpiricalMeta::ccdf(em.exact, pts[i]);
                                    aux[i] = EmpiricalMeta::ccdf(em.approx, pts[i]);
                                }
                            }
                            for (std::size_t i = 0; i < pts.size(); ++i)
                                sink.row({mid, pts[i], rt, r0, static_cast<double>(n), eb, ar ? 1.0 : 0.0,
                                          main[i], aux[i]});
                            log(ctx, "meta: " + m + " r0 " + format_number(r0) + " rt " + format_number(rt) + " done");
                        }
                    }
}

void cmd_simulate(const Params& p, const RunContext& ctx, RowSink& sink) {
    const std::string what = p.get_string("what", "rate");
    if (what == "outage") {
        Params q = p;
        if (!q.has("samples")) q.set("samples", "100000");
        cmd_outage(q, ctx, sink);
        return;
    }
    if (what != "rate" && what != "rate-qam") throw ConfigError("what", "expected rate, rate-qam or outage");
    const auto r0 = serving_distance(p);
    const auto ns = blocklengths(p, {128});
    const auto epss = probabilities(p, "eps", {1e-2});
    const auto Ms = what == "rate" ? std::vector<int>{0} : orders(p, {2, 4, 16});
    const auto snrs = snr_points(p, r0);
    // Interference and fading do not depend on the noise, so one draw serves every SNR.
    const NetworkConfig base = network_from(p, snrs.front());
    const SimPlan plan = sim_plan(p, ctx, r0, 100000, 30.0);
    const auto links = sample_links(base, plan);
    sink.columns({"snr_db", "alpha0_db", "r0", "M", "n", "eps", "analytic", "mc", "ci_low", "ci_high"});
    for (double snr : snrs) {
        const NetworkConfig cfg = network_from(p, snr);
        for (auto n : ns)
            for (double eps : epss)
                for (int M : Ms) {
                    const CodingConfig coding{n, eps};
                    RateResult a;
                    EmpiricalRate e;
                    if (M == 0) {
                        a = r0 ? avg_rate_fixed_r0(LinkGeometry::make(cfg, *r0), cfg, coding)
                               : avg_rate_spatial(cfg, coding);
                        e = empirical_avg_rate(links, cfg, coding, plan.batches, plan.confidence,
                                               RateMode::gaussian);
                    } else {
                        const Constellation c = make_qam(M);
                        a = r0 ? avg_rate_qam_fixed_r0(c, LinkGeometry::make(cfg, *r0), cfg, coding)
                               : avg_rate_qam_spatial(c, cfg, coding);
                        e = empirical_avg_rate(links, cfg, coding, plan.batches, plan.confidence,
                                               RateMode::qam, &c);
                    }
                    sink.row({snr, r0 ? alpha0_db_of(snr, *r0, cfg.eta) : kNaN, r0.value_or(0.0),
                              static_cast<double>(M), static_cast<double>(n), eps, a.rate, e.rate.mean,
                              e.rate.ci_low, e.rate.ci_high});
                }
        log(ctx, "simulate: snr " + format_number(snr) + " dB done");
    }
}

Labeling labeling_from(const Params& p) {
    const std::string l = p.get_string("labeling", "gray");
    if (l == "gray") return Labeling::gray;
    if (l == "set_partition") return Labeling::set_partition;
    throw ConfigError("labeling", "expected gray or set_partition");
}

MlpcmRunConfig mlpcm_run(const Params& p, const RunContext& ctx) {
    MlpcmRunConfig run;
    const long long frames = p.get_int("frames", 10000);
    if (frames < 1) throw ConfigError("frames", "must be >= 1");
    run.frames = static_cast<std::size_t>(frames);
    run.seed = static_cast<std::uint64_t>(p.get_int("seed", static_cast<long long>(ctx.seed)));
    run.threads = ctx.threads;
    return run;
}

void cmd_mlpcm(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto Ms = orders(p, {4});
    const int n = static_cast<int>(p.get_int("n", 128));
    const double target = p.get_double("target_fer", 1e-2);
    if (!(target > 0.0 && target < 1.0)) throw ConfigError("target_fer", "must lie in (0, 1)");
    const auto grid = p.get_list("snr_grid", {0.0, 2.0, 4.0, 6.0, 8.0, 10.0});
    const int k_step = static_cast<int>(p.get_int("k_step", 4));
    MlpcmRunConfig run = mlpcm_run(p, ctx);
    const std::string channel = p.get_string("channel", "awgn");
    if (channel == "network") {
        run.channel = MlpcmChannel::network;
        run.network = network_from(p, 0.0);
        run.r0 = p.get_double("r0", 150.0);
    } else if (channel != "awgn") {
        throw ConfigError("channel", "expected awgn or network");
    }
    if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("n", "must be a power of two");
    sink.columns({"snr_db", "M", "k", "achieved_rate", "fer_at_rate", "ci_low", "ci_high"});
    for (int M : Ms) {
        for (const auto& pt : rate_sweep(M, n, grid, target, run, labeling_from(p), k_step))
            sink.row({pt.snr_db, static_cast<double>(M), static_cast<double>(pt.k), pt.rate, pt.fer,
                      pt.ci_low, pt.ci_high});
        log(ctx, "mlpcm: M=" + std::to_string(M) + " done");
    }
}

void cmd_mlpcm_average(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto Ms = orders(p, {2, 4, 8, 16});
    const int n = static_cast<int>(p.get_int("n", 128));
    const double target = p.get_double("target_fer", 1e-2);
    const auto awgn_grid = p.get_list("awgn_grid", {});
    const double r0 = p.get_double("r0", 150.0);
    Params q = p;
    q.set("r0", format_number(r0));
    const auto alphas = p.get_list("alpha0_grid", {-10, -5, 0, 5, 10, 15, 20, 25, 30, 35, 40});
    if (awgn_grid.empty()) throw ConfigError("awgn_grid", "required (dB grid for the AWGN rate sweeps)");
    MlpcmRunConfig run = mlpcm_run(p, ctx);
    const double eta = p.get_double("eta", 4.0);
    const NetworkConfig base = network_from(q, snr_db_of(alphas.front(), r0, eta));
    const SimPlan plan = sim_plan(q, ctx, r0, 100000, 30.0);
    const auto links = sample_links(base, plan);
    sink.columns({"alpha0_db", "M", "mlpcm_rate", "ci_low", "ci_high", "theory_rate"});
    const CodingConfig coding{n, target};
    for (int M : Ms) {
        const auto sweep = rate_sweep(M, n, awgn_grid, target, run, labeling_from(p),
                                      static_cast<int>(p.get_int("k_step", 4)));
        const Constellation c = make_qam(M);
        for (double a : alphas) {
            const NetworkConfig cfg = network_from(q, snr_db_of(a, r0, eta));
            const Estimate e = mlpcm_network_average(sweep, links, cfg, plan.batches, plan.confidence);
            const double th = avg_rate_qam_fixed_r0(c, LinkGeometry::make(cfg, r0), cfg, coding).rate;
            sink.row({a, static_cast<double>(M), e.mean, e.ci_low, e.ci_high, th});
        }
        log(ctx, "mlpcm-average: M=" + std::to_string(M) + " done");
    }
}

void cmd_interference_cdf(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto r0s = p.get_list("r0", {150.0, 250.0});
    auto xs = p.get_list("x_grid", {});
    if (xs.empty())
        for (int i = 1; i <= 40; ++i) xs.push_back(0.1 * i);
    NetworkConfig cfg = network_from(p, 0.0);
    cfg.noise = 0.0;
    sink.columns({"r0", "x_over_mean", "b", "gamma_cdf", "exact_cdf", "exact_cdf_unit_modulus"});
    for (double r0 : r0s) {
        const double mean = b_moments(cfg, r0).mean;
        std::vector<double> bs;
        for (double x : xs) bs.push_back(x * mean);
        const auto g = interference_cdf(bs, cfg, r0, CdfMethod::gamma);
        const auto gc = interference_cdf(bs, cfg, r0, CdfMethod::exact);
        const auto um = interference_cdf(bs, cfg, r0, CdfMethod::exact, InterferenceModel::unit_modulus);
        for (std::size_t i = 0; i < xs.size(); ++i) sink.row({r0, xs[i], bs[i], g[i], gc[i], um[i]});
        log(ctx, "interference-cdf: r0 " + format_number(r0) + " done");
    }
}

void cmd_kfunction(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto r0s = p.get_list("r0", {150.0, 250.0});
    const double rt = p.get_double("rt", 1.0);
    const auto ns = blocklengths(p, {128});
    auto grid = p.get_list("sinr_grid", {});
    if (grid.empty())
        for (double d = -10.0; d <= 30.0 + 1e-9; d += 0.5) grid.push_back(d);
    const NetworkConfig cfg = network_from(p, p.get_double("snr_db", 0.0));
    sink.columns({"r0", "n", "sinr_db", "k_value", "sinr_pdf"});
    for (double r0 : r0s)
        for (auto n : ns) {
            const double sn = std::sqrt(static_cast<double>(n));
            const double b = std::log2(static_cast<double>(n)) / (2.0 * static_cast<double>(n));
            for (double d : grid) {
                const double v = std::pow(10.0, d / 10.0);
                // conditional FER of a rate-R_t code at SINR v
                const double k = q_function(sn * (std::log2(1.0 + v) - rt + b) / awgn_sqrt_dispersion(v));
                sink.row({r0, static_cast<double>(n), d, k, sinr_pdf_gamma(v, cfg, r0)});
            }
            log(ctx, "kfunction: r0 " + format_number(r0) + " done");
        }
}

void cmd_reliability(const Params& p, const RunContext& ctx, RowSink& sink) {
    const auto r0 = serving_distance(p);
    const auto rts = p.get_list("rt", {0.1375, 1.0, 3.46});
    const auto ns = blocklengths(p, {128, 2048});
    auto ebs = p.get_list("eps_bar", {});
    if (ebs.empty())
        for (double e = -8.0; e <= -0.5 + 1e-9; e += 0.25) ebs.push_back(std::pow(10.0, e));
    for (double e : ebs)
        if (!(e > 0.0 && e < 0.5)) throw ConfigError("eps_bar", "must lie in (0, 0.5)");
    const NetworkConfig cfg = network_from(p, p.get_double("snr_db", 0.0));
    sink.columns({"lambda", "r0", "rt", "n", "eps_bar", "reliability", "reliability_ar", "outage_upper"});
    for (double rt : rts) {
        const double ar = reliability_ar(rt, cfg, r0);
        for (auto n : ns)
            for (double e : ebs) {
                OutageQuery q;
                q.target_rate = rt;
                q.coding = {n, e};
                q.r0 = r0;
                const double upper = r0 ? outage_bounds(*r0, q, cfg).upper : outage_spatial_upper(q, cfg);
                sink.row({p.get_double("lambda", 1.0), r0.value_or(0.0), rt, static_cast<double>(n), e,
                          reliability_from_outage(upper, e), ar, upper});
            }
        log(ctx, "reliability: rt " + format_number(rt) + " done");
    }
}

using Command = void (*)(const Params&, const RunContext&, RowSink&);

const std::vector<std::pair<std::string, Command>>& command_table() {
    static const std::vector<std::pair<std::string, Command>> table = {
        {"rate", cmd_rate},
        {"rate-qam", cmd_rate_qam},
        {"outage", cmd_outage},
        {"meta", cmd_meta},
        {"simulate", cmd_simulate},
        {"mlpcm", cmd_mlpcm},
        {"interference-cdf", cmd_interference_cdf},
        {"kfunction", cmd_kfunction},
        {"reliability", cmd_reliability},
        {"mlpcm-average", cmd_mlpcm_average},
    };
    return table;
}

Params kv(std::initializer_list<std::pair<const char*, const char*>> items) {
    Params p;
    for (const auto& [k, v] : items) p.set(k, v);
    return p;
}

const std::vector<std::pair<std::string, std::vector<ExperimentRun>>>& preset_table() {
    static const std::vector<std::pair<std::string, std::vector<ExperimentRun>>> table = {
        {"fig1", {{"interference-cdf", kv({{"lambda", "1"}, {"r0", "150,250"}})}}},
        {"fig2a", {{"rate", kv({{"lambda", "1"}, {"r0", "250"}, {"snr_grid", "-10:2:30"},
                                {"n", "128,2048"}, {"eps", "1e-2,1e-5,1e-6"}})}}},
        {"fig2b", {{"rate", kv({{"lambda", "1"}, {"spatial", "true"}, {"snr_grid", "-10:5:60"},
                                {"n", "128,2048"}, {"eps", "1e-2,1e-5,1e-6"}})}}},
        {"fig3a", {{"rate-qam", kv({{"lambda", "1"}, {"r0", "150"}, {"alpha0_grid", "-10:2:40"},
                                    {"mod", "2,4,8,16"}, {"n", "128"}, {"eps", "1e-2"}})}}},
        {"fig3b", {{"simulate", kv({{"what", "rate-qam"}, {"lambda", "1"}, {"r0", "150"},
                                    {"alpha0_grid", "-10:5:40"}, {"mod", "2,4,16"}, {"n", "128"},
                                    {"eps", "1e-2"}, {"samples", "100000"}})}}},
        {"fig4", {{"rate-qam", kv({{"lambda", "1"}, {"spatial", "true"}, {"snr_grid", "-10:5:60"},
                                   {"mod", "2,4,8,16"}, {"n", "512"}, {"eps", "1e-2"}})}}},
        {"fig5", {{"mlpcm-average", kv({{"lambda", "1"}, {"r0", "150"}, {"mod", "2,4,8,16"},
                                        {"n", "128"}, {"target_fer", "1e-2"}, {"frames", "10000"},
                                        {"awgn_grid", "-10:2:30"}, {"alpha0_grid", "-10:5:40"},
                                        {"samples", "100000"}})}}},
        {"fig6", {{"kfunction", kv({{"lambda", "1"}, {"r0", "150,250"}, {"rt", "1"},
                                    {"n", "128,2048"}, {"snr_db", "0"}})}}},
        {"fig7", {{"outage", kv({{"lambda", "1,9"}, {"r0", "50:25:500"}, {"rt", "1"}, {"n", "128,2048"},
                                 {"eps_bar", "1e-2,1e-6"}, {"snr_db", "0"}, {"samples", "20000"}})}}},
        {"fig8a", {{"outage", kv({{"lambda", "1"}, {"spatial", "true"}, {"rt", "0.25:0.25:6"},
                                  {"n", "128,2048"}, {"eps_bar", "1e-2,1e-6"}, {"snr_db", "0"},
                                  {"samples", "20000"}})}}},
        {"fig8b", {{"outage", kv({{"lambda", "1"}, {"spatial", "true"}, {"rt", "0.25:0.25:5"},
                                  {"n", "128"}, {"eps_bar", "1e-2"}, {"mod", "2,4,8,16"},
                                  {"snr_db", "0"}, {"samples", "20000"}})}}},
        {"fig9a", {{"meta", kv({{"lambda", "1"}, {"r0", "150"}, {"rt", "0.1375,0.3964,1,2.0574,3.4594"},
                                {"n", "128"}, {"eps_bar", "1e-5"}, {"regime", "both"},
                                {"method", "gilpelaez"}, {"pt_grid", "0.05:0.05:0.95"}})}}},
        {"fig9b", {{"meta", kv({{"lambda", "1"}, {"r0", "150,250,500"}, {"rt", "1"}, {"n", "128"},
                                {"eps_bar", "1e-2"}, {"method", "gilpelaez,beta,mc"},
                                {"samples", "2000"}, {"fading_draws", "2000"},
                                {"pt_grid", "0.05:0.05:0.95"}})}}},
        {"fig10", {{"reliability", kv({{"lambda", "1"}, {"r0", "250"}, {"snr_db", "0"}})},
                   {"reliability", kv({{"lambda", "0.1"}, {"spatial", "true"}, {"snr_db", "10"}})}}},
    };
    return table;
}

}  // namespace

// ---- Params ------------------------------------------------------------------------

std::string Params::get_string(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

double Params::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : parse_number(key, it->second);
}

double Params::require_double(const std::string& key) const {
    if (!has(key)) throw ConfigError(key, "missing required value");
    return get_double(key, 0.0);
}

long long Params::get_int(const std::string& key, long long def) const {
    if (!has(key)) return def;
    const double v = get_double(key, 0.0);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(key, "expected an integer");
    return static_cast<long long>(v);
}

bool Params::get_bool(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string v = trim(get_string(key, ""));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> Params::get_list(const std::string& key, const std::vector<double>& def) const {
    if (!has(key)) return def;
    const std::string v = trim(get_string(key, ""));
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        const auto parts = split(v, ':');
        if (parts.size() != 3) throw ConfigError(key, "range must be start:step:stop");
        const double a = parse_number(key, parts[0]);
        const double step = parse_number(key, parts[1]);
        const double b = parse_number(key, parts[2]);
        if (!(step > 0.0) || b < a) throw ConfigError(key, "range needs step > 0 and stop >= start");
        const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9));
        if (count > 1000000) throw ConfigError(key, "range too long");
        for (long long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
        return out;
    }
    for (const auto& item : split(v, ',')) out.push_back(parse_number(key, item));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

void Params::merge(const Params& other) {
    for (const auto& [k, v] : other.kv_) kv_[k] = v;
}

Params Params::parse(const std::string& text) {
    Params p;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        p.set(key, trim(line.substr(eq + 1)));
    }
    return p;
}

Params Params::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// ---- sinks ---------------------------------------------------------------------------

CsvSink::CsvSink(std::ostream& out,
                 const std::vector<std::pair<std::string, std::string>>& provenance)
    : out_(out) {
    for (const auto& [k, v] : provenance) out_ << "# " << k << " = " << v << '\n';
    out_.flush();
}

void CsvSink::columns(const std::vector<std::string>& names) {
    if (width_ != 0) {
        if (names.size() != width_) throw std::logic_error("CsvSink: column set changed");
        return;
    }
    width_ = names.size();
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << '\n';
    out_.flush();
}

void CsvSink::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
    out_.flush();
}

std::vector<double> TableSink::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no column " + name);
    const auto idx = static_cast<std::size_t>(it - names.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
}

// ---- commands and experiments ---------------------------------------------------------

std::vector<std::string> registered_commands() {
    std::vector<std::string> out;
    for (const auto& [name, fn] : command_table()) out.push_back(name);
    return out;
}

void run_command(const std::string& command, const Params& params, const RunContext& ctx,
                 RowSink& sink) {
    for (const auto& [name, fn] : command_table())
        if (name == command) {
            fn(params, ctx, sink);
            return;
        }
    std::string names;
    for (const auto& n : registered_commands()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("command", "unknown command '" + command + "' (registered: " + names + ")");
}

std::vector<std::string> registered_experiments() {
    std::vector<std::string> out;
    for (const auto& [id, runs] : preset_table()) out.push_back(id);
    out.push_back("custom");
    return out;
}

void ExperimentConfig::validate() const {
    const auto ids = registered_experiments();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        std::string names;
        for (const auto& n : ids) names += (names.empty() ? "" : ", ") + n;
        throw ConfigError("experiment", "unknown id '" + id + "' (registered: " + names + ")");
    }
    if (threads < 1) throw ConfigError("threads", "must be >= 1");
    if (id == "custom" && !params.has("command"))
        throw ConfigError("command", "custom experiments need a command key");
}

std::vector<ExperimentRun> resolve_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<ExperimentRun> runs;
    if (config.id == "custom") {
        Params p = config.params;
        runs.push_back({p.get_string("command", ""), p});
        return runs;
    }
    for (const auto& [id, preset] : preset_table())
        if (id == config.id) runs = preset;
    for (auto& r : runs) r.params.merge(config.params);
    return runs;
}

std::vector<std::pair<std::string, std::string>> provenance(const std::string& id,
                                                            const std::vector<ExperimentRun>& runs,
                                                            std::uint64_t seed) {
    std::vector<std::pair<std::string, std::string>> out = {
        {"experiment", id}, {"library", kLibraryVersion}, {"seed", std::to_string(seed)}};
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string prefix = runs.size() > 1 ? "run" + std::to_string(i + 1) + "." : "";
        out.emplace_back(prefix + "command", runs[i].command);
        for (const auto& [k, v] : runs[i].params.values())
            if (k != "command") out.emplace_back(prefix + k, v);
    }
    return out;
}

void run_experiment(const ExperimentConfig& config, const RunContext& ctx, std::ostream& csv) {
    const auto runs = resolve_experiment(config);
    CsvSink sink(csv, provenance(config.id, runs, ctx.seed));
    for (const auto& r : runs) run_command(r.command, r.params, ctx, sink);
}

}  // namespace fbr
