#pragma once

#include <cmath>
#include <filesystem>
#include <future>
#include <memory>
#include <string>
#include <vector>

#include "dshock/config.hpp"
#include "dshock/interaction.hpp"
#include "dshock/io.hpp"
#include "dshock/oracle.hpp"
#include "dshock/problem.hpp"
#include "dshock/switch_functions.hpp"
#include "dshock/uwave.hpp"
#include "dshock/vtransport.hpp"
#include "dshock/weak_limit.hpp"

namespace dshock {

// Everything a command needs, built once per run: the problem instance, the
// switch and fast-variable tables, and the resolved spreading constant.
struct RunContext {
    explicit RunContext(const RunConfig& cfg)
        : config(cfg),
          problem(build_problem(cfg)),
          mollifiers(make_mollifiers()),
          switches(build_switch_table(mollifiers, cfg.quad_n)),
          rho(solve_rho(switches, cfg.tau_max, cfg.rho_step)) {
        spread_a = std::isnan(cfg.spread_a) ? choose_A(problem, rho) : cfg.spread_a;
        ufield = std::make_unique<UField>(problem, rho, spread_a);
    }

    RunConfig config;
    Problem problem;
    MollifierPair mollifiers;
    SwitchTable switches;
    RhoTable rho;
    double spread_a = 0.0;
    std::unique_ptr<UField> ufield;
};

// Accumulates --check violations; empty means everything met its tolerance.
using CheckFailures = std::vector<std::string>;

inline void check_that(CheckFailures& fails, bool ok, const std::string& what) {
    if (!ok) fails.push_back(what);
}

// tables: writes switch_table.csv (rho,B1,B2) and rho_table.csv
// (tau,rho,B1,I1,I2). The rho dump covers [-10, tau_max]: coarse on the exact
// pre-interaction half, on the integration grid density near zero, thinning
// afterwards.
inline CheckFailures cmd_tables(const RunContext& ctx) {
    namespace fs = std::filesystem;
    const fs::path dir = ctx.config.output_dir;
    CheckFailures fails;

    CsvBuilder sw("rho,B1,B2");
    double max_identity = 0.0;
    for (std::size_t i = 0; i < ctx.switches.size(); ++i) {
        const double rho = ctx.switches.node(i);
        const double b1 = ctx.switches.b1_node(i);
        const double b2 = ctx.switches.b2_node(i);
        max_identity = std::max(max_identity, std::abs(b1 + b2 - 1.0));
        sw.add_row({fmt12e(rho), fmt12e(b1), fmt12e(b2)});
    }
    write_file_atomic(dir / "switch_table.csv", sw.str());
    check_that(fails, max_identity <= 1e-9, "switch identity |B1+B2-1| <= 1e-9");

    CsvBuilder rt("tau,rho,B1,I1,I2");
    auto add_tau = [&](double tau) {
        rt.add_row({fmt12e(tau), fmt12e(ctx.rho.rho_at(tau)), fmt12e(ctx.rho.b1_of_tau(tau)),
                    fmt12e(ctx.rho.i1_at(tau)), fmt12e(ctx.rho.i2_at(tau))});
    };
    for (double tau = -10.0; tau < -1e-12; tau += 0.25) add_tau(tau);
    const double h = ctx.rho.step();
    for (double tau = 0.0; tau <= std::min(5.0, ctx.rho.tau_max()) + 1e-12; tau += h) add_tau(tau);
    for (double tau = 5.0 + 10.0 * h; tau <= ctx.rho.tau_max() + 1e-12; tau += 10.0 * h)
        add_tau(tau);
    write_file_atomic(dir / "rho_table.csv", rt.str());

    check_that(fails, ctx.rho.rho_at(-3.0) == -3.0, "rho(tau) == tau for tau <= 0");
    check_that(fails, std::abs(1.0 - 2.0 * ctx.rho.b1_of_tau(ctx.rho.tau_max())) <= 1e-6,
               "|1 - 2 B1(rho(tau_max))| <= 1e-6");
    check_that(fails, ctx.rho.i1_tail() < 1e-8, "I1 tail beyond tau_max < 1e-8");
    return fails;
}

// snapshot: per (t, eps) a CSV of (x, u, v, domain) on the configured grid
// plus a JSON file with the four boundary-curve positions.
inline CheckFailures cmd_snapshot(const RunContext& ctx) {
    namespace fs = std::filesystem;
    const fs::path dir = ctx.config.output_dir;
    CheckFailures fails;

    for (double t : ctx.config.times) {
        for (double eps : ctx.config.eps_list) {
            VField vf(ctx.problem, *ctx.ufield, eps, std::max(t, 1e-9));
            const GridSpec& g = ctx.config.grid;
            CsvBuilder csv("x,u,v,domain");
            double prev_u = std::numeric_limits<double>::infinity();
            bool monotone = true;
            for (int i = 0; i < g.n; ++i) {
                const double x = g.x_min + (g.x_max - g.x_min) * i / (g.n - 1);
                const double u = ctx.ufield->eval(x, t, eps);
                const double v = v_eval(vf, x, t);
                const Domain dom = classify_domain(vf, x, t);
                if (u > prev_u + 1e-12) monotone = false;
                prev_u = u;
                csv.add_row({fmt12e(x), fmt12e(u), fmt12e(v), std::to_string(domain_id(dom))});
            }
            const std::string tag = "_t" + fmt_g(t) + "_e" + fmt_g(eps);
            write_file_atomic(dir / ("snapshot" + tag + ".csv"), csv.str());

            const FlowMap& fm = ctx.ufield->map_at(t, eps);
            nlohmann::ordered_json curves;
            curves["t"] = t;
            curves["eps"] = eps;
            curves["phi1"] = fm.phi1;
            curves["phi2"] = fm.phi2;
            curves["phi1_star"] = vf.curves().phi1_star_at(t);
            curves["phi2_star"] = vf.curves().phi2_star_at(t);
            write_json_atomic(dir / ("curves" + tag + ".json"), curves);

            check_that(fails, monotone,
                       "u nonincreasing in x at t=" + fmt_g(t) + " eps=" + fmt_g(eps));
        }
    }
    return fails;
}

// limits: point-mass estimates, predictions and residual slopes across the
// eps list; one JSON report and one CSV per time.
inline CheckFailures cmd_limits(const RunContext& ctx) {
    namespace fs = std::filesystem;
    const fs::path dir = ctx.config.output_dir;
    CheckFailures fails;
    const std::vector<TestFunction> etas = build_etas(ctx.config);

    for (double t : ctx.config.times) {
        const bool post = t > ctx.problem.consts().tstar;
        PredictedLimit pred;
        if (post) pred = predicted_limit(ctx.problem, t);

        // Mass estimates per eps, evaluated in parallel (fields are immutable).
        std::vector<MassEstimate> estimates(ctx.config.eps_list.size());
        {
            std::vector<std::future<MassEstimate>> jobs;
            for (double eps : ctx.config.eps_list) {
                jobs.push_back(std::async(std::launch::async, [&, eps]() -> MassEstimate {
                    if (!post) return MassEstimate{std::nan(""), std::nan("")};
                    VField vf(ctx.problem, *ctx.ufield, eps, t);
                    return delta_mass(vf, t, eps, ctx.config.window_factor * eps);
                }));
            }
            for (std::size_t i = 0; i < jobs.size(); ++i) estimates[i] = jobs[i].get();
        }

        ScalingReport scaling;
        bool have_slopes = false;
        if (ctx.config.eps_list.size() >= 4) {
            bool geometric = true;
            for (std::size_t i = 0; i + 1 < ctx.config.eps_list.size(); ++i)
                if (std::abs(ctx.config.eps_list[i] / ctx.config.eps_list[i + 1] - 2.0) > 1e-9)
                    geometric = false;
            if (geometric && t > 0.0) {
                scaling = residual_scaling(ctx.problem, ctx.rho, ctx.spread_a, t, etas,
                                           ctx.config.eps_list, ctx.config.residual_v_enabled);
                have_slopes = true;
            }
        }

        nlohmann::ordered_json rep;
        rep["t"] = t;
        rep["eps_list"] = ctx.config.eps_list;
        {
            nlohmann::ordered_json masses = nlohmann::ordered_json::array();
            nlohmann::ordered_json locations = nlohmann::ordered_json::array();
            for (const MassEstimate& e : estimates) {
                if (std::isnan(e.mass)) {
                    masses.push_back(nullptr);
                    locations.push_back(nullptr);
                } else {
                    masses.push_back(e.mass);
                    locations.push_back(e.location);
                }
            }
            rep["mass_estimates"] = masses;
            rep["location_estimates"] = locations;
        }
        rep["predicted_mass"] = post ? nlohmann::ordered_json(pred.mass) : nullptr;
        rep["predicted_location"] = post ? nlohmann::ordered_json(pred.location) : nullptr;
        rep["u_residual_slope"] = have_slopes ? nlohmann::ordered_json(scaling.slope_u) : nullptr;
        rep["v_residual_slope"] = (have_slopes && ctx.config.residual_v_enabled)
                                      ? nlohmann::ordered_json(scaling.slope_v)
                                      : nullptr;
        rep["background"] = {{"U1", ctx.problem.data().U1},
                             {"U0", ctx.problem.data().U0},
                             {"V1", ctx.problem.data().V1},
                             {"V0", ctx.problem.data().V0}};
        write_json_atomic(dir / ("limits_t" + fmt_g(t) + ".json"), rep);

        CsvBuilder csv("eps,mass,location,R_u,R_v");
        for (std::size_t i = 0; i < ctx.config.eps_list.size(); ++i) {
            const double eps = ctx.config.eps_list[i];
            double r_u = std::nan(""), r_v = std::nan("");
            if (have_slopes) {
                r_u = scaling.points[i].r_u;
                if (ctx.config.residual_v_enabled) r_v = scaling.points[i].r_v;
            }
            csv.add_row({fmt12e(eps), fmt12e(estimates[i].mass), fmt12e(estimates[i].location),
                         fmt12e(r_u), fmt12e(r_v)});
        }
        write_file_atomic(dir / ("limits_t" + fmt_g(t) + ".csv"), csv.str());

        if (post) {
            for (std::size_t i = 0; i < ctx.config.eps_list.size(); ++i) {
                const double eps = ctx.config.eps_list[i];
                check_that(fails, std::abs(estimates[i].location - pred.location) <= 5.0 * eps,
                           "mass location within 5 eps at t=" + fmt_g(t) + " eps=" + fmt_g(eps));
                check_that(fails,
                           std::abs(estimates[i].mass - pred.mass) <=
                               0.05 * std::abs(pred.mass),
                           "mass within 5% of prediction at t=" + fmt_g(t) +
                               " eps=" + fmt_g(eps));
            }
        }
        if (have_slopes)
            check_that(fails, scaling.slope_u >= 0.8 && scaling.slope_u <= 1.5,
                       "u residual slope in [0.8, 1.5] at t=" + fmt_g(t));
    }
    return fails;
}

// oracle-compare: numeric fields against the closed-form reference on the
// grid, excluding 3 eps balls around the four boundary curves; per-point CSV
// plus a max/mean summary JSON.
inline CheckFailures cmd_oracle_compare(const RunContext& ctx) {
    namespace fs = std::filesystem;
    const fs::path dir = ctx.config.output_dir;
    CheckFailures fails;

    if (ctx.problem.flux().f_name != "quadratic" || ctx.problem.flux().g_name != "linear_2u" ||
        ctx.problem.data().U1 != 1.0 || ctx.problem.data().U0 != -1.0 ||
        ctx.problem.data().a2 != -1.0 || ctx.problem.data().a1 != 1.0 ||
        ctx.problem.data().v0.name != "pow23")
        throw ConfigError("oracle-compare requires the closed-form reference instance");

    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (double t : ctx.config.times) {
        if (!(t < 1.0)) throw ConfigError("oracle-compare requires times < 1");
        for (double eps : ctx.config.eps_list) {
            VField vf(ctx.problem, *ctx.ufield, eps, t);
            const FlowMap& fm = ctx.ufield->map_at(t, eps);
            const double curves[4] = {fm.phi2, vf.curves().phi2_star_at(t),
                                      vf.curves().phi1_star_at(t), fm.phi1};
            const GridSpec& g = ctx.config.grid;
            CsvBuilder csv("x,u,u_oracle,v,v_oracle,excluded");
            double sup_u = 0.0, sup_v = 0.0, sum_u = 0.0, sum_v = 0.0;
            int included = 0;
            for (int i = 0; i < g.n; ++i) {
                const double x = g.x_min + (g.x_max - g.x_min) * i / (g.n - 1);
                const double u_num = ctx.ufield->eval(x, t, eps);
                const double v_num = v_eval(vf, x, t);
                const double u_ref = oracle::u(x, t);
                const double v_ref = oracle::v(x, t);
                bool excluded = false;
                for (double c : curves) excluded = excluded || std::abs(x - c) < 3.0 * eps;
                if (!excluded) {
                    sup_u = std::max(sup_u, std::abs(u_num - u_ref));
                    sup_v = std::max(sup_v, std::abs(v_num - v_ref));
                    sum_u += std::abs(u_num - u_ref);
                    sum_v += std::abs(v_num - v_ref);
                    ++included;
                }
                csv.add_row({fmt12e(x), fmt12e(u_num), fmt12e(u_ref), fmt12e(v_num),
                             fmt12e(v_ref), excluded ? "1" : "0"});
            }
            const std::string tag = "_t" + fmt_g(t) + "_e" + fmt_g(eps);
            write_file_atomic(dir / ("oracle_compare" + tag + ".csv"), csv.str());

            nlohmann::ordered_json entry;
            entry["t"] = t;
            entry["eps"] = eps;
            entry["sup_u_err"] = sup_u;
            entry["sup_v_err"] = sup_v;
            entry["mean_u_err"] = included ? sum_u / included : 0.0;
            entry["mean_v_err"] = included ? sum_v / included : 0.0;
            summary.push_back(entry);

            check_that(fails, sup_u <= 5.0 * eps,
                       "sup u error <= 5 eps at t=" + fmt_g(t) + " eps=" + fmt_g(eps));
            check_that(fails, sup_v <= std::max(0.05, 2.5 * eps),
                       "sup v error <= max(0.05, 2.5 eps) at t=" + fmt_g(t) +
                           " eps=" + fmt_g(eps));
        }
    }
    write_json_atomic(dir / "oracle_compare_summary.json", summary);
    return fails;
}

}  // namespace dshock
