#pragma once

#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dshock/errors.hpp"
#include "dshock/problem.hpp"
#include "dshock/weak_limit.hpp"

namespace dshock {

struct GridSpec {
    double x_min = -2.0;
    double x_max = 2.0;
    int n = 2001;
};

struct EtaSpec {
    TestFunctionKind kind = TestFunctionKind::bump;
    double center = 0.0;
    double width = 1.0;
};

// One validated run configuration. A single JSON document drives every
// command; there is no environment-variable configuration.
struct RunConfig {
    // problem
    std::string f_name = "quadratic";
    std::vector<double> f_poly;  // non-empty overrides f_name
    std::string g_name = "linear_2u";
    std::vector<double> g_poly;
    double U1 = 1.0, U0 = -1.0, V1 = 1.0, V0 = 1.0;
    double a2 = -1.0, a1 = 1.0;
    std::string v0_kind = "pow23";  // pow23 | const | poly
    double v0_const = 1.0;
    std::vector<double> v0_poly;
    double spread_a = std::numeric_limits<double>::quiet_NaN();  // NaN = auto

    std::vector<double> eps_list{0.05};
    std::vector<double> times{0.5};
    GridSpec grid;
    int quad_n = 128;
    double rho_step = 0.005;
    double tau_max = 50.0;
    double window_factor = 25.0;  // mass window = factor * eps
    std::vector<EtaSpec> etas{{TestFunctionKind::bump, 0.3, 0.9},
                              {TestFunctionKind::bump, -0.25, 0.7},
                              {TestFunctionKind::bump, 0.15, 0.5}};
    bool residual_v_enabled = false;
    std::string output_dir = "out";
};

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline std::vector<double> require_number_array(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(path + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    RunConfig cfg;
    if (!j.is_object()) throw ConfigError("top level: expected an object");

    if (auto it = j.find("problem"); it != j.end()) {
        const auto& p = *it;
        if (!p.is_object()) throw ConfigError("problem: expected an object");
        if (auto f = p.find("f"); f != p.end()) {
            if (f->is_string())
                cfg.f_name = f->get<std::string>();
            else if (f->is_object() && f->contains("poly"))
                cfg.f_poly = detail::require_number_array((*f)["poly"], "problem.f.poly");
            else
                throw ConfigError("problem.f: expected a catalog name or {\"poly\": [...]}");
        }
        if (auto g = p.find("g"); g != p.end()) {
            if (g->is_string())
                cfg.g_name = g->get<std::string>();
            else if (g->is_object() && g->contains("poly"))
                cfg.g_poly = detail::require_number_array((*g)["poly"], "problem.g.poly");
            else
                throw ConfigError("problem.g: expected a catalog name or {\"poly\": [...]}");
        }
        for (const char* key : {"U1", "U0", "V1", "V0", "a2", "a1"}) {
            if (!p.contains(key)) continue;
            const double v = detail::require_number(p[key], std::string("problem.") + key);
            if (key == std::string("U1")) cfg.U1 = v;
            if (key == std::string("U0")) cfg.U0 = v;
            if (key == std::string("V1")) cfg.V1 = v;
            if (key == std::string("V0")) cfg.V0 = v;
            if (key == std::string("a2")) cfg.a2 = v;
            if (key == std::string("a1")) cfg.a1 = v;
        }
        if (auto v0 = p.find("v0"); v0 != p.end()) {
            if (v0->is_string()) {
                cfg.v0_kind = v0->get<std::string>();
                if (cfg.v0_kind != "pow23")
                    throw ConfigError("problem.v0: unknown profile name " + cfg.v0_kind);
            } else if (v0->is_object() && v0->contains("const")) {
                cfg.v0_kind = "const";
                cfg.v0_const = detail::require_number((*v0)["const"], "problem.v0.const");
            } else if (v0->is_object() && v0->contains("poly")) {
                cfg.v0_kind = "poly";
                cfg.v0_poly = detail::require_number_array((*v0)["poly"], "problem.v0.poly");
            } else {
                throw ConfigError("problem.v0: expected \"pow23\", {\"const\": c} or {\"poly\": [...]}");
            }
        }
        if (p.contains("A")) cfg.spread_a = detail::require_number(p["A"], "problem.A");
        if (!(cfg.a2 < cfg.a1)) throw ConfigError("problem: requires a2 < a1");
        if (!(cfg.U1 > cfg.U0)) throw ConfigError("problem: requires U1 > U0");
    }

    if (j.contains("eps_list")) {
        cfg.eps_list = detail::require_number_array(j["eps_list"], "eps_list");
        if (cfg.eps_list.empty()) throw ConfigError("eps_list: must be non-empty");
        for (double e : cfg.eps_list)
            if (!(e > 0.0 && e < 1.0)) throw ConfigError("eps_list: entries must lie in (0, 1)");
        for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i)
            if (!(cfg.eps_list[i] > cfg.eps_list[i + 1]))
                throw ConfigError("eps_list: must be strictly decreasing");
    }
    if (j.contains("times")) {
        cfg.times = detail::require_number_array(j["times"], "times");
        if (cfg.times.empty()) throw ConfigError("times: must be non-empty");
        for (double t : cfg.times)
            if (!(t >= 0.0)) throw ConfigError("times: entries must be >= 0");
    }
    if (auto it = j.find("grid"); it != j.end()) {
        const auto& g = *it;
        if (!g.is_object()) throw ConfigError("grid: expected an object");
        if (g.contains("x_min")) cfg.grid.x_min = detail::require_number(g["x_min"], "grid.x_min");
        if (g.contains("x_max")) cfg.grid.x_max = detail::require_number(g["x_max"], "grid.x_max");
        if (g.contains("n")) {
            if (!g["n"].is_number_integer()) throw ConfigError("grid.n: expected an integer");
            cfg.grid.n = g["n"].get<int>();
        }
        if (!(cfg.grid.x_min < cfg.grid.x_max)) throw ConfigError("grid: requires x_min < x_max");
        if (cfg.grid.n < 2) throw ConfigError("grid.n: must be >= 2");
    }
    if (auto it = j.find("quadrature"); it != j.end()) {
        if (!it->is_object() || !it->contains("n") || !(*it)["n"].is_number_integer())
            throw ConfigError("quadrature: expected {\"n\": <int>}");
        cfg.quad_n = (*it)["n"].get<int>();
        if (cfg.quad_n < 64) throw ConfigError("quadrature.n: must be >= 64");
    }
    if (auto it = j.find("ode"); it != j.end()) {
        const auto& o = *it;
        if (!o.is_object()) throw ConfigError("ode: expected an object");
        if (o.contains("rho_step")) {
            cfg.rho_step = detail::require_number(o["rho_step"], "ode.rho_step");
            if (!(cfg.rho_step > 0.0 && cfg.rho_step <= 0.01))
                throw ConfigError("ode.rho_step: must lie in (0, 0.01]");
        }
        if (o.contains("tau_max")) {
            cfg.tau_max = detail::require_number(o["tau_max"], "ode.tau_max");
            if (!(cfg.tau_max >= 10.0)) throw ConfigError("ode.tau_max: must be >= 10");
        }
    }
    if (auto it = j.find("limits"); it != j.end()) {
        const auto& l = *it;
        if (!l.is_object()) throw ConfigError("limits: expected an object");
        if (l.contains("window_factor")) {
            cfg.window_factor = detail::require_number(l["window_factor"], "limits.window_factor");
            if (!(cfg.window_factor >= 20.0))
                throw ConfigError("limits.window_factor: must be >= 20");
        }
        if (l.contains("residual_v"))
            cfg.residual_v_enabled = l["residual_v"].is_boolean()
                                         ? l["residual_v"].get<bool>()
                                         : throw ConfigError("limits.residual_v: expected a bool");
        if (l.contains("etas")) {
            if (!l["etas"].is_array()) throw ConfigError("limits.etas: expected an array");
            cfg.etas.clear();
            for (const auto& e : l["etas"]) {
                EtaSpec spec;
                const std::string kind = e.value("kind", "bump");
                if (kind == "bump")
                    spec.kind = TestFunctionKind::bump;
                else if (kind == "poly_bump")
                    spec.kind = TestFunctionKind::poly_bump;
                else if (kind == "indicator_smooth")
                    spec.kind = TestFunctionKind::indicator_smooth;
                else
                    throw ConfigError("limits.etas.kind: unknown kind " + kind);
                spec.center = detail::require_number(e.at("center"), "limits.etas.center");
                spec.width = detail::require_number(e.at("width"), "limits.etas.width");
                if (!(spec.width > 0.0)) throw ConfigError("limits.etas.width: must be > 0");
                cfg.etas.push_back(spec);
            }
            if (cfg.etas.empty()) throw ConfigError("limits.etas: must be non-empty");
        }
    }
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ConfigError("output_dir: expected a string");
        cfg.output_dir = j["output_dir"].get<std::string>();
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

inline Problem build_problem(const RunConfig& cfg) {
    FluxPair flux;
    if (!cfg.f_poly.empty())
        assign_f_poly(flux, cfg.f_poly);
    else
        assign_f(flux, cfg.f_name);
    if (!cfg.g_poly.empty())
        assign_g_poly(flux, cfg.g_poly);
    else
        assign_g(flux, cfg.g_name);

    ProblemData d;
    d.U1 = cfg.U1;
    d.U0 = cfg.U0;
    d.V1 = cfg.V1;
    d.V0 = cfg.V0;
    d.a2 = cfg.a2;
    d.a1 = cfg.a1;
    d.epsA = cfg.spread_a;
    if (cfg.v0_kind == "pow23")
        d.v0 = make_profile_pow23();
    else if (cfg.v0_kind == "const")
        d.v0 = make_profile_const(cfg.v0_const);
    else
        d.v0 = make_profile_poly(cfg.v0_poly);
    return Problem(std::move(flux), std::move(d));
}

inline std::vector<TestFunction> build_etas(const RunConfig& cfg) {
    std::vector<TestFunction> out;
    for (const EtaSpec& e : cfg.etas) out.push_back(TestFunction{e.kind, e.center, e.width});
    return out;
}

}  // namespace dshock
