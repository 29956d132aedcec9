#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dshock/errors.hpp"

namespace dshock {

using RealFn = std::function<double(double)>;

// Flux pair (f, g) with analytic derivatives. Instances come from the
// built-in catalog or from polynomial coefficient lists; derivatives are
// always supplied in closed form, never by differencing user code.
struct FluxPair {
    std::string f_name;
    std::string g_name;
    RealFn f;    // conserved flux
    RealFn df;   // f'
    RealFn ddf;  // f''
    RealFn g;    // transport speed
    RealFn dg;   // g'
};

inline double poly_eval(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u + *it;
    return acc;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
    if (d.empty()) d.push_back(0.0);
    return d;
}

// f-side catalog: "quadratic" u^2/2, "quartic" u^4/4, or coefficients c0+c1 u+...
inline void assign_f(FluxPair& fp, const std::string& name) {
    fp.f_name = name;
    if (name == "quadratic") {
        fp.f = [](double u) { return 0.5 * u * u; };
        fp.df = [](double u) { return u; };
        fp.ddf = [](double) { return 1.0; };
    } else if (name == "quartic") {
        fp.f = [](double u) { return 0.25 * u * u * u * u; };
        fp.df = [](double u) { return u * u * u; };
        fp.ddf = [](double u) { return 3.0 * u * u; };
    } else {
        throw ConfigError("unknown f catalog entry: " + name);
    }
}

inline void assign_f_poly(FluxPair& fp, const std::vector<double>& coeffs) {
    fp.f_name = "poly";
    auto d1 = poly_derivative(coeffs);
    auto d2 = poly_derivative(d1);
    fp.f = [coeffs](double u) { return poly_eval(coeffs, u); };
    fp.df = [d1](double u) { return poly_eval(d1, u); };
    fp.ddf = [d2](double u) { return poly_eval(d2, u); };
}

// g-side catalog: "linear_2u" 2u, "cubic_u3" u^3, "u_plus_half_sin" u + sin(u)/2.
inline void assign_g(FluxPair& fp, const std::string& name) {
    fp.g_name = name;
    if (name == "linear_2u") {
        fp.g = [](double u) { return 2.0 * u; };
        fp.dg = [](double) { return 2.0; };
    } else if (name == "cubic_u3") {
        fp.g = [](double u) { return u * u * u; };
        fp.dg = [](double u) { return 3.0 * u * u; };
    } else if (name == "u_plus_half_sin") {
        fp.g = [](double u) { return u + 0.5 * std::sin(u); };
        fp.dg = [](double u) { return 1.0 + 0.5 * std::cos(u); };
    } else {
        throw ConfigError("unknown g catalog entry: " + name);
    }
}

inline void assign_g_poly(FluxPair& fp, const std::vector<double>& coeffs) {
    fp.g_name = "poly";
    auto d1 = poly_derivative(coeffs);
    fp.g = [coeffs](double u) { return poly_eval(coeffs, u); };
    fp.dg = [d1](double u) { return poly_eval(d1, u); };
}

inline FluxPair make_flux(const std::string& f_name, const std::string& g_name) {
    FluxPair fp;
    assign_f(fp, f_name);
    assign_g(fp, g_name);
    return fp;
}

// Bounded scalar profile used for the middle part of the v initial data.
// `knots` lists interior points where the profile is not smooth, so
// quadratures can split there.
struct Profile {
    std::string name;
    RealFn fn;
    std::vector<double> knots;
    double operator()(double x) const { return fn(x); }
};

inline Profile make_profile_pow23() {
    // x^{2/3} taken as (x^2)^{1/3}: real and even for negative arguments.
    return Profile{"pow23", [](double x) { return std::cbrt(x * x); }, {0.0}};
}

inline Profile make_profile_const(double c) {
    return Profile{"const", [c](double) { return c; }, {}};
}

inline Profile make_profile_poly(const std::vector<double>& coeffs) {
    return Profile{"poly", [coeffs](double x) { return poly_eval(coeffs, x); }, {}};
}

}  // namespace dshock
