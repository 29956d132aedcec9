#pragma once

#include <cmath>

#include "dshock/errors.hpp"
#include "dshock/flux.hpp"
#include "dshock/problem.hpp"

namespace dshock {
namespace oracle {

// Closed-form reference for the instance f = u^2/2, g = 2u with states
// U1 = 1, U0 = -1, V1 = V0 = 1 on [a2, a1] = [-1, 1] and v0(x) = x^{2/3}.
// Fields are valid for 0 <= t < 1; the point-mass law for t >= 1.

struct Constants {
    static constexpr double U1 = 1.0, U0 = -1.0;
    static constexpr double V1 = 1.0, V0 = 1.0;
    static constexpr double a2 = -1.0, a1 = 1.0;
    static constexpr double K = 1.0, b = 0.0;
    static constexpr double tstar = 1.0, xstar = 0.0, c = 0.0;
};

inline Problem make_problem(double spread_a = std::numeric_limits<double>::quiet_NaN()) {
    ProblemData d;
    d.U1 = Constants::U1;
    d.U0 = Constants::U0;
    d.V1 = Constants::V1;
    d.V0 = Constants::V0;
    d.a2 = Constants::a2;
    d.a1 = Constants::a1;
    d.v0 = make_profile_pow23();
    d.epsA = spread_a;
    return Problem(make_flux("quadratic", "linear_2u"), std::move(d));
}

inline void require_fields_valid(double t) {
    if (!(t >= 0.0 && t < 1.0)) throw OutOfValidity("closed-form fields require 0 <= t < 1");
}

// Plateaus oriented by the initial data: 1 on the left of the fan, -1 right.
inline double u(double x, double t) {
    require_fields_valid(t);
    if (x <= t - 1.0) return 1.0;
    if (x >= 1.0 - t) return -1.0;
    return x / (t - 1.0);
}

// x^{2/3} as (x^2)^{1/3}, real and even.
inline double pow23(double x) { return std::cbrt(x * x); }

inline double v(double x, double t) {
    require_fields_valid(t);
    const double w = 1.0 - t;
    if (x < t - 1.0) return 1.0;
    if (x < -w * w) return w * w / (x * x);
    if (x < w * w) return pow23(x) / std::pow(w, 10.0 / 3.0);
    if (x < 1.0 - t) return w * w / (x * x);
    return 1.0;
}

inline double x0_map(double x, double t) {
    require_fields_valid(t);
    const double w = 1.0 - t;
    if (x <= t - 1.0) return x - 2.0 * t;
    if (x <= -w * w) return -2.0 - w * w / x;
    if (x <= w * w) return x / (w * w);
    if (x <= 1.0 - t) return 2.0 - w * w / x;
    return x + 2.0 * t;
}

// Point mass after formation; the slope 4 equals V1 g(U1) - V0 g(U0).
inline double mass(double t) {
    if (!(t >= 1.0)) throw OutOfValidity("mass law requires t >= 1");
    return 4.0 * t - 0.8;
}

}  // namespace oracle
}  // namespace dshock
