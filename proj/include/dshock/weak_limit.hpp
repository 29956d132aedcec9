#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "dshock/errors.hpp"
#include "dshock/quadrature.hpp"
#include "dshock/switch_functions.hpp"
#include "dshock/vtransport.hpp"

namespace dshock {

enum class TestFunctionKind { bump, poly_bump, indicator_smooth };

// Compactly supported smooth test function with analytic derivative.
//   bump:             exp(-1/(1-s^2)) on |s| < 1, s = (x-center)/width
//   poly_bump:        (1-s^2)^4 on |s| < 1
//   indicator_smooth: exactly 1 on [center-width, center+width], smooth
//                     roll-off of relative width 1/8 outside
struct TestFunction {
    TestFunctionKind kind = TestFunctionKind::bump;
    double center = 0.0;
    double width = 1.0;

    double rolloff() const { return width / 8.0; }
    double support_lo() const {
        return center - width - (kind == TestFunctionKind::indicator_smooth ? rolloff() : 0.0);
    }
    double support_hi() const {
        return center + width + (kind == TestFunctionKind::indicator_smooth ? rolloff() : 0.0);
    }

    double value(double x) const {
        switch (kind) {
            case TestFunctionKind::bump: {
                const double s = (x - center) / width;
                if (std::abs(s) >= 1.0) return 0.0;
                return std::exp(-1.0 / (1.0 - s * s));
            }
            case TestFunctionKind::poly_bump: {
                const double s = (x - center) / width;
                if (std::abs(s) >= 1.0) return 0.0;
                const double q = 1.0 - s * s;
                return q * q * q * q;
            }
            case TestFunctionKind::indicator_smooth: {
                const double r = rolloff();
                return step01((x - (center - width - r)) / r) *
                       step01(((center + width + r) - x) / r);
            }
        }
        return 0.0;
    }

    double deriv(double x) const {
        switch (kind) {
            case TestFunctionKind::bump: {
                const double s = (x - center) / width;
                if (std::abs(s) >= 1.0) return 0.0;
                const double q = 1.0 - s * s;
                return std::exp(-1.0 / q) * (-2.0 * s / (q * q)) / width;
            }
            case TestFunctionKind::poly_bump: {
                const double s = (x - center) / width;
                if (std::abs(s) >= 1.0) return 0.0;
                const double q = 1.0 - s * s;
                return -8.0 * s * q * q * q / width;
            }
            case TestFunctionKind::indicator_smooth: {
                const double r = rolloff();
                const double zl = (x - (center - width - r)) / r;
                const double zr = ((center + width + r) - x) / r;
                return dstep01(zl) / r * step01(zr) - step01(zl) * dstep01(zr) / r;
            }
        }
        return 0.0;
    }

private:
    static double step01(double z) {
        if (z <= 0.0) return 0.0;
        if (z >= 1.0) return 1.0;
        const double s = detail::bump_h(z);
        const double q = detail::bump_h(1.0 - z);
        return s / (s + q);
    }
    static double dstep01(double z) {
        if (z <= 0.0 || z >= 1.0) return 0.0;
        const double s = detail::bump_h(z);
        const double q = detail::bump_h(1.0 - z);
        const double ds = detail::bump_dh(z);
        const double dq = detail::bump_dh(1.0 - z);
        const double denom = s + q;
        return (ds * q + s * dq) / (denom * denom);
    }
};

namespace detail {

// Integral of `fn` over [lo, hi], pre-split at the given breakpoints so each
// smooth piece is integrated one-sidedly (endpoints are inset by a hair).
// `seeds` seeds a uniform composite split before adaptive refinement; depth
// is reserved so refinement can reach `min_feature`.
template <class F>
double piecewise_integral(F&& fn, double lo, double hi, std::vector<double> breakpoints,
                          double min_feature, int seeds, double tol) {
    breakpoints.push_back(hi);
    std::sort(breakpoints.begin(), breakpoints.end());
    // Depth headroom covers algebraic cusps (|x|^alpha profiles), whose
    // self-similar refinement needs ~1.5 log2(1/tol) levels.
    const int depth =
        std::max(64, static_cast<int>(std::ceil(std::log2((hi - lo) / min_feature))) + 8);
    double total = 0.0;
    bool converged = true;
    double piece_lo = lo;
    for (double piece_hi : breakpoints) {
        if (piece_hi <= piece_lo || piece_hi < lo) continue;
        piece_hi = std::min(piece_hi, hi);
        const double inset = 1e-13 * (1.0 + std::abs(piece_lo) + std::abs(piece_hi));
        const double a = piece_lo + inset;
        const double b = piece_hi - inset;
        if (b > a) {
            const int n = std::max(1, static_cast<int>(seeds * (b - a) / (hi - lo)));
            const double hseed = (b - a) / n;
            for (int i = 0; i < n; ++i)
                total += adaptive_simpson(fn, a + i * hseed, a + (i + 1) * hseed, tol / n, depth,
                                          converged);
        }
        piece_lo = piece_hi;
        if (piece_lo >= hi) break;
    }
    if (!converged) throw QuadratureNotConverged("piecewise quadrature depth exhausted");
    return total;
}

}  // namespace detail

// Pairing <field, eta> over supp(eta), refined near the supplied breakpoints
// (the boundary curves) down to feature scale min_feature. Doubling quad_n
// must move the result by less than 1e-8 * ||eta||_inf.
inline double pair_field(const std::function<double(double)>& field, const TestFunction& eta,
                         int quad_n, const std::vector<double>& breakpoints, double min_feature) {
    if (quad_n < 200) throw ConfigError("pair_field requires quad_n >= 200");
    const double lo = eta.support_lo();
    const double hi = eta.support_hi();
    auto integrand = [&](double x) { return field(x) * eta.value(x); };
    auto run = [&](int n) {
        return detail::piecewise_integral(integrand, lo, hi, breakpoints, min_feature, n / 16,
                                          1e-12);
    };
    const double coarse = run(quad_n);
    const double fine = run(2 * quad_n);
    double eta_max = 0.0;
    for (int i = 0; i <= 64; ++i)
        eta_max = std::max(eta_max, std::abs(eta.value(lo + (hi - lo) * i / 64.0)));
    if (std::abs(fine - coarse) > 1e-8 * std::max(eta_max, 1e-300))
        throw QuadratureNotConverged("pairing did not settle under quad_n doubling");
    return fine;
}

// Breakpoints for v-field pairings: the four boundary curves at time t.
inline std::vector<double> curve_breakpoints(const VField& vf, double t) {
    const FlowMap& fm = vf.ufield().map_at(t, vf.eps());
    return {fm.phi2, vf.curves().phi2_star_at(t), vf.curves().phi1_star_at(t), fm.phi1};
}

struct PredictedLimit {
    double mass = 0.0;
    double location = 0.0;
    double left_u = 0.0, left_v = 0.0;
    double right_u = 0.0, right_v = 0.0;
};

// Limit point mass and its location:
//   location = c/2 (t - t*) + x*,
//   mass = V1 (a2 + g(U1) t - location) + V0 (location - a1 - g(U0) t)
//          + int_{a2}^{a1} v0.
inline PredictedLimit predicted_limit(const Problem& p, double t) {
    if (!(t > p.consts().tstar)) throw OutOfValidity("predicted_limit requires t > t*");
    const ProblemData& d = p.data();
    const DerivedConstants& c = p.consts();
    PredictedLimit out;
    out.location = 0.5 * c.c * (t - c.tstar) + c.xstar;
    const double int_v0 =
        detail::piecewise_integral([&](double x) { return d.v0(x); }, d.a2, d.a1, d.v0.knots,
                                   1e-3 * (d.a1 - d.a2), 16, 1e-11);
    out.mass = d.V1 * (d.a2 + p.flux().g(d.U1) * t - out.location) +
               d.V0 * (out.location - d.a1 - p.flux().g(d.U0) * t) + int_v0;
    out.left_u = d.U1;
    out.left_v = d.V1;
    out.right_u = d.U0;
    out.right_v = d.V0;
    return out;
}

struct MassEstimate {
    double mass = 0.0;
    double location = 0.0;
};

namespace detail {

// Initial coordinate xi whose forward transport position at time t equals x,
// located by bisection on forward solves. The forward map is monotone in xi.
inline double transport_preimage(const VField& vf, double x, double t) {
    const Problem& p = vf.problem();
    const double g1 = p.flux().g(p.data().U1);
    const double g0 = p.flux().g(p.data().U0);
    double lo = x - std::max(g1, g0) * t - 1.0;
    double hi = x - std::min(g1, g0) * t + 1.0;
    double flo = forward_position(vf, lo, t) - x;
    double fhi = forward_position(vf, hi, t) - x;
    for (int grow = 0; grow < 8 && (flo > 0.0 || fhi < 0.0); ++grow) {
        if (flo > 0.0) {
            lo -= (hi - lo);
            flo = forward_position(vf, lo, t) - x;
        }
        if (fhi < 0.0) {
            hi += (hi - lo);
            fhi = forward_position(vf, hi, t) - x;
        }
    }
    if (flo > 0.0 || fhi < 0.0) throw Error("transport preimage bracket failed");
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        (forward_position(vf, mid, t) <= x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Integral of the initial data v_hat over [xi_lo, xi_hi], split at the
// profile interval ends and the profile's own knots.
inline double vhat_integral(const Problem& p, double xi_lo, double xi_hi) {
    auto vh = [&](double xi) { return p.vhat(xi); };
    std::vector<double> cuts{p.data().a2, p.data().a1};
    for (double k : p.data().v0.knots) cuts.push_back(k);
    return piecewise_integral(vh, xi_lo, xi_hi, cuts, 1e-3 * (xi_hi - xi_lo), 16, 1e-11);
}

}  // namespace detail

// Transported mass inside the window [xlo, xhi] at time t:
//   int_window v_eps dx = int v_hat(xi) dxi over the measured preimage.
// Soon after the catastrophe the spike interior compresses below double
// resolution in x (the flow contracts at rate ~ g-range / beta), so the
// integral is evaluated in the Lagrangian frame, where the integrand stays
// bounded; the window preimage endpoints are measured by forward transport
// solves.
inline double windowed_vmass(const VField& vf, double xlo, double xhi, double t) {
    const double xi_lo = detail::transport_preimage(vf, xlo, t);
    const double xi_hi = detail::transport_preimage(vf, xhi, t);
    return detail::vhat_integral(vf.problem(), xi_lo, xi_hi);
}

// Point-mass measurement at fixed eps: locate the spike as the argmax of v
// over the prediction window (leftmost tie), then take the windowed mass
// minus the plateau background split at the located position.
inline MassEstimate delta_mass(const VField& vf, double t, double eps, double window) {
    const Problem& p = vf.problem();
    if (!(t > p.consts().tstar)) throw OutOfValidity("delta_mass requires t > t*");
    if (!(window >= 20.0 * eps)) throw ConfigError("delta_mass requires window >= 20 eps");
    const ProblemData& d = p.data();
    const PredictedLimit pred = predicted_limit(p, t);
    const double lo = pred.location - window;
    const double hi = pred.location + window;

    if (std::abs(v_eval(vf, lo, t) - d.V1) > 1e-3 || std::abs(v_eval(vf, hi, t) - d.V0) > 1e-3)
        throw WindowTooSmall("plateaus do not hold at the mass-window edges");

    // Argmax scan at resolution eps/50 (ties resolved leftward).
    MassEstimate est;
    const auto n = static_cast<std::size_t>(std::ceil(2.0 * window / (eps / 50.0)));
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const double v = v_eval(vf, x, t);
        if (v > best) {
            best = v;
            est.location = x;
        }
    }

    const double bg = d.V1 * (est.location - lo) + d.V0 * (hi - est.location);
    est.mass = windowed_vmass(vf, lo, hi, t) - bg;
    return est;
}

// Weak residual of the u equation at fixed (t, eps):
//   R_u = | d/dt <u, eta> - <f(u), eta'> |,
// time derivative by a centered difference of pairings with step eps^2.
inline double residual_u(const UField& uf, double t, double eps, const TestFunction& eta,
                         int quad_n = 400) {
    const Problem& p = uf.problem();
    auto pairing_at = [&](double s) {
        const FlowMap& fm = uf.map_at(s, eps);
        return pair_field([&](double x) { return uf.eval(x, s, eps); }, eta, quad_n,
                          {fm.phi2, fm.phi1}, eps / 20.0);
    };
    const double dt = eps * eps;
    const double dpair = (pairing_at(t + dt) - pairing_at(t - dt)) / (2.0 * dt);

    const FlowMap& fm = uf.map_at(t, eps);
    auto flux_integrand = [&](double x) { return p.flux().f(uf.eval(x, t, eps)) * eta.deriv(x); };
    const double flux_term = detail::piecewise_integral(
        flux_integrand, eta.support_lo(), eta.support_hi(), {fm.phi2, fm.phi1}, eps / 20.0, 25,
        1e-12);
    return std::abs(dpair - flux_term);
}

// Pairing <v_eps(., s), eta> in the Lagrangian frame:
//   int v_hat(xi) eta(X(xi, s)) dxi over the measured preimage of supp(eta).
// Used wherever the Eulerian integrand is unresolvable (the post-shock spike
// interior sits below double resolution in x).
inline double lagrangian_pair_v(const VField& vf, const TestFunction& eta, double s) {
    const Problem& p = vf.problem();
    const double xi_lo = detail::transport_preimage(vf, eta.support_lo(), s);
    const double xi_hi = detail::transport_preimage(vf, eta.support_hi(), s);
    auto integrand = [&](double xi) {
        return p.vhat(xi) * eta.value(forward_position(vf, xi, s));
    };
    std::vector<double> cuts{p.data().a2, p.data().a1};
    for (double k : p.data().v0.knots) cuts.push_back(k);
    return detail::piecewise_integral(integrand, xi_lo, xi_hi, cuts, 1e-3 * (xi_hi - xi_lo), 24,
                                      1e-12);
}

// Weak residual of the v equation at fixed (t, eps):
//   R_v = | d/dt <v, eta> - <v g(u), eta'> |,
// with both pairings taken in the Lagrangian frame.
inline double residual_v(const VField& vf, double t, const TestFunction& eta) {
    const Problem& p = vf.problem();
    const UField& uf = vf.ufield();
    const double eps = vf.eps();
    const double dt = eps * eps;
    if (vf.curves().t_max() < t + dt)
        throw ConfigError("residual_v needs boundary curves solved past t + eps^2");
    const double dpair =
        (lagrangian_pair_v(vf, eta, t + dt) - lagrangian_pair_v(vf, eta, t - dt)) / (2.0 * dt);

    const double xi_lo = detail::transport_preimage(vf, eta.support_lo(), t);
    const double xi_hi = detail::transport_preimage(vf, eta.support_hi(), t);
    auto flux_integrand = [&](double xi) {
        const double x = forward_position(vf, xi, t);
        return p.vhat(xi) * p.flux().g(uf.eval(x, t, eps)) * eta.deriv(x);
    };
    std::vector<double> cuts{p.data().a2, p.data().a1};
    for (double k : p.data().v0.knots) cuts.push_back(k);
    const double flux_term = detail::piecewise_integral(
        flux_integrand, xi_lo, xi_hi, cuts, 1e-3 * (xi_hi - xi_lo), 24, 1e-12);
    return std::abs(dpair - flux_term);
}

struct ResidualPoint {
    double eps = 0.0;
    double r_u = 0.0;
    double r_v = 0.0;
};

struct ScalingReport {
    double slope_u = 0.0;
    double slope_v = 0.0;
    std::vector<ResidualPoint> points;
};

inline double fit_loglog_slope(const std::vector<double>& eps, const std::vector<double>& r) {
    const std::size_t n = eps.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(eps[i]);
        const double y = std::log(std::max(r[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

// Log-log residual slopes over a geometric eps sequence (ratio 2, length >= 4).
// The residual per eps is the largest over the supplied test functions.
inline ScalingReport residual_scaling(const Problem& p, const RhoTable& rho, double spread_a,
                                      double t, const std::vector<TestFunction>& etas,
                                      const std::vector<double>& eps_list, bool with_v = true) {
    if (eps_list.size() < 4) throw ConfigError("residual_scaling requires >= 4 eps values");
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i)
        if (std::abs(eps_list[i] / eps_list[i + 1] - 2.0) > 1e-9)
            throw ConfigError("residual_scaling requires a ratio-2 geometric eps sequence");
    if (t == 0.0) throw ConfigError("residual_scaling requires t != 0");

    UField uf(p, rho, spread_a);
    ScalingReport rep;
    std::vector<double> ru(eps_list.size(), 0.0), rv(eps_list.size(), 0.0);
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double eps = eps_list[i];
        double worst_u = 0.0, worst_v = 0.0;
        if (with_v) {
            VField vf(p, uf, eps, t + 2.0 * eps * eps);
            for (const TestFunction& eta : etas) {
                worst_u = std::max(worst_u, residual_u(uf, t, eps, eta));
                worst_v = std::max(worst_v, residual_v(vf, t, eta));
            }
        } else {
            for (const TestFunction& eta : etas)
                worst_u = std::max(worst_u, residual_u(uf, t, eps, eta));
        }
        ru[i] = worst_u;
        rv[i] = worst_v;
        rep.points.push_back({eps, worst_u, worst_v});
    }
    rep.slope_u = fit_loglog_slope(eps_list, ru);
    rep.slope_v = with_v ? fit_loglog_slope(eps_list, rv) : 0.0;
    return rep;
}

}  // namespace dshock
