#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dshock/errors.hpp"
#include "dshock/interp.hpp"
#include "dshock/problem.hpp"
#include "dshock/uwave.hpp"

namespace dshock {

enum class Domain : int { D1 = 1, D2 = 2, D3 = 3, D4 = 4, D5 = 5 };

inline int domain_id(Domain d) { return static_cast<int>(d); }

// Transport-characteristic boundary curves from a2 and a1. The gap
// phi1* - phi2* contracts exponentially after the catastrophe and drops below
// double resolution; it is therefore integrated in log form alongside the
// phi2* anchor, which keeps the strict ordering phi2* < phi1* meaningful for
// all times.
class BoundaryCurves {
public:
    BoundaryCurves() = default;

    BoundaryCurves(double eps, double h, std::vector<double> s, std::vector<double> ds,
                   std::vector<double> lgap, std::vector<double> dlgap)
        : eps_(eps), h_(h) {
        t_max_ = h_ * static_cast<double>(s.size() - 1);
        s_ = HermiteSeries(0.0, h_, std::move(s), std::move(ds));
        lgap_ = HermiteSeries(0.0, h_, std::move(lgap), std::move(dlgap));
    }

    double eps() const { return eps_; }
    double step() const { return h_; }
    double t_max() const { return t_max_; }
    std::size_t size() const { return s_.size(); }
    double t_node(std::size_t i) const { return s_.node(i); }

    double phi2_star_at(double t) const { return s_.eval(t); }
    double gap_at(double t) const { return std::exp(lgap_.eval(t)); }
    double phi1_star_at(double t) const { return s_.eval(t) + gap_at(t); }
    double log_gap_at(double t) const { return lgap_.eval(t); }

    double phi2_star_deriv(double t) const { return s_.deriv(t); }
    double phi1_star_deriv(double t) const {
        return s_.deriv(t) + gap_at(t) * lgap_.deriv(t);
    }

private:
    double eps_ = 0.0;
    double h_ = 0.0;
    double t_max_ = 0.0;
    HermiteSeries s_;     // phi2*
    HermiteSeries lgap_;  // ln(phi1* - phi2*)
};

namespace detail {

// Transport speed field and its x-derivative (central difference, eps/20).
struct SpeedField {
    const UField* uf;
    double eps;

    double speed(double x, double t) const {
        return uf->problem().flux().g(uf->eval(x, t, eps));
    }
    // Central difference with spacing eps/20. The u field has weak kinks at
    // the fan edges phi2, phi1; near them the stencil is made one-sided on
    // the fan side (transport trajectories live in [phi2, phi1], and RK4
    // stages may overshoot a kink by a hair).
    double speed_x(double x, double t) const {
        const double d = eps / 20.0;
        const FlowMap& fm = uf->map_at(t, eps);
        if (x < fm.phi2 - d || x > fm.phi1 + d)
            return (speed(x + d, t) - speed(x - d, t)) / (2.0 * d);
        if (x - fm.phi2 < d) {
            const double xa = std::max(x, fm.phi2);
            return (speed(xa + d, t) - speed(xa, t)) / d;
        }
        if (fm.phi1 - x < d) {
            const double xa = std::min(x, fm.phi1);
            return (speed(xa, t) - speed(xa - d, t)) / d;
        }
        return (speed(x + d, t) - speed(x - d, t)) / (2.0 * d);
    }
    // Log-gap growth rate: exact difference quotient while the gap is
    // resolvable, derivative form below that.
    double log_gap_rate(double s, double lgap, double t) const {
        const double gap = std::exp(lgap);
        if (gap >= 1e-6) return (speed(s + gap, t) - speed(s, t)) / gap;
        return speed_x(s, t);
    }
};

}  // namespace detail

// RK4 solve of both transport boundary curves with step h = min(eps/4,
// t*/200). The ordering phi2 <= phi2* < phi1* <= phi1 is asserted at every
// step; the middle inequality is maintained exactly through the log-gap.
inline BoundaryCurves solve_boundary_curves(const UField& uf, double eps, double t_max) {
    const Problem& p = uf.problem();
    if (!(t_max <= 5.0 * p.consts().tstar))
        throw ConfigError("solve_boundary_curves requires t_max <= 5 t*");
    const double h_target = std::min(eps / 4.0, p.consts().tstar / 200.0);
    const auto n = static_cast<std::size_t>(std::ceil(t_max / h_target - 1e-12));
    const double h = t_max / static_cast<double>(n);

    detail::SpeedField field{&uf, eps};
    std::vector<double> s_arr, ds_arr, lg_arr, dlg_arr;
    s_arr.reserve(n + 1);
    ds_arr.reserve(n + 1);
    lg_arr.reserve(n + 1);
    dlg_arr.reserve(n + 1);

    double s = p.data().a2;
    double lg = std::log(p.data().a1 - p.data().a2);

    auto check_order = [&](double t, double s_now, double lg_now) {
        const FlowMap& fm = uf.map_at(t, eps);
        const double slack = 1e-10 * (1.0 + std::abs(s_now));
        const double gap = std::exp(lg_now);
        if (fm.phi2 > s_now + slack || s_now + gap > fm.phi1 + slack)
            throw OrderingViolation("boundary curves left the order phi2 <= phi2* < phi1* <= phi1");
    };

    for (std::size_t k = 0; k <= n; ++k) {
        const double t = h * static_cast<double>(k);
        check_order(t, s, lg);
        const double ds = field.speed(s, t);
        const double dlg = field.log_gap_rate(s, lg, t);
        s_arr.push_back(s);
        ds_arr.push_back(ds);
        lg_arr.push_back(lg);
        dlg_arr.push_back(dlg);
        if (k == n) break;

        const double k1s = ds, k1l = dlg;
        const double k2s = field.speed(s + 0.5 * h * k1s, t + 0.5 * h);
        const double k2l = field.log_gap_rate(s + 0.5 * h * k1s, lg + 0.5 * h * k1l, t + 0.5 * h);
        const double k3s = field.speed(s + 0.5 * h * k2s, t + 0.5 * h);
        const double k3l = field.log_gap_rate(s + 0.5 * h * k2s, lg + 0.5 * h * k2l, t + 0.5 * h);
        const double k4s = field.speed(s + h * k3s, t + h);
        const double k4l = field.log_gap_rate(s + h * k3s, lg + h * k3l, t + h);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        lg += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
    }
    return BoundaryCurves(eps, h, std::move(s_arr), std::move(ds_arr), std::move(lg_arr),
                          std::move(dlg_arr));
}

struct Foot {
    Domain domain = Domain::D5;
    double x0 = 0.0;       // initial-data label of the characteristic
    double jac = 1.0;      // d x0 / d x
    bool crossed = false;  // left the domain through phi1/phi2
    double t_cross = 0.0;
};

struct RhReport {
    double speed_residual[2] = {0.0, 0.0};    // |d phi_i*/dt - g(u)| at the curve
    double jump_residual_rel[2] = {0.0, 0.0}; // flux-jump mismatch, flux-scale relative
    // The two-point jump probe needs the neighbouring curves clear of its
    // stencil; once the curves have merged to within the probe scale the
    // probe straddles the whole concentration and stops being a jump test.
    bool jump_valid[2] = {true, true};
    double max_residual() const {
        double m = std::max(speed_residual[0], speed_residual[1]);
        for (int i = 0; i < 2; ++i)
            if (jump_valid[i]) m = std::max(m, jump_residual_rel[i]);
        return m;
    }
};

// Evaluator for the v field over the five-domain decomposition.
class VField {
public:
    VField(const Problem& p, const UField& uf, double eps, double t_max)
        : p_(&p), uf_(&uf), eps_(eps), curves_(solve_boundary_curves(uf, eps, t_max)) {}

    const Problem& problem() const { return *p_; }
    const UField& ufield() const { return *uf_; }
    const BoundaryCurves& curves() const { return curves_; }
    double eps() const { return eps_; }

    // Cross-check of the variational Jacobian against a two-trajectory finite
    // difference; on by default, switchable for experiments.
    bool cross_check_enabled = true;

private:
    const Problem* p_;
    const UField* uf_;
    double eps_;
    BoundaryCurves curves_;
};

// Boundary convention: closures on D1, D2 and D5, open D3 and D4, checked in
// that order. Every (x, t) lands in exactly one domain.
inline Domain classify_domain(const VField& vf, double x, double t) {
    const FlowMap& fm = vf.ufield().map_at(t, vf.eps());
    if (x <= fm.phi2) return Domain::D1;
    if (x >= fm.phi1) return Domain::D2;
    const double p2s = vf.curves().phi2_star_at(t);
    const double p1s = vf.curves().phi1_star_at(t);
    if (x >= p2s && x <= p1s) return Domain::D5;
    if (x < p2s) return Domain::D3;
    return Domain::D4;
}

namespace detail {

struct BackwardResult {
    double x_end = 0.0;   // position at the stop time
    double n_end = 1.0;   // d X(stop) / d x
    double t_stop = 0.0;  // 0, or the crossing time
    bool crossed = false;
};

inline double hermite_value(double ya, double da, double yb, double db, double h, double s) {
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * ya + h10 * h * da + h01 * yb + h11 * h * db;
}

// Backward integration of dX/dt = g(u_eps(X, t)) from (x, t) to time 0, with
// the variational factor N (terminal value 1) integrated alongside when
// requested. For D3/D4 the run stops at the first crossing of the matching
// u-curve, located by bisection on the step's dense output.
inline BackwardResult integrate_backward(const SpeedField& field, const UField& uf, double x,
                                         double t, Domain dom, bool track_n, double h_target) {
    BackwardResult res;
    res.x_end = x;
    res.n_end = 1.0;
    res.t_stop = 0.0;
    if (t <= 0.0) return res;

    const auto nsteps = static_cast<std::size_t>(std::ceil(t / h_target - 1e-12));
    const double h = t / static_cast<double>(nsteps);
    const double eps = field.eps;

    auto curve = [&](double s) -> double {
        const FlowMap& fm = uf.map_at(s, eps);
        return dom == Domain::D3 ? fm.phi2 : fm.phi1;
    };
    // Bisection probes hit arbitrary times; build those maps locally instead
    // of growing the shared cache.
    auto curve_local = [&](double s) -> double {
        const FlowMap fm = flow_map(uf.problem(), uf.rho_table(), s, eps, uf.spread_a());
        return dom == Domain::D3 ? fm.phi2 : fm.phi1;
    };
    const bool watch = (dom == Domain::D3 || dom == Domain::D4);
    // Signed distance to the watched curve, positive inside the domain.
    auto dist = [&](double xx, double cv) -> double {
        return dom == Domain::D3 ? xx - cv : cv - xx;
    };

    double X = x, N = 1.0;
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double ta = t - h * static_cast<double>(k);
        const double tb = (k + 1 == nsteps) ? 0.0 : t - h * static_cast<double>(k + 1);
        const double g1 = field.speed(X, ta);
        const double gx1 = track_n ? field.speed_x(X, ta) : 0.0;
        const double x2 = X - 0.5 * h * g1;
        const double g2 = field.speed(x2, ta - 0.5 * h);
        const double gx2 = track_n ? field.speed_x(x2, ta - 0.5 * h) : 0.0;
        const double x3 = X - 0.5 * h * g2;
        const double g3 = field.speed(x3, ta - 0.5 * h);
        const double gx3 = track_n ? field.speed_x(x3, ta - 0.5 * h) : 0.0;
        const double x4 = X - h * g3;
        const double g4 = field.speed(x4, tb);
        const double gx4 = track_n ? field.speed_x(x4, tb) : 0.0;

        const double Xb = X - h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        double Nb = N;
        if (track_n) {
            // Joint RK4 stage updates of the variational equation
            // dN/dt = G_x(X(t), t) N along the already-computed X stages.
            const double n1 = gx1 * N;
            const double n2 = gx2 * (N - 0.5 * h * n1);
            const double n3 = gx3 * (N - 0.5 * h * n2);
            const double n4 = gx4 * (N - h * n3);
            Nb = N - h / 6.0 * (n1 + 2.0 * n2 + 2.0 * n3 + n4);
        }

        if (watch && dist(Xb, curve(tb)) <= 0.0) {
            // Crossing inside [tb, ta]. Bisect on a partial RK4 step
            // re-integrated from ta (smooth side only); dense-output
            // interpolation is too noisy once the flow contracts hard.
            auto partial_x = [&](double s) -> double {
                const double hp = ta - s;
                const double x2 = X - 0.5 * hp * g1;
                const double q2 = field.speed(x2, ta - 0.5 * hp);
                const double x3 = X - 0.5 * hp * q2;
                const double q3 = field.speed(x3, ta - 0.5 * hp);
                const double x4 = X - hp * q3;
                const double q4 = field.speed(x4, s);
                return X - hp / 6.0 * (g1 + 2.0 * q2 + 2.0 * q3 + q4);
            };
            double lo = tb, hi = ta;  // dist(hi) > 0 >= dist(lo)
            for (int iter = 0; iter < 60 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++iter) {
                const double mid = 0.5 * (lo + hi);
                (dist(partial_x(mid), curve_local(mid)) <= 0.0 ? lo : hi) = mid;
            }
            const double t0 = 0.5 * (lo + hi);
            const double hp = ta - t0;
            res.x_end = curve_local(t0);
            if (track_n) {
                const double p2 = X - 0.5 * hp * g1;
                const double q2 = field.speed(p2, ta - 0.5 * hp);
                const double p3 = X - 0.5 * hp * q2;
                const double q3 = field.speed(p3, ta - 0.5 * hp);
                const double p4 = X - hp * q3;
                const double n1 = gx1 * N;
                const double n2 = field.speed_x(p2, ta - 0.5 * hp) * (N - 0.5 * hp * n1);
                const double n3 = field.speed_x(p3, ta - 0.5 * hp) * (N - 0.5 * hp * n2);
                const double n4 = field.speed_x(p4, t0) * (N - hp * n3);
                res.n_end = N - hp / 6.0 * (n1 + 2.0 * n2 + 2.0 * n3 + n4);
            }
            res.t_stop = t0;
            res.crossed = true;
            return res;
        }

        X = Xb;
        N = Nb;
    }
    res.x_end = X;
    res.n_end = N;
    res.t_stop = 0.0;
    res.crossed = false;
    return res;
}

// Initial-data label of the backward characteristic through (x, t): the
// straight-line continuation at plateau speed beyond the crossing for D3/D4,
// the landing point itself for D5.
inline double backward_label(const SpeedField& field, const UField& uf, double x, double t,
                             Domain dom, double h_target) {
    const Problem& p = uf.problem();
    BackwardResult r = integrate_backward(field, uf, x, t, dom, false, h_target);
    if (!r.crossed) return r.x_end;
    const double gU = dom == Domain::D3 ? p.flux().g(p.data().U1) : p.flux().g(p.data().U0);
    return r.x_end - gU * r.t_stop;
}

// Forward transport position X(xi, t) of the characteristic starting at xi
// (plain RK4, same step policy as the backward runs).
inline double integrate_forward(const SpeedField& field, double xi, double t, double h_target) {
    if (t <= 0.0) return xi;
    const auto nsteps = static_cast<std::size_t>(std::ceil(t / h_target - 1e-12));
    const double h = t / static_cast<double>(nsteps);
    double X = xi;
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double ta = h * static_cast<double>(k);
        const double g1 = field.speed(X, ta);
        const double g2 = field.speed(X + 0.5 * h * g1, ta + 0.5 * h);
        const double g3 = field.speed(X + 0.5 * h * g2, ta + 0.5 * h);
        const double g4 = field.speed(X + h * g3, (k + 1 == nsteps) ? t : ta + h);
        X += h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
    }
    return X;
}

}  // namespace detail

// Forward transport position for (xi, 0) -> (X, t).
inline double forward_position(const VField& vf, double xi, double t);

// Backward characteristic foot and Jacobian d x0/d x at (x, t). The Jacobian
// comes from the variational equation and is cross-checked against a
// two-trajectory finite difference with spacing eps/10; disagreement beyond
// 1% raises CrossCheckFailed.
inline Foot backward_foot(const VField& vf, double x, double t) {
    const Problem& p = vf.problem();
    const UField& uf = vf.ufield();
    const double eps = vf.eps();
    Foot foot;
    foot.domain = classify_domain(vf, x, t);

    if (foot.domain == Domain::D1) {
        foot.x0 = x - p.flux().g(p.data().U1) * t;
        foot.jac = 1.0;
        return foot;
    }
    if (foot.domain == Domain::D2) {
        foot.x0 = x - p.flux().g(p.data().U0) * t;
        foot.jac = 1.0;
        return foot;
    }

    detail::SpeedField field{&uf, eps};
    const double h_target = std::min(eps / 4.0, p.consts().tstar / 200.0);
    detail::BackwardResult r =
        detail::integrate_backward(field, uf, x, t, foot.domain, true, h_target);
    foot.crossed = r.crossed;
    foot.t_cross = r.t_stop;
    foot.jac = r.n_end;
    if (r.crossed) {
        const double gU = foot.domain == Domain::D3 ? p.flux().g(p.data().U1)
                                                    : p.flux().g(p.data().U0);
        foot.x0 = r.x_end - gU * r.t_stop;
    } else {
        foot.x0 = r.x_end;
    }

    if (vf.cross_check_enabled && t > 0.0) {
        // The label map steepens without bound against the transport curves
        // after the catastrophe, so the stencil shrinks with the distance to
        // the nearest curve; points essentially on a curve are not checkable.
        const FlowMap& fm = uf.map_at(t, eps);
        const double dist =
            std::min({std::abs(x - fm.phi2), std::abs(x - vf.curves().phi2_star_at(t)),
                      std::abs(x - vf.curves().phi1_star_at(t)), std::abs(x - fm.phi1)});
        const double d = std::min(eps / 20.0, dist / 20.0);
        if (d >= eps / 2000.0) {
            auto same = [&](double xx) { return classify_domain(vf, xx, t) == foot.domain; };
            auto label = [&](double xx) {
                return detail::backward_label(field, uf, xx, t, foot.domain, h_target);
            };
            std::optional<double> j_fd;
            if (same(x - d) && same(x + d)) {
                j_fd = (label(x + d) - label(x - d)) / (2.0 * d);
            } else if (same(x + d) && same(x + 2.0 * d)) {
                j_fd = (-3.0 * foot.x0 + 4.0 * label(x + d) - label(x + 2.0 * d)) / (2.0 * d);
            } else if (same(x - d) && same(x - 2.0 * d)) {
                j_fd = (3.0 * foot.x0 - 4.0 * label(x - d) + label(x - 2.0 * d)) / (2.0 * d);
            }
            if (j_fd) {
                const double tol = 0.01 * std::max(std::abs(foot.jac), std::abs(*j_fd)) + 1e-9;
                if (std::abs(*j_fd - foot.jac) > tol)
                    throw CrossCheckFailed("variational and finite-difference Jacobians disagree");
            }
        }
    }
    return foot;
}

inline double forward_position(const VField& vf, double xi, double t) {
    detail::SpeedField field{&vf.ufield(), vf.eps()};
    const double h_target = std::min(vf.eps() / 4.0, vf.problem().consts().tstar / 200.0);
    return detail::integrate_forward(field, xi, t, h_target);
}

// v over the five domains: plateaus outside the u-curves, Jacobian-scaled
// boundary data in the side strips, Jacobian-scaled initial profile inside.
inline double v_eval(const VField& vf, double x, double t) {
    const ProblemData& d = vf.problem().data();
    const Domain dom = classify_domain(vf, x, t);
    if (dom == Domain::D1) return d.V1;
    if (dom == Domain::D2) return d.V0;
    const Foot foot = backward_foot(vf, x, t);
    if (dom == Domain::D3) return d.V1 * foot.jac;
    if (dom == Domain::D4) return d.V0 * foot.jac;
    const double xi = std::clamp(foot.x0, d.a2, d.a1);
    return d.v0(xi) * foot.jac;
}

// Consistency of the curves with their defining speed and with the
// Rankine-Hugoniot balance of the divergence form. One-sided limits are
// taken at distance eps/50 and linearly extrapolated to the curve; the jump
// residual is reported relative to the local flux scale.
inline RhReport rh_check(const VField& vf, double t) {
    const Problem& p = vf.problem();
    const UField& uf = vf.ufield();
    const double eps = vf.eps();
    RhReport rep;

    const double speed_scale =
        std::max({std::abs(p.flux().g(p.data().U1)), std::abs(p.flux().g(p.data().U0)),
                  std::abs(p.flux().df(p.data().U1)), std::abs(p.flux().df(p.data().U0)), 1e-6});

    const FlowMap& fm = uf.map_at(t, eps);
    for (int i = 0; i < 2; ++i) {
        const bool first = (i == 0);  // phi1*
        const double xc =
            first ? vf.curves().phi1_star_at(t) : vf.curves().phi2_star_at(t);
        const double phidot =
            first ? vf.curves().phi1_star_deriv(t) : vf.curves().phi2_star_deriv(t);
        rep.speed_residual[i] = std::abs(phidot - p.flux().g(uf.eval(xc, t, eps)));

        const double dlt = eps / 50.0;
        const double other =
            first ? vf.curves().phi2_star_at(t) : vf.curves().phi1_star_at(t);
        const double clearance =
            std::min({std::abs(xc - other), std::abs(xc - fm.phi1), std::abs(xc - fm.phi2)});
        rep.jump_valid[i] = clearance > 3.0 * dlt;
        auto vg = [&](double xx) {
            const double v = v_eval(vf, xx, t);
            return std::pair<double, double>(v, v * p.flux().g(uf.eval(xx, t, eps)));
        };
        const auto [v_p1, f_p1] = vg(xc + dlt);
        const auto [v_p2, f_p2] = vg(xc + 2.0 * dlt);
        const auto [v_m1, f_m1] = vg(xc - dlt);
        const auto [v_m2, f_m2] = vg(xc - 2.0 * dlt);
        const double v_p = 2.0 * v_p1 - v_p2;
        const double v_m = 2.0 * v_m1 - v_m2;
        const double f_p = 2.0 * f_p1 - f_p2;
        const double f_m = 2.0 * f_m1 - f_m2;

        const double resid = std::abs((f_p - f_m) - phidot * (v_p - v_m));
        const double denom = std::max(
            {std::abs(f_p), std::abs(f_m), 0.5 * (std::abs(v_p) + std::abs(v_m)) * speed_scale,
             1e-12});
        rep.jump_residual_rel[i] = resid / denom;
    }
    return rep;
}

}  // namespace dshock
