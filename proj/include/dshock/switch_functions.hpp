#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "dshock/errors.hpp"
#include "dshock/flux.hpp"
#include "dshock/interp.hpp"
#include "dshock/quadrature.hpp"

namespace dshock {

namespace detail {

// exp(-1/w) for w > 0, else 0.
inline double bump_h(double w) { return w > 0.0 ? std::exp(-1.0 / w) : 0.0; }

// d/dw exp(-1/w) = exp(-1/w)/w^2, evaluated in log form to avoid 0*inf at
// small w.
inline double bump_dh(double w) {
    if (w <= 0.0) return 0.0;
    return std::exp(-1.0 / w - 2.0 * std::log(w));
}

}  // namespace detail

// Smoothed steps built from the standard C-infinity partition of unity:
// omega1 rises from 0 at z=-1 to 1 at z=0, omega2 from 0 at z=0 to 1 at z=1.
// Both saturate exactly outside the transition interval, so their derivatives
// have compact support, which makes the switch functions exactly 0/1 outside
// [0, 2].
struct MollifierPair {
    double support1[2] = {-1.0, 0.0};  // support of omega1'
    double support2[2] = {0.0, 1.0};   // support of omega2'

    double omega1(double z) const {
        if (z <= -1.0) return 0.0;
        if (z >= 0.0) return 1.0;
        const double s = detail::bump_h(z + 1.0);
        const double q = detail::bump_h(-z);
        return s / (s + q);
    }

    double omega2(double z) const { return omega1(z - 1.0); }

    double domega1(double z) const {
        if (z <= -1.0 || z >= 0.0) return 0.0;
        const double s = detail::bump_h(z + 1.0);
        const double q = detail::bump_h(-z);
        const double ds = detail::bump_dh(z + 1.0);
        const double dq = detail::bump_dh(-z);
        const double denom = s + q;
        return (ds * q + s * dq) / (denom * denom);
    }

    double domega2(double z) const { return domega1(z - 1.0); }
};

inline MollifierPair make_mollifiers() { return MollifierPair{}; }

// Tabulated convolution switches B1, B2 on a uniform rho grid with monotone
// cubic interpolation between nodes. Outside the table B1 is clamped to
// {0, 1} (exact for the compact-support pair).
class SwitchTable {
public:
    SwitchTable() = default;

    SwitchTable(MollifierPair m, std::vector<double> b1, std::vector<double> b2, double rho_min,
                double step, int n_quad)
        : mollifiers_(m),
          b1_values_(std::move(b1)),
          b2_values_(std::move(b2)),
          rho_min_(rho_min),
          step_(step),
          n_quad_(n_quad) {
        b1_interp_ = MonotoneCubic(rho_min_, step_, b1_values_);
        b2_interp_ = MonotoneCubic(rho_min_, step_, b2_values_);
        // Unique fixed point of the interaction dynamics: B1(rho0) = 1/2.
        double lo = 0.0, hi = 2.0;
        for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
            const double mid = 0.5 * (lo + hi);
            (b1_at(mid) < 0.5 ? lo : hi) = mid;
        }
        rho0_ = 0.5 * (lo + hi);
    }

    const MollifierPair& mollifiers() const { return mollifiers_; }
    double rho_min() const { return rho_min_; }
    double rho_max() const { return rho_min_ + step_ * static_cast<double>(b1_values_.size() - 1); }
    double step() const { return step_; }
    std::size_t size() const { return b1_values_.size(); }
    double node(std::size_t i) const { return rho_min_ + step_ * static_cast<double>(i); }
    double b1_node(std::size_t i) const { return b1_values_[i]; }
    double b2_node(std::size_t i) const { return b2_values_[i]; }
    int n_quad() const { return n_quad_; }
    double rho0() const { return rho0_; }

    double b1_at(double rho) const {
        if (rho <= 0.0) return 0.0;
        if (rho >= 2.0) return 1.0;
        return std::clamp(b1_interp_.eval(rho), 0.0, 1.0);
    }

    double b2_at(double rho) const {
        if (rho <= 0.0) return 1.0;
        if (rho >= 2.0) return 0.0;
        return std::clamp(b2_interp_.eval(rho), 0.0, 1.0);
    }

    // dB1/drho by direct quadrature of omega1'(z) omega2'(z + rho).
    double b1_prime(double rho) const {
        const MollifierPair& m = mollifiers_;
        return integrate_gl([&](double z) { return m.domega1(z) * m.domega2(z + rho); }, -1.0, 0.0,
                            32, 8);
    }

private:
    MollifierPair mollifiers_;
    std::vector<double> b1_values_;
    std::vector<double> b2_values_;
    MonotoneCubic b1_interp_;
    MonotoneCubic b2_interp_;
    double rho_min_ = -2.0;
    double step_ = 0.01;
    int n_quad_ = 0;
    double rho0_ = 1.0;
};

// B1(rho) = int omega1'(z) omega2(z + rho) dz over [-1, 0] and
// B2(rho) = int omega2'(z) omega1(z - rho) dz over [0, 1], by composite
// Gauss-Legendre quadrature. Doubling the node count must not move any node
// value by more than 1e-10.
inline SwitchTable build_switch_table(const MollifierPair& m, int n_quad = 128) {
    if (n_quad < 64) throw ConfigError("build_switch_table requires n_quad >= 64");
    const double rho_min = -2.0;
    const double rho_max = 4.0;
    const int n_nodes = 601;
    const double step = (rho_max - rho_min) / (n_nodes - 1);

    const int panels = 8;
    auto b1_of = [&](double rho, int nq) {
        return integrate_gl([&](double z) { return m.domega1(z) * m.omega2(z + rho); }, -1.0, 0.0,
                            nq / panels, panels);
    };
    auto b2_of = [&](double rho, int nq) {
        return integrate_gl([&](double z) { return m.domega2(z) * m.omega1(z - rho); }, 0.0, 1.0,
                            nq / panels, panels);
    };

    std::vector<double> b1(n_nodes), b2(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        const double rho = rho_min + step * i;
        if (rho <= 0.0) {
            b1[i] = 0.0;
            b2[i] = 1.0;
        } else if (rho >= 2.0) {
            b1[i] = 1.0;
            b2[i] = 0.0;
        } else {
            const double v = b1_of(rho, n_quad);
            const double v2 = b1_of(rho, 2 * n_quad);
            if (std::abs(v - v2) > 1e-10)
                throw QuadratureNotConverged("switch table quadrature did not converge");
            b1[i] = std::clamp(v2, 0.0, 1.0);
            const double w = b2_of(rho, n_quad);
            const double w2 = b2_of(rho, 2 * n_quad);
            if (std::abs(w - w2) > 1e-10)
                throw QuadratureNotConverged("switch table quadrature did not converge");
            b2[i] = std::clamp(w2, 0.0, 1.0);
        }
    }
    return SwitchTable(m, std::move(b1), std::move(b2), rho_min, step, n_quad);
}

// Pairing residual of the nonlinear superposition identity: compares
// < f(a + b th1 + c th2), eta > computed directly against the switch-function
// right-hand side with rho = (phi2 - phi1)/eps. The contract is an O(eps)
// bound uniform over eps in (0, 1/2].
inline double verify_superposition(const SwitchTable& sw, double a, double b_amp, double c_amp,
                                   double phi1, double phi2, double eps, const FluxPair& flux,
                                   const RealFn& eta, double eta_lo, double eta_hi) {
    const MollifierPair& m = sw.mollifiers();
    const double rho = (phi2 - phi1) / eps;
    const double B1 = sw.b1_at(rho);
    const double B2 = sw.b2_at(rho);

    const double fa = flux.f(a);
    const double fab = flux.f(a + b_amp);
    const double fac = flux.f(a + c_amp);
    const double fabc = flux.f(a + b_amp + c_amp);
    const double coef1 = fabc * B1 + fab * B2 - fac * B1 - fa * B2;
    const double coef2 = fabc * B2 - fab * B2 + fac * B1 - fa * B1;

    auto lhs = [&](double x) {
        const double u = a + b_amp * m.omega1((phi1 - x) / eps) + c_amp * m.omega2((phi2 - x) / eps);
        return flux.f(u) * eta(x);
    };
    auto rhs = [&](double x) {
        const double v =
            fa + coef1 * m.omega1((phi1 - x) / eps) + coef2 * m.omega2((phi2 - x) / eps);
        return v * eta(x);
    };

    bool ok = true;
    const double L = adaptive_simpson(lhs, eta_lo, eta_hi, 1e-13, 48, ok);
    const double R = adaptive_simpson(rhs, eta_lo, eta_hi, 1e-13, 48, ok);
    if (!ok) throw QuadratureNotConverged("superposition pairing quadrature did not converge");
    return std::abs(L - R);
}

}  // namespace dshock
