#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dshock/errors.hpp"
#include "dshock/interp.hpp"
#include "dshock/switch_functions.hpp"

namespace dshock {

// Solution of the autonomous fast-variable dynamics
//     rho_tau = 1 - 2 B1(rho),
// normalized by rho(0) = 0. With the compact-support mollifiers B1 vanishes
// for rho <= 0, so rho(tau) = tau holds exactly for tau <= 0 and the table
// only stores the forward half. The cumulative integrals
//     I1(tau) = int_0^tau (1 - 2 B1(rho)),   I2(tau) = int_0^tau B1(rho)
// are accumulated on the same grid and extended by their asymptotes beyond
// tau_max (I1 constant, I2 of slope 1/2).
class RhoTable {
public:
    RhoTable() = default;

    RhoTable(const SwitchTable* sw, double tau_max, double step, std::vector<double> rho,
             std::vector<double> rhop, std::vector<double> i1, std::vector<double> i2)
        : sw_(sw), tau_max_(tau_max), step_(step) {
        std::vector<double> b1(rho.size()), db1(rho.size()), di2 = b1;
        for (std::size_t i = 0; i < rho.size(); ++i) b1[i] = 0.5 * (1.0 - rhop[i]);
        // Node slopes are analytic: rho' = 1-2B1, I1' = rho', I2' = B1,
        // (B1 o rho)' = B1'(rho) rho'.
        for (std::size_t i = 0; i < rho.size(); ++i)
            db1[i] = sw_->b1_prime(rho[i]) * rhop[i];
        std::vector<double> d_i1 = rhop;
        rho_ = HermiteSeries(0.0, step_, std::move(rho), std::move(rhop));
        i1_ = HermiteSeries(0.0, step_, std::move(i1), std::move(d_i1));
        i2_ = HermiteSeries(0.0, step_, std::move(i2), b1);
        b1_of_tau_ = HermiteSeries(0.0, step_, std::move(b1), std::move(db1));
    }

    double tau_max() const { return tau_max_; }
    double step() const { return step_; }
    double rho0() const { return sw_->rho0(); }
    const SwitchTable& switches() const { return *sw_; }

    double rho_at(double tau) const {
        if (tau <= 0.0) return tau;
        if (tau >= tau_max_) return rho_.value_at_node(rho_.size() - 1);
        return rho_.eval(tau);
    }

    double b1_of_tau(double tau) const {
        if (tau <= 0.0) return 0.0;
        const double v = (tau >= tau_max_) ? b1_of_tau_.value_at_node(b1_of_tau_.size() - 1)
                                           : b1_of_tau_.eval(tau);
        return std::clamp(v, 0.0, 0.5);
    }

    double i1_at(double tau) const {
        if (tau <= 0.0) return tau;
        if (tau >= tau_max_) return i1_.value_at_node(i1_.size() - 1);
        return i1_.eval(tau);
    }

    double i2_at(double tau) const {
        if (tau <= 0.0) return 0.0;
        if (tau >= tau_max_) return i2_.value_at_node(i2_.size() - 1) + 0.5 * (tau - tau_max_);
        return i2_.eval(tau);
    }

    // I1 converges to its finite limit; the stored endpoint stands in for it.
    double i1_infinity() const { return i1_.value_at_node(i1_.size() - 1); }

    // Residual tail of I1 past tau_max, bounded by rho0 - rho(tau_max).
    double i1_tail() const { return rho0() - rho_at(tau_max_); }

private:
    const SwitchTable* sw_ = nullptr;
    double tau_max_ = 0.0;
    double step_ = 0.0;
    HermiteSeries rho_;
    HermiteSeries i1_;
    HermiteSeries i2_;
    HermiteSeries b1_of_tau_;
};

namespace detail {

struct RhoRun {
    std::vector<double> rho, rhop, i1, i2;
    double rho_end = 0.0;
};

inline RhoRun integrate_rho(const SwitchTable& sw, double tau_max, double h) {
    const auto n = static_cast<std::size_t>(std::llround(tau_max / h));
    RhoRun run;
    run.rho.reserve(n + 1);
    run.rhop.reserve(n + 1);
    run.i1.reserve(n + 1);
    run.i2.reserve(n + 1);

    auto f = [&sw](double r) { return 1.0 - 2.0 * sw.b1_at(r); };
    double rho = 0.0, i1 = 0.0, i2 = 0.0;
    double frho = f(rho);
    run.rho.push_back(rho);
    run.rhop.push_back(frho);
    run.i1.push_back(i1);
    run.i2.push_back(i2);
    for (std::size_t k = 0; k < n; ++k) {
        const double k1 = frho;
        const double k2 = f(rho + 0.5 * h * k1);
        const double k3 = f(rho + 0.5 * h * k2);
        const double k4 = f(rho + h * k3);
        const double rho_next = rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double f_next = f(rho_next);
        // Trapezoid accumulation on the integration grid.
        i1 += 0.5 * h * (frho + f_next);
        i2 += 0.5 * h * (0.5 * (1.0 - frho) + 0.5 * (1.0 - f_next));
        rho = rho_next;
        frho = f_next;
        run.rho.push_back(rho);
        run.rhop.push_back(frho);
        run.i1.push_back(i1);
        run.i2.push_back(i2);
    }
    run.rho_end = rho;
    return run;
}

}  // namespace detail

// Classical RK4 from tau = 0 with rho(0) = 0; verified by a half-step rerun.
inline RhoTable solve_rho(const SwitchTable& sw, double tau_max = 50.0, double step = 0.005) {
    if (step > 0.01) throw ConfigError("solve_rho requires step <= 0.01");
    detail::RhoRun coarse = detail::integrate_rho(sw, tau_max, step);
    detail::RhoRun fine = detail::integrate_rho(sw, tau_max, 0.5 * step);
    if (std::abs(coarse.rho_end - fine.rho_end) > 1e-9)
        throw StepNotConverged("rho integration did not converge under step halving");
    return RhoTable(&sw, tau_max, step, std::move(coarse.rho), std::move(coarse.rhop),
                    std::move(coarse.i1), std::move(coarse.i2));
}

}  // namespace dshock
