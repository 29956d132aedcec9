#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dshock/flux.hpp"
#include "dshock/quadrature.hpp"
#include "dshock/switch_functions.hpp"
#include "dshock/weak_limit.hpp"

using namespace dshock;

TEST_CASE("mollifier pair basics") {
    const MollifierPair m = make_mollifiers();

    SECTION("saturation and midpoint symmetry") {
        CHECK(m.omega1(-1.0) == 0.0);
        CHECK(m.omega1(0.0) == 1.0);
        CHECK(m.omega1(0.5) == 1.0);
        CHECK(m.omega1(-0.5) == Catch::Approx(0.5).margin(1e-15));
        CHECK(m.omega2(0.0) == 0.0);
        CHECK(m.omega2(0.5) == Catch::Approx(0.5).margin(1e-15));
        CHECK(m.omega2(1.0) == 1.0);
    }

    SECTION("strictly increasing inside the transition") {
        CHECK(m.omega1(-0.25) > 0.5);
        CHECK(m.omega1(-0.25) < 1.0);
        CHECK(m.omega1(-0.25) > m.omega1(-0.5));
        double prev = -1.0;
        for (int i = 0; i <= 40; ++i) {
            const double z = -1.0 + i / 40.0;
            const double v = m.omega1(z);
            CHECK(v >= prev);
            prev = v;
        }
    }

    SECTION("mirror identity omega2(z) = omega1(z-1)") {
        for (double z : {0.1, 0.33, 0.5, 0.77, 0.95})
            CHECK(m.omega2(z) == Catch::Approx(m.omega1(z - 1.0)).margin(1e-15));
    }

    SECTION("derivative matches finite differences") {
        const double h = 1e-6;
        for (double z : {-0.9, -0.6, -0.5, -0.3, -0.1}) {
            const double fd = (m.omega1(z + h) - m.omega1(z - h)) / (2.0 * h);
            CHECK(m.domega1(z) == Catch::Approx(fd).margin(1e-6));
        }
    }

    SECTION("flat continuation at the support endpoints") {
        const double h = 1e-4;
        for (double z0 : {-1.0, 0.0}) {
            const double left = (m.omega1(z0) - m.omega1(z0 - h)) / h;
            const double right = (m.omega1(z0 + h) - m.omega1(z0)) / h;
            CHECK(std::abs(left - right) < 1e-12);
        }
    }
}

TEST_CASE("switch table") {
    const MollifierPair m = make_mollifiers();
    const SwitchTable sw = build_switch_table(m, 128);

    SECTION("partition identity at the tabulated nodes") {
        double worst = 0.0;
        for (std::size_t i = 0; i < sw.size(); ++i)
            worst = std::max(worst, std::abs(sw.b1_node(i) + sw.b2_node(i) - 1.0));
        CHECK(worst <= 1e-9);
    }

    SECTION("identity at probe points") {
        for (double rho : {-1.0, 0.3, 1.0, 1.7, 3.0})
            CHECK(sw.b1_at(rho) + sw.b2_at(rho) == Catch::Approx(1.0).margin(1e-9));
    }

    SECTION("support arithmetic") {
        CHECK(sw.b1_at(-1.0) == 0.0);
        CHECK(sw.b1_at(0.0) == 0.0);
        CHECK(sw.b1_at(2.0) == 1.0);
        CHECK(sw.b1_at(3.0) == 1.0);
    }

    SECTION("strictly increasing on the transition interval") {
        for (double rho = 0.05; rho + 0.05 <= 1.95; rho += 0.05)
            CHECK(sw.b1_at(rho + 0.05) > sw.b1_at(rho));
    }

    SECTION("half-crossing at rho0 = 1 by mirror symmetry") {
        CHECK(sw.b1_at(1.0) == Catch::Approx(0.5).margin(1e-9));
        CHECK(sw.rho0() == Catch::Approx(1.0).margin(1e-9));
    }

    SECTION("mirror identity B2(rho) = B1(2 - rho)") {
        for (double rho : {0.2, 0.7, 1.0, 1.4, 1.9})
            CHECK(sw.b2_at(rho) == Catch::Approx(sw.b1_at(2.0 - rho)).margin(1e-9));
    }

    SECTION("quadrature refinement stability") {
        const SwitchTable fine = build_switch_table(m, 256);
        double worst = 0.0;
        for (std::size_t i = 0; i < sw.size(); ++i)
            worst = std::max(worst, std::abs(sw.b1_node(i) - fine.b1_node(i)));
        CHECK(worst <= 1e-10);
    }

    SECTION("node count below 64 is rejected") {
        CHECK_THROWS_AS(build_switch_table(m, 32), ConfigError);
    }
}

TEST_CASE("nonlinear superposition pairing") {
    const MollifierPair m = make_mollifiers();
    const SwitchTable sw = build_switch_table(m, 128);
    const FluxPair flux = make_flux("quadratic", "linear_2u");
    TestFunction eta{TestFunctionKind::bump, 0.0, 2.0};
    auto eta_fn = [&eta](double x) { return eta.value(x); };

    SECTION("no jumps: both sides collapse to f(a)") {
        const double r = verify_superposition(sw, 0.7, 0.0, 0.0, 0.1, -0.1, 0.1, flux, eta_fn,
                                              eta.support_lo(), eta.support_hi());
        CHECK(r <= 1e-12);
    }

    SECTION("first-order decay under eps halving") {
        // Residuals shrink at least geometrically with ratio >= 1.7.
        double prev = -1.0;
        for (double eps : {0.2, 0.1, 0.05, 0.025}) {
            const double r = verify_superposition(sw, 0.0, 1.0, 1.0, 0.0, 0.0, eps, flux, eta_fn,
                                                  eta.support_lo(), eta.support_hi());
            if (prev > 0.0) CHECK(prev / r >= 1.7);
            prev = r;
        }
    }

    SECTION("well-separated jumps reproduce the two-step profile") {
        const double a = 0.3, b_amp = 0.8, c_amp = -0.4;
        const double eps = 0.05;
        const double phi1 = -0.1, phi2 = phi1 + 5.0 * eps;
        auto lhs = [&](double x) {
            const double u = a + b_amp * m.omega1((phi1 - x) / eps) +
                             c_amp * m.omega2((phi2 - x) / eps);
            return flux.f(u) * eta.value(x);
        };
        auto two_step = [&](double x) {
            const double u = x < phi1 ? a + b_amp + c_amp : (x < phi2 ? a + c_amp : a);
            return flux.f(u) * eta.value(x);
        };
        const double L = adaptive_simpson(lhs, eta.support_lo(), eta.support_hi(), 1e-13, 48);
        const double S = detail::piecewise_integral(two_step, eta.support_lo(), eta.support_hi(),
                                                    {phi1, phi2}, 1e-4, 16, 1e-13);
        // Mismatch lives on two transition bands of width eps.
        double osc = 0.0, eta_peak = 0.0, deta_peak = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double u_lo = a + std::min({0.0, b_amp, c_amp, b_amp + c_amp});
            const double u_hi = a + std::max({0.0, b_amp, c_amp, b_amp + c_amp});
            const double u = u_lo + (u_hi - u_lo) * i / 100.0;
            osc = std::max(osc, flux.f(u));
            eta_peak = std::max(eta_peak, eta.value(-2.0 + 4.0 * i / 100.0));
            deta_peak = std::max(deta_peak, std::abs(eta.deriv(-2.0 + 4.0 * i / 100.0)));
        }
        CHECK(std::abs(L - S) <= 2.0 * eps * osc * std::max(eta_peak, deta_peak));
    }
}
