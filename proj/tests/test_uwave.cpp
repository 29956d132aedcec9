#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dshock/oracle.hpp"
#include "dshock/uwave.hpp"
#include "dshock/weak_limit.hpp"

using namespace dshock;

namespace {

struct Setup {
    MollifierPair m = make_mollifiers();
    SwitchTable sw = build_switch_table(m, 128);
    RhoTable rho = solve_rho(sw);
};

const Setup& setup() {
    static Setup s;
    return s;
}

// Classical pre-catastrophe solution by the method of characteristics: the
// fan map x = (1 - K t) x0 + b t with plateau translations outside.
double classical_u(const Problem& p, double x, double t) {
    const DerivedConstants& c = p.consts();
    const ProblemData& d = p.data();
    const double left_edge = d.a2 + p.flux().df(d.U1) * t;
    const double right_edge = d.a1 + p.flux().df(d.U0) * t;
    if (x <= left_edge) return d.U1;
    if (x >= right_edge) return d.U0;
    return p.u0((x - c.b * t) / (1.0 - c.K * t));
}

}  // namespace

TEST_CASE("flow map at t = 0 is the dilated identity") {
    const Problem p = oracle::make_problem();
    const double eps = 0.02, A = 2.0;
    const FlowMap fm = flow_map(p, setup().rho, 0.0, eps, A);
    CHECK(fm.beta == Catch::Approx(1.0 + eps * A).margin(1e-14));
    CHECK(fm.alpha == Catch::Approx(0.0).margin(1e-14));
    CHECK(fm.forward(1.0) == Catch::Approx(1.0 + eps * A * 1.0).margin(1e-14));
    CHECK(fm.forward(-1.0) == Catch::Approx(-1.0 - eps * A).margin(1e-14));
}

TEST_CASE("pre-catastrophe slope is exactly 1 + eps A - K t") {
    const Problem p = oracle::make_problem();
    const double eps = 0.05, A = 2.0;
    for (double t : {0.1, 0.5, 0.9}) {
        const FlowMap fm = flow_map(p, setup().rho, t, eps, A);
        CHECK(fm.beta == Catch::Approx(1.0 + eps * A - t).margin(1e-12));
    }
}

TEST_CASE("post-catastrophe edges collapse to the limit shock line") {
    const Problem p = oracle::make_problem();
    const double A = choose_A(p, setup().rho);
    for (double eps : {0.05, 0.02, 0.01}) {
        const FlowMap fm = flow_map(p, setup().rho, 2.0, eps, A);
        // Both edges converge to c/2 (t - t*) + x* = 0 at rate O(eps).
        CHECK(std::abs(fm.phi1) <= 2.0 * eps);
        CHECK(std::abs(fm.phi2) <= 2.0 * eps);
        CHECK(fm.phi2 < fm.phi1);
        // The edge gap is Theta(eps): A(a1 - a2) - rho0 in units of eps for
        // the closed-form switch integrals.
        const double expected = A * 2.0 - setup().rho.rho0();
        CHECK((fm.phi1 - fm.phi2) / eps == Catch::Approx(expected).epsilon(0.01));
    }
}

TEST_CASE("spreading constant") {
    const Problem p = oracle::make_problem();
    const double A = choose_A(p, setup().rho);
    CHECK(A == Catch::Approx(2.0 * setup().rho.i1_infinity()).margin(1e-12));

    SECTION("beta increases pointwise in A") {
        const FlowMap fm1 = flow_map(p, setup().rho, 1.5, 0.02, A);
        const FlowMap fm2 = flow_map(p, setup().rho, 1.5, 0.02, 2.0 * A);
        CHECK(fm2.beta > fm1.beta);
    }

    SECTION("A = 0 loses invertibility past the catastrophe") {
        CHECK_THROWS_AS(flow_map(p, setup().rho, 2.0, 0.02, 0.0), JacobianNonPositive);
    }

    SECTION("positivity across times and eps") {
        for (double eps : {0.1, 0.05, 0.02, 0.01}) {
            for (int i = 0; i <= 300; ++i) {
                const double t = 3.0 * p.consts().tstar * i / 300.0;
                CHECK(flow_map(p, setup().rho, t, eps, A).beta > 0.0);
            }
        }
    }
}

TEST_CASE("inverse map") {
    const Problem p = oracle::make_problem();
    const double eps = 0.02, A = 2.0;
    const FlowMap fm = flow_map(p, setup().rho, 0.5, eps, A);

    SECTION("edge preimages are the fan endpoints") {
        CHECK(fm.invert(fm.phi1) == Catch::Approx(1.0).margin(1e-12));
        CHECK(fm.invert(fm.phi2) == Catch::Approx(-1.0).margin(1e-12));
    }

    SECTION("round trip on random points") {
        std::mt19937 gen(42);
        std::uniform_real_distribution<double> dist(-3.0, 3.0);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double x = dist(gen);
            worst = std::max(worst, std::abs(fm.forward(fm.invert(x)) - x));
        }
        CHECK(worst <= 1e-12);
    }

    SECTION("strictly increasing and continuous at the seams") {
        const double beta_out = 1.0 + eps * A;
        CHECK(fm.forward(-1.0 - 1e-9) == Catch::Approx(fm.phi2 - 1e-9 * beta_out).margin(1e-13));
        CHECK(fm.forward(1.0 + 1e-9) == Catch::Approx(fm.phi1 + 1e-9 * beta_out).margin(1e-13));
        double prev = fm.forward(-3.0);
        for (double x0 = -2.9; x0 <= 3.0; x0 += 0.1) {
            const double v = fm.forward(x0);
            CHECK(v > prev);
            prev = v;
        }
    }

    SECTION("small-eps fan inverse approaches x/(1-t)") {
        const FlowMap tiny = flow_map(p, setup().rho, 0.5, 1e-4, 0.1);
        CHECK(tiny.invert(0.1) == Catch::Approx(0.1 / 0.5).margin(1e-4));
    }
}

TEST_CASE("u evaluation") {
    const Problem p = oracle::make_problem();
    UField uf(p, setup().rho, 2.0);
    const double eps = 0.02;

    SECTION("plateaus away from the fan") {
        const FlowMap& fm = uf.map_at(0.5, eps);
        CHECK(uf.eval(fm.phi2 - 1.0, 0.5, eps) == 1.0);
        CHECK(uf.eval(fm.phi1 + 1.0, 0.5, eps) == -1.0);
    }

    SECTION("fan center value") {
        CHECK(std::abs(uf.eval(0.0, 0.5, eps)) <= 0.05);
    }

    SECTION("nonincreasing in x") {
        for (double t : {0.3, 0.9, 1.5}) {
            double prev = uf.eval(-2.0, t, eps);
            for (int i = 1; i <= 400; ++i) {
                const double x = -2.0 + 4.0 * i / 400.0;
                const double u = uf.eval(x, t, eps);
                CHECK(u <= prev + 1e-12);
                prev = u;
            }
        }
    }

    SECTION("mollified and composed forms agree weakly to O(eps)") {
        TestFunction eta{TestFunctionKind::bump, 0.0, 1.5};
        double prev_gap = -1.0;
        for (double e : {0.08, 0.04, 0.02}) {
            const FlowMap& fm = uf.map_at(1.5, e);
            auto comp = [&](double x) { return uf.eval(x, 1.5, e, UForm::composition); };
            auto moll = [&](double x) { return uf.eval(x, 1.5, e, UForm::mollified); };
            const double pc = pair_field(comp, eta, 400, {fm.phi2, fm.phi1}, e / 20.0);
            const double pm = pair_field(moll, eta, 400, {fm.phi2, fm.phi1}, e / 20.0);
            const double gap = std::abs(pc - pm);
            if (prev_gap > 0.0) CHECK(prev_gap / gap >= 1.6);
            prev_gap = gap;
        }
    }

    SECTION("weak convergence to the limit shock profile") {
        // <u_eps, eta> -> U1 int_{-inf}^{phi} eta + U0 int_phi^inf eta,
        // first order in eps, with phi = 0 at t = 2.
        TestFunction eta{TestFunctionKind::bump, 0.2, 1.0};
        bool ok = true;
        const double left = adaptive_simpson([&](double x) { return eta.value(x); },
                                             eta.support_lo(), 0.0, 1e-12, 48, ok);
        const double right = adaptive_simpson([&](double x) { return eta.value(x); }, 0.0,
                                              eta.support_hi(), 1e-12, 48, ok);
        REQUIRE(ok);
        const double limit = 1.0 * left + (-1.0) * right;
        double prev_err = -1.0;
        for (double e : {0.08, 0.04, 0.02, 0.01}) {
            const FlowMap& fm = uf.map_at(2.0, e);
            auto field = [&](double x) { return uf.eval(x, 2.0, e); };
            const double pr = pair_field(field, eta, 400, {fm.phi2, fm.phi1}, e / 20.0);
            const double err = std::abs(pr - limit);
            if (prev_err > 0.0) CHECK(prev_err / err >= 1.6);
            prev_err = err;
        }
    }
}

TEST_CASE("pre-catastrophe agreement with the method of characteristics") {
    struct Case {
        Problem p;
        double spread;
    };
    const Case cases[] = {
        {oracle::make_problem(), 2.0},
        {Problem(make_flux("quartic", "linear_2u"),
                 ProblemData{0.5, -0.5, 1.0, 1.0, -1.0, 1.0, make_profile_const(1.0),
                             std::numeric_limits<double>::quiet_NaN()}),
         2.0},
    };
    for (const Case& cs : cases) {
        UField uf(cs.p, setup().rho, cs.spread);
        const double t = 0.5 * cs.p.consts().tstar;
        const double ball = 3.0 * 0.04;  // fixed for both runs so the probe set is eps-free
        double prev_sup = -1.0;
        for (double e : {0.04, 0.02}) {
            const FlowMap& fm = uf.map_at(t, e);
            const FlowMap& fm0 = uf.map_at(t, 0.04);
            double sup = 0.0;
            for (int i = 0; i <= 1000; ++i) {
                const double x = -2.0 + 4.0 * i / 1000.0;
                if (std::abs(x - fm.phi1) < ball || std::abs(x - fm.phi2) < ball ||
                    std::abs(x - fm0.phi1) < ball || std::abs(x - fm0.phi2) < ball)
                    continue;
                sup = std::max(sup, std::abs(uf.eval(x, t, e) - classical_u(cs.p, x, t)));
            }
            CHECK(sup <= 5.0 * e);
            if (prev_sup > 0.0) CHECK(prev_sup / sup >= 1.86);
            prev_sup = sup;
        }
    }
}
