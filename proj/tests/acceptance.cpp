// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "dshock/oracle.hpp"
#include "dshock/uwave.hpp"
#include "dshock/vtransport.hpp"
#include "dshock/weak_limit.hpp"

using namespace dshock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& details) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                details.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

Problem quartic_instance() {
    ProblemData d;
    d.U1 = 0.5;
    d.U0 = -0.5;
    d.V1 = 1.0;
    d.V0 = 1.0;
    d.a2 = -1.0;
    d.a1 = 1.0;
    d.v0 = make_profile_const(1.0);
    return Problem(make_flux("quartic", "linear_2u"), std::move(d));
}

}  // namespace

int main() {
    const auto wall = std::chrono::steady_clock::now();
    const MollifierPair moll = make_mollifiers();
    const SwitchTable sw = build_switch_table(moll, 128);
    const RhoTable rho = solve_rho(sw);
    const Problem ref = oracle::make_problem();
    const double A_ref = choose_A(ref, rho);

    // 1. Switch partition identity on the tabulated nodes.
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < sw.size(); ++i)
            worst = std::max(worst, std::abs(sw.b1_node(i) + sw.b2_node(i) - 1.0));
        report(1, "switch identity B1 + B2 = 1", worst <= 1e-9,
               "max deviation " + fmt(worst) + " <= 1e-9 over 601 nodes");
    }

    // 2. Fast-variable dynamics: exact pre-interaction half, relaxation at
    //    the far end, finite accumulated integral.
    {
        const bool exact_neg =
            rho.rho_at(-10.0) == -10.0 && rho.rho_at(-3.0) == -3.0 && rho.rho_at(-0.5) == -0.5;
        const double drive = std::abs(1.0 - 2.0 * rho.b1_of_tau(50.0));
        const double tail = rho.i1_tail();
        const bool pass = exact_neg && drive <= 1e-6 && tail < 1e-8;
        report(2, "fast-variable dynamics", pass,
               "rho==tau pre-interaction " + std::string(exact_neg ? "exact" : "VIOLATED") +
                   ", |1-2B1(rho(50))| = " + fmt(drive) + ", I1 tail = " + fmt(tail));
    }

    // 3. Jacobian positivity with the auto-chosen spreading constant.
    {
        bool pass = true;
        double min_beta = std::numeric_limits<double>::infinity();
        const Problem quartic = quartic_instance();
        for (const Problem* inst : {&ref, &quartic}) {
            const double A = choose_A(*inst, rho);
            for (double eps : {0.1, 0.05, 0.02, 0.01}) {
                for (int i = 0; i <= 300; ++i) {
                    const double t = 3.0 * inst->consts().tstar * i / 300.0;
                    try {
                        min_beta = std::min(min_beta, flow_map(*inst, rho, t, eps, A).beta);
                    } catch (const JacobianNonPositive&) {
                        pass = false;
                    }
                }
            }
        }
        report(3, "flow Jacobian positivity", pass && min_beta > 0.0,
               "min beta = " + fmt(min_beta) +
                   " over t in [0, 3t*] x eps {0.1,0.05,0.02,0.01}, both instances");
    }

    // 4. u against the closed form at t = 1/2 on 2001 grid points, excluding
    //    3 eps balls around the fan edges; first-order decay under halving.
    double sup_u_e1 = 0.0, sup_u_e2 = 0.0;
    {
        UField uf(ref, rho, A_ref);
        const double t = 0.5;
        auto sup_err = [&](double eps) {
            const FlowMap& fm = uf.map_at(t, eps);
            double sup = 0.0;
            for (int i = 0; i < 2001; ++i) {
                const double x = -2.0 + 4.0 * i / 2000.0;
                if (std::abs(x - fm.phi1) < 3.0 * eps || std::abs(x - fm.phi2) < 3.0 * eps)
                    continue;
                sup = std::max(sup, std::abs(uf.eval(x, t, eps) - oracle::u(x, t)));
            }
            return sup;
        };
        sup_u_e1 = sup_err(0.05);
        sup_u_e2 = sup_err(0.025);
        const bool pass = sup_u_e1 <= 5.0 * 0.05 && sup_u_e1 / sup_u_e2 >= 1.7;
        report(4, "u closed-form regression", pass,
               "sup err " + fmt(sup_u_e1) + " <= 0.25 at eps=0.05, halving ratio " +
                   fmt(sup_u_e1 / sup_u_e2) + " >= 1.7");
    }

    // 5. v against the closed form, same setup, excluding 3 eps balls around
    //    all four curves.
    {
        UField uf(ref, rho, 0.1);
        const double t = 0.5;
        auto sup_err = [&](double eps) {
            VField vf(ref, uf, eps, t);
            const FlowMap& fm = uf.map_at(t, eps);
            const double curves[4] = {fm.phi2, vf.curves().phi2_star_at(t),
                                      vf.curves().phi1_star_at(t), fm.phi1};
            double sup = 0.0;
            for (int i = 0; i < 2001; ++i) {
                const double x = -2.0 + 4.0 * i / 2000.0;
                bool excluded = false;
                for (double c : curves) excluded = excluded || std::abs(x - c) < 3.0 * eps;
                if (excluded) continue;
                sup = std::max(sup, std::abs(v_eval(vf, x, t) - oracle::v(x, t)));
            }
            return sup;
        };
        const double s1 = sup_err(0.02);
        const double s2 = sup_err(0.01);
        const bool pass = s1 <= 0.05 && s1 / s2 >= 1.6;
        report(5, "v closed-form regression", pass,
               "sup err " + fmt(s1) + " <= 0.05 at eps=0.02, halving ratio " + fmt(s1 / s2) +
                   " >= 1.6");
    }

    // 6. Point-mass law m(t) = 4t - 0.8 and its location.
    {
        UField uf(ref, rho, A_ref);
        bool pass = true;
        std::ostringstream det;
        for (double t : {1.5, 2.0}) {
            for (double eps : {0.01, 0.005}) {
                VField vf(ref, uf, eps, t);
                const MassEstimate est = delta_mass(vf, t, eps, 25.0 * eps);
                const double want = oracle::mass(t);
                const double rel = std::abs(est.mass - want) / want;
                const double tol = eps <= 0.005 ? 0.02 : 0.05;
                const bool ok = rel <= tol && std::abs(est.location) <= 5.0 * eps;
                pass = pass && ok;
                det << "t=" << t << " eps=" << eps << ": mass rel err " << fmt(rel) << ", |loc| "
                    << fmt(std::abs(est.location)) << "; ";
            }
        }
        report(6, "point-mass law 4t - 0.8", pass, det.str());
    }

    // 7. First-order weak residual of u at t = 2 over three bumps.
    {
        const std::vector<double> eps_list{0.08, 0.04, 0.02, 0.01};
        const TestFunction etas[3] = {{TestFunctionKind::bump, 0.3, 0.9},
                                      {TestFunctionKind::bump, -0.25, 0.7},
                                      {TestFunctionKind::bump, 0.15, 0.5}};
        UField uf(ref, rho, A_ref);
        bool pass = true;
        std::ostringstream det;
        for (const TestFunction& eta : etas) {
            std::vector<double> rs;
            for (double e : eps_list) rs.push_back(residual_u(uf, 2.0, e, eta));
            const double slope = fit_loglog_slope(eps_list, rs);
            pass = pass && slope >= 0.8 && slope <= 1.5;
            det << "slope " << fmt(slope) << " ";
        }
        report(7, "u residual scaling in [0.8, 1.5]", pass, det.str() + "over eps 0.08..0.01");
    }

    // 8. Curve ordering at every step of every solved run, and post-shock
    //    merging onto the limit line at t = 2.
    {
        UField uf(ref, rho, A_ref);
        bool ordered = true;
        double worst_merge = 0.0;
        bool merge_ok = true;
        for (double eps : {0.1, 0.05, 0.02, 0.01}) {
            try {
                VField vf(ref, uf, eps, 2.0);  // ordering asserted per RK4 step
                const BoundaryCurves& bc = vf.curves();
                for (std::size_t i = 0; i < bc.size(); ++i) {
                    const double t = bc.t_node(i);
                    const FlowMap& fm = uf.map_at(t, eps);
                    const double p2s = bc.phi2_star_at(t);
                    const double p1s = p2s + bc.gap_at(t);
                    ordered = ordered && fm.phi2 <= p2s + 1e-10 && bc.gap_at(t) > 0.0 &&
                              p1s <= fm.phi1 + 1e-10;
                }
                const double merge = std::max(std::abs(bc.phi2_star_at(2.0)),
                                              std::abs(bc.phi1_star_at(2.0)));
                worst_merge = std::max(worst_merge, merge / eps);
                merge_ok = merge_ok && merge <= 10.0 * eps;
            } catch (const OrderingViolation&) {
                ordered = false;
            }
        }
        report(8, "curve ordering and merging", ordered && merge_ok,
               std::string("ordering ") + (ordered ? "held" : "VIOLATED") +
                   ", max |phi_i*(2)|/eps = " + fmt(worst_merge) + " <= 10");
    }

    // 9. Admissibility chain on the reference instance; rejection of the
    //    transport speed g = u^3 on the dominance hypothesis.
    {
        const AdmissibilityReport good = check_admissibility(ref.flux(), ref.data());
        const double want[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
        bool chain_ok = good.pass();
        for (int i = 0; i < 5; ++i)
            chain_ok = chain_ok && std::abs(good.chain[i] - want[i]) <= 1e-12;

        ProblemData bad_data = ref.data();
        const AdmissibilityReport bad =
            check_admissibility(make_flux("quadratic", "cubic_u3"), bad_data);
        const bool reject_ok = !bad.transport_ok && !bad.pass();
        report(9, "admissibility screening", chain_ok && reject_ok,
               std::string("chain (-2,-1,0,1,2) ") + (chain_ok ? "passes" : "FAILS") +
                   "; g=u^3 rejected on hypothesis 2: " + (reject_ok ? "yes" : "NO"));
    }

    // 10. Conservation: windowed mass rate against the plateau flux balance.
    {
        UField uf(ref, rho, A_ref);
        VField vf(ref, uf, 0.02, 2.1);
        bool pass = true;
        std::ostringstream det;
        for (double t : {0.5, 2.0}) {
            const double dt = 0.02;
            const double rate = (windowed_vmass(vf, -2.0, 2.0, t + dt) -
                                 windowed_vmass(vf, -2.0, 2.0, t - dt)) /
                                (2.0 * dt);
            const double rel = std::abs(rate - 4.0) / 4.0;
            pass = pass && rel <= 0.01;
            det << "t=" << t << ": rate " << fmt(rate) << " (rel err " << fmt(rel) << ") ";
        }
        report(10, "windowed mass flux balance", pass, det.str());
    }

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
    std::printf("%d/10 criteria passed in %.1f s\n", 10 - g_failures, secs);
    return g_failures;
}
