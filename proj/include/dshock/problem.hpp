#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dshock/errors.hpp"
#include "dshock/flux.hpp"

namespace dshock {

// States and geometry of one problem instance. The middle profile of u is
// implicit: f'(u0(x)) = -K x + b on [a2, a1], pinned by continuity with the
// plateaus, so only the v profile is free data.
struct ProblemData {
    double U1 = 0.0;  // left plateau of u
    double U0 = 0.0;  // right plateau of u
    double V1 = 0.0;  // left plateau of v
    double V0 = 0.0;  // right plateau of v
    double a2 = 0.0;  // left end of the profile interval
    double a1 = 0.0;  // right end of the profile interval
    Profile v0;       // middle v profile on [a2, a1]
    double epsA = std::numeric_limits<double>::quiet_NaN();  // spreading constant; NaN = auto
};

struct DerivedConstants {
    double K = 0.0;        // slope of f' along the initial profile
    double b = 0.0;        // intercept of the same affine relation
    double tstar = 0.0;    // time of gradient catastrophe
    double xstar = 0.0;    // position of the catastrophe
    double c = 0.0;        // twice the shock speed
    double dfp_gap = 0.0;  // f'(U1) - f'(U0)

    double psi0(double t) const { return dfp_gap * t - dfp_gap * tstar; }
};

inline DerivedConstants derive_constants(const FluxPair& flux, const ProblemData& data) {
    if (!(data.a2 < data.a1)) throw InvalidProblem("requires a2 < a1");
    if (data.U1 == data.U0) throw DegenerateStates("U1 == U0: f'(U1) == f'(U0)");

    DerivedConstants c;
    const double fp1 = flux.df(data.U1);
    const double fp0 = flux.df(data.U0);
    c.dfp_gap = fp1 - fp0;
    if (std::abs(c.dfp_gap) < 1e-14 * (1.0 + std::abs(fp1) + std::abs(fp0)))
        throw DegenerateStates("f'(U1) == f'(U0): no finite catastrophe time");

    const double len = data.a1 - data.a2;
    c.K = c.dfp_gap / len;
    c.b = (fp1 * data.a1 - fp0 * data.a2) / len;
    c.tstar = len / c.dfp_gap;
    c.xstar = fp1 * c.tstar + data.a2;  // equals f'(U0) t* + a1 and b/K
    c.c = 2.0 * (flux.f(data.U1) - flux.f(data.U0)) / (data.U1 - data.U0);
    return c;
}

// Inverse of f' on [U0, U1] at y = -K x + b, by safeguarded bisection/Newton.
// Unique by convexity; resolved to ~1e-13.
inline double u0_profile(const FluxPair& flux, const DerivedConstants& consts,
                         const ProblemData& data, double x) {
    const double y = -consts.K * x + consts.b;
    double lo = std::min(data.U0, data.U1);
    double hi = std::max(data.U0, data.U1);
    double flo = flux.df(lo) - y;
    double fhi = flux.df(hi) - y;
    const double scale = 1.0 + std::abs(y);
    const double tol_f = 1e-12 * scale;
    if (flo > tol_f || fhi < -tol_f)
        throw RootNotBracketed("f'(u) = -Kx+b has no root in [U0, U1]; x outside [a2, a1]");
    if (flo >= 0.0) return lo;
    if (fhi <= 0.0) return hi;

    double u = lo + (hi - lo) * (-flo) / (fhi - flo);
    for (int iter = 0; iter < 200; ++iter) {
        const double fu = flux.df(u) - y;
        if (fu > 0.0)
            hi = u;
        else
            lo = u;
        if (std::abs(fu) < 1e-13 * scale || hi - lo < 1e-13 * (1.0 + std::abs(u))) break;
        const double dfu = flux.ddf(u);
        double next = (dfu > 0.0) ? u - fu / dfu : lo;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return u;
}

struct AdmissibilityReport {
    bool convex_ok = false;          // f'' > 0 on the sampled state interval
    double convex_margin = 0.0;      // min f''
    bool transport_ok = false;       // g' - f'' >= 0 on the sampled interval
    double transport_margin = 0.0;   // min (g' - f'')
    bool uhat_found = false;         // g - f' changes sign on (U0, U1)
    double uhat = std::numeric_limits<double>::quiet_NaN();
    bool chain_ok = false;           // g(U0) <= f'(U0) <= c/2 <= f'(U1) <= g(U1)
    double chain[5] = {0, 0, 0, 0, 0};

    bool pass() const { return convex_ok && transport_ok && uhat_found && chain_ok; }
};

// Hypothesis check on a 1000-point state grid with tolerance 1e-10. The
// transport condition is enforced in its non-strict form and the margin
// reported.
inline AdmissibilityReport check_admissibility(const FluxPair& flux, const ProblemData& data) {
    AdmissibilityReport rep;
    const DerivedConstants consts = derive_constants(flux, data);
    const double lo = std::min(data.U0, data.U1);
    const double hi = std::max(data.U0, data.U1);
    const int n = 1000;
    const double tol = 1e-10;

    double min_ddf = std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double u = lo + (hi - lo) * i / n;
        min_ddf = std::min(min_ddf, flux.ddf(u));
        min_gap = std::min(min_gap, flux.dg(u) - flux.ddf(u));
    }
    rep.convex_margin = min_ddf;
    rep.convex_ok = min_ddf > -tol;
    rep.transport_margin = min_gap;
    rep.transport_ok = min_gap >= -tol;

    // g - f' must change sign between the states; scanned on the grid since
    // it may vanish at the states themselves. g == f' identically leaves the
    // crossing non-isolated and is not accepted.
    auto F = [&](double u) { return flux.g(u) - flux.df(u); };
    int prev_sign = 0;
    double prev_u = lo;
    for (int i = 0; i <= n && !rep.uhat_found; ++i) {
        const double u = lo + (hi - lo) * i / n;
        const double fu = F(u);
        const int sign = fu > tol ? 1 : (fu < -tol ? -1 : 0);
        if (prev_sign != 0 && sign != 0 && sign != prev_sign) {
            double a = prev_u, fa = F(prev_u), b = u;
            for (int iter = 0; iter < 200; ++iter) {
                const double m = 0.5 * (a + b);
                const double fm = F(m);
                if ((fm > 0) == (fa > 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
                if (b - a < 1e-13 * (1.0 + std::abs(a))) break;
            }
            rep.uhat = 0.5 * (a + b);
            rep.uhat_found = true;
        }
        if (sign != 0) {
            prev_sign = sign;
            prev_u = u;
        }
    }

    rep.chain[0] = flux.g(data.U0);
    rep.chain[1] = flux.df(data.U0);
    rep.chain[2] = 0.5 * consts.c;
    rep.chain[3] = flux.df(data.U1);
    rep.chain[4] = flux.g(data.U1);
    rep.chain_ok = true;
    for (int i = 0; i + 1 < 5; ++i)
        if (rep.chain[i] > rep.chain[i + 1] + tol) rep.chain_ok = false;
    return rep;
}

// Structural validation of a flux descriptor against the state interval:
// supplied df must match f by central differences, and f must be convex.
inline void validate_flux(const FluxPair& flux, const ProblemData& data) {
    const double lo = std::min(data.U0, data.U1);
    const double hi = std::max(data.U0, data.U1);
    const int n = 1000;
    const double h = 1e-5;
    double prev_df = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double u = lo + (hi - lo) * i / n;
        const double fd = (flux.f(u + h) - flux.f(u - h)) / (2.0 * h);
        const double ref = flux.df(u);
        if (std::abs(fd - ref) > 1e-6 * (1.0 + std::abs(ref)))
            throw InvalidProblem("df is inconsistent with f on the state interval");
        if (flux.ddf(u) < -1e-10)
            throw InvalidProblem("f'' < 0 inside the state interval; profile inversion undefined");
        if (i > 0 && flux.df(u) < prev_df - 1e-12 * (1.0 + std::abs(prev_df)))
            throw InvalidProblem("f' is not monotone on the state interval");
        prev_df = ref;
    }
}

// One immutable problem instance with its derived constants.
class Problem {
public:
    Problem(FluxPair flux, ProblemData data)
        : flux_(std::move(flux)), data_(std::move(data)) {
        if (!(data_.a2 < data_.a1)) throw InvalidProblem("requires a2 < a1");
        if (!(data_.U1 > data_.U0)) throw InvalidProblem("requires U1 > U0 (compressive data)");
        consts_ = derive_constants(flux_, data_);
        validate_flux(flux_, data_);
        for (int i = 0; i <= 64; ++i) {
            const double x = data_.a2 + (data_.a1 - data_.a2) * i / 64.0;
            if (!std::isfinite(data_.v0(x))) throw InvalidProblem("v0 unbounded on [a2, a1]");
        }
    }

    const FluxPair& flux() const { return flux_; }
    const ProblemData& data() const { return data_; }
    const DerivedConstants& consts() const { return consts_; }

    double u0(double x) const { return u0_profile(flux_, consts_, data_, x); }

    // Initial u extended by its plateaus.
    double uhat(double xi) const {
        if (xi < data_.a2) return data_.U1;
        if (xi > data_.a1) return data_.U0;
        return u0(std::clamp(xi, data_.a2, data_.a1));
    }

    // Initial v extended by its plateaus.
    double vhat(double xi) const {
        if (xi < data_.a2) return data_.V1;
        if (xi > data_.a1) return data_.V0;
        return data_.v0(xi);
    }

private:
    FluxPair flux_;
    ProblemData data_;
    DerivedConstants consts_;
};

}  // namespace dshock
