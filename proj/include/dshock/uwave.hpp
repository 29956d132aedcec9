#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <unordered_map>
#include <utility>

#include "dshock/errors.hpp"
#include "dshock/interaction.hpp"
#include "dshock/problem.hpp"

namespace dshock {

// Forward characteristic map at fixed (t, eps). The fan piece is affine,
//     x = beta x0 + alpha,   x0 in [a2, a1],
// with coefficients given by the two accumulated switch integrals
//     J1(t) = int_0^t (B2 - B1) ds,   J2(t) = int_0^t B1 ds,
// evaluated in closed form through the fast-variable table. Outside the fan
// the constant states translate; in the x0 parameterization those pieces have
// slope 1 + eps A, so the full map is continuous, piecewise affine with three
// pieces, and strictly increasing while beta > 0.
struct FlowMap {
    double t = 0.0;
    double eps = 0.0;
    double spread_a = 0.0;     // the constant A
    double beta = 1.0;         // fan slope, d x / d x0
    double alpha = 0.0;        // fan intercept
    double left_speed_int = 0.0;   // accumulated displacement of the U1 region
    double right_speed_int = 0.0;  // accumulated displacement of the U0 region
    double phi1 = 0.0;         // fan image of a1 (right edge)
    double phi2 = 0.0;         // fan image of a2 (left edge)
    double a1 = 0.0;
    double a2 = 0.0;

    double forward(double x0) const {
        const double outer = 1.0 + eps * spread_a;
        const double center = 0.5 * (a1 + a2);
        if (x0 < a2) return outer * x0 - eps * spread_a * center + left_speed_int;
        if (x0 > a1) return outer * x0 - eps * spread_a * center + right_speed_int;
        return beta * x0 + alpha;
    }

    double invert(double x) const {
        const double outer = 1.0 + eps * spread_a;
        const double center = 0.5 * (a1 + a2);
        if (x < phi2) return (x - left_speed_int + eps * spread_a * center) / outer;
        if (x > phi1) return (x - right_speed_int + eps * spread_a * center) / outer;
        return (x - alpha) / beta;
    }
};

inline FlowMap flow_map(const Problem& p, const RhoTable& rho, double t, double eps,
                        double spread_a) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("flow_map requires eps in (0, 1)");
    if (!(t >= 0.0)) throw ConfigError("flow_map requires t >= 0");
    const DerivedConstants& c = p.consts();
    const ProblemData& d = p.data();

    const double tau_t = c.psi0(t) / eps;
    const double tau_0 = c.psi0(0.0) / eps;
    const double j1 = eps / c.dfp_gap * (rho.i1_at(tau_t) - rho.i1_at(tau_0));
    const double j2 = eps / c.dfp_gap * (rho.i2_at(tau_t) - rho.i2_at(tau_0));

    FlowMap fm;
    fm.t = t;
    fm.eps = eps;
    fm.spread_a = spread_a;
    fm.a1 = d.a1;
    fm.a2 = d.a2;
    fm.beta = 1.0 + eps * spread_a - c.K * j1;
    fm.alpha = -eps * spread_a * 0.5 * (d.a1 + d.a2) + c.b * j1 + c.c * j2;
    fm.left_speed_int = p.flux().df(d.U1) * j1 + c.c * j2;
    fm.right_speed_int = p.flux().df(d.U0) * j1 + c.c * j2;
    fm.phi1 = fm.beta * d.a1 + fm.alpha;
    fm.phi2 = fm.beta * d.a2 + fm.alpha;
    if (!(fm.beta > 0.0))
        throw JacobianNonPositive("flow Jacobian <= 0; spreading constant A too small");
    return fm;
}

// Spreading constant guaranteeing a positive Jacobian for all t, with a
// factor-2 safety margin over the accumulated-switch bound. The runtime
// beta > 0 assertion stays in force independently.
inline double choose_A(const Problem& p, const RhoTable& rho, double safety = 2.0) {
    return safety * 2.0 * p.consts().K * rho.i1_infinity() / p.consts().dfp_gap;
}

enum class UForm {
    composition,  // initial data composed with the inverse characteristic map
    mollified     // smoothed two-step blend of the same data
};

// Evaluator for the u field. Flow maps are cached per (t, eps); the cache is
// guarded so concurrent readers may share one instance.
class UField {
public:
    UField(const Problem& p, const RhoTable& rho, double spread_a)
        : p_(&p), rho_(&rho), spread_a_(spread_a) {}

    const Problem& problem() const { return *p_; }
    const RhoTable& rho_table() const { return *rho_; }
    double spread_a() const { return spread_a_; }

    const FlowMap& map_at(double t, double eps) const {
        const Key key{bits(t), bits(eps)};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        FlowMap fm = flow_map(*p_, *rho_, t, eps, spread_a_);
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(key, fm).first->second;
    }

    double eval(double x, double t, double eps, UForm form = UForm::composition) const {
        const FlowMap& fm = map_at(t, eps);
        if (form == UForm::composition) return p_->uhat(fm.invert(x));
        const ProblemData& d = p_->data();
        const MollifierPair& m = rho_->switches().mollifiers();
        const double u1 = p_->u0(std::clamp(fm.invert(x), d.a2, d.a1));
        return d.U0 + (u1 - d.U0) * m.omega1((fm.phi1 - x) / eps) +
               (d.U1 - u1) * m.omega2((fm.phi2 - x) / eps);
    }

private:
    struct Key {
        std::uint64_t t_bits;
        std::uint64_t eps_bits;
        bool operator==(const Key& o) const {
            return t_bits == o.t_bits && eps_bits == o.eps_bits;
        }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::uint64_t>()(k.t_bits * 1000003u ^ k.eps_bits);
        }
    };
    static std::uint64_t bits(double v) {
        std::uint64_t out;
        std::memcpy(&out, &v, sizeof(out));
        return out;
    }

    const Problem* p_;
    const RhoTable* rho_;
    double spread_a_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<Key, FlowMap, KeyHash> cache_;
};

inline double u_eval(const UField& field, double x, double t, double eps,
                     UForm form = UForm::composition) {
    return field.eval(x, t, eps, form);
}

inline double invert_map(const FlowMap& fm, double x) { return fm.invert(x); }

}  // namespace dshock
