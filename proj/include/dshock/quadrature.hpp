#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "dshock/errors.hpp"

namespace dshock {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights by Newton iteration on the Legendre recurrence.
inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

// Composite Gauss-Legendre quadrature with `panels` equal panels of `n` nodes.
template <class F>
double integrate_gl(F&& f, double a, double b, int n, int panels = 1) {
    const GaussRule& rule = gauss_legendre(n);
    const double hp = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double pa = a + p * hp;
        const double mid = pa + 0.5 * hp;
        const double half = 0.5 * hp;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += acc * half;
    }
    return total;
}

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth, bool& converged) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) {
        converged = false;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, converged) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, converged);
}

}  // namespace detail

// Adaptive Simpson quadrature with absolute tolerance. `converged` is cleared
// when the recursion depth runs out before the local tolerance is met.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth, bool& converged) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = detail::simpson(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth, converged);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40) {
    bool converged = true;
    return adaptive_simpson(std::forward<F>(f), a, b, tol, max_depth, converged);
}

}  // namespace dshock
