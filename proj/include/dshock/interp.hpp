#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace dshock {

// Piecewise cubic Hermite interpolant on a uniform grid.
// Node slopes are supplied by the caller; with exact analytic slopes the
// interpolation error is O(h^4) and the derivative error O(h^3).
class HermiteSeries {
public:
    HermiteSeries() = default;

    HermiteSeries(double x0, double h, std::vector<double> y, std::vector<double> dy)
        : x0_(x0), h_(h), y_(std::move(y)), dy_(std::move(dy)) {
        assert(y_.size() == dy_.size());
        assert(y_.size() >= 2);
    }

    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * static_cast<double>(y_.size() - 1); }
    std::size_t size() const { return y_.size(); }
    double node(std::size_t i) const { return x0_ + h_ * static_cast<double>(i); }
    double value_at_node(std::size_t i) const { return y_[i]; }
    double slope_at_node(std::size_t i) const { return dy_[i]; }

    double eval(double x) const {
        const auto [i, s] = locate(x);
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const double h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s);
        const double h11 = s * s * (s - 1);
        return h00 * y_[i] + h10 * h_ * dy_[i] + h01 * y_[i + 1] + h11 * h_ * dy_[i + 1];
    }

    double deriv(double x) const {
        const auto [i, s] = locate(x);
        const double d00 = 6 * s * (s - 1);
        const double d10 = (1 - s) * (1 - 3 * s);
        const double d01 = -6 * s * (s - 1);
        const double d11 = s * (3 * s - 2);
        return (d00 * y_[i] + d01 * y_[i + 1]) / h_ + d10 * dy_[i] + d11 * dy_[i + 1];
    }

private:
    std::pair<std::size_t, double> locate(double x) const {
        const double u = (x - x0_) / h_;
        auto i = static_cast<std::ptrdiff_t>(std::floor(u));
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(y_.size()) - 2);
        return {static_cast<std::size_t>(i), u - static_cast<double>(i)};
    }

    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> y_;
    std::vector<double> dy_;
};

// Fritsch-Carlson slopes for a monotone C^1 interpolant on a uniform grid.
// Flat runs get zero slope, so tabulated plateaus stay exactly flat.
inline std::vector<double> pchip_slopes(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    assert(n >= 2);
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / h;

    std::vector<double> m(n);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
            m[i] = 0.0;
        } else {
            // Harmonic mean of neighbouring secants.
            m[i] = 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]);
        }
    }
    // Limit endpoint slopes to preserve monotonicity.
    auto limit_end = [](double m_end, double d_adj) {
        if (d_adj == 0.0 || (m_end > 0) != (d_adj > 0)) return 0.0;
        if (std::abs(m_end) > 3.0 * std::abs(d_adj)) return 3.0 * d_adj;
        return m_end;
    };
    m[0] = limit_end(m[0], d[0]);
    m[n - 1] = limit_end(m[n - 1], d[n - 2]);
    return m;
}

// Monotone cubic interpolant (PCHIP) on a uniform grid.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(double x0, double h, std::vector<double> y)
        : series_(x0, h, y, pchip_slopes(y, h)) {}

    double x_min() const { return series_.x_min(); }
    double x_max() const { return series_.x_max(); }
    double eval(double x) const { return series_.eval(x); }
    double deriv(double x) const { return series_.deriv(x); }

private:
    HermiteSeries series_;
};

}  // namespace dshock
