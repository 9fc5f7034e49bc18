#pragma once

// Quadrature, tabulated densities, characteristic-function inversion,
// tilted convolution and inverse-CDF lookup.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "errors.hpp"

namespace annulus_moduli {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 1 << 14;
    // Rate of the integrand's exponential decay, if known. Used to rescale
    // the variable so the double-exponential nodes land where the mass is.
    std::optional<double> tail_decay_hint;

    void validate() const {
        detail::require(abs_tol > 0.0 && abs_tol <= 1e-2, "QuadratureConfig: abs_tol must lie in (0, 1e-2]");
        detail::require(rel_tol > 0.0 && rel_tol <= 1e-2, "QuadratureConfig: rel_tol must lie in (0, 1e-2]");
        detail::require(max_subdivisions >= 64, "QuadratureConfig: max_subdivisions must be >= 64");
        detail::require(!tail_decay_hint || (*tail_decay_hint > 0.0 && std::isfinite(*tail_decay_hint)),
                        "QuadratureConfig: tail_decay_hint must be positive");
    }
};

struct QuadResult {
    double value;
    double err_est;
};

namespace detail {

inline std::size_t refinements_for(int max_subdivisions) {
    int levels = 0;
    while ((1 << (levels + 1)) <= max_subdivisions) ++levels;
    return static_cast<std::size_t>(std::clamp(levels - 4, 4, 15));
}

inline QuadResult checked(double value, double err, const QuadratureConfig& cfg, const char* who) {
    if (!std::isfinite(value)) throw AccuracyError(std::string(who) + ": non-finite result", value, err);
    if (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value)))
        throw AccuracyError(std::string(who) + ": tolerance not met", value, err);
    return {value, err};
}

// Internal stopping tolerance: the DE error estimate is the difference of
// successive levels, which overstates the true error of the finer level.
inline double de_tolerance(const QuadratureConfig& cfg) { return std::min(cfg.rel_tol, 1e-10) * 1e-2; }

// Runs a Boost quadrature call, reporting its evaluation errors (for
// example a non-finite integrand) as AccuracyError.
template <class Call>
double guarded(Call&& call, const char* who) {
    try {
        return call();
    } catch (const std::domain_error&) {
        throw;
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const AccuracyError*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) throw;
        throw AccuracyError(std::string(who) + ": " + e.what());
    }
}

}  // namespace detail

// Integral of f over (0, inf) by exp-sinh quadrature.
template <class F>
QuadResult integrate_halfline(F&& f, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    const double scale = cfg.tail_decay_hint ? 1.0 / *cfg.tail_decay_hint : 1.0;
    thread_local boost::math::quadrature::exp_sinh<double> integrator(detail::refinements_for(1 << 14));
    boost::math::quadrature::exp_sinh<double> local(detail::refinements_for(cfg.max_subdivisions));
    auto& quad = cfg.max_subdivisions == (1 << 14) ? integrator : local;
    double err = 0.0, l1 = 0.0;
    const double v = detail::guarded(
        [&] { return quad.integrate([&](double s) { return f(s * scale); }, detail::de_tolerance(cfg), &err, &l1); }, "integrate_halfline");
    return detail::checked(v * scale, err * scale, cfg, "integrate_halfline");
}

// Integral of f over the whole real line by sinh-sinh quadrature.
template <class F>
QuadResult integrate_line(F&& f, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    const double scale = cfg.tail_decay_hint ? 1.0 / *cfg.tail_decay_hint : 1.0;
    boost::math::quadrature::sinh_sinh<double> quad(detail::refinements_for(cfg.max_subdivisions));
    double err = 0.0, l1 = 0.0;
    const double v = detail::guarded(
        [&] { return quad.integrate([&](double s) { return f(s * scale); }, detail::de_tolerance(cfg), &err, &l1); }, "integrate_line");
    return detail::checked(v * scale, err * scale, cfg, "integrate_line");
}

// Integral of f over [a, b] by tanh-sinh quadrature.
template <class F>
QuadResult integrate_interval(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    boost::math::quadrature::tanh_sinh<double> quad(detail::refinements_for(cfg.max_subdivisions));
    double err = 0.0, l1 = 0.0;
    const double v = detail::guarded([&] { return quad.integrate(f, a, b, detail::de_tolerance(cfg), &err, &l1); }, "integrate_interval");
    return detail::checked(v, err, cfg, "integrate_interval");
}

// Composite 20-point Gauss-Legendre over [a, b] split into n panels.
template <class F>
double gauss_panels(F&& f, double a, double b, int n) {
    using G = boost::math::quadrature::gauss<double, 20>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    const double h = (b - a) / n;
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
        const double c = a + (p + 0.5) * h, r = 0.5 * h;
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += w[i] * (f(c + r * x[i]) + f(c - r * x[i]));
        }
        total += s * r;
    }
    return total;
}

class Grid {
public:
    static Grid uniform(double min, double max, std::size_t count) {
        detail::require(count >= 64, "Grid: count must be >= 64");
        detail::require(std::isfinite(min) && std::isfinite(max) && min < max, "Grid: need finite min < max");
        std::vector<double> p(count);
        const double h = (max - min) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) p[i] = min + h * static_cast<double>(i);
        p.back() = max;
        return Grid(std::move(p));
    }

    static Grid log_spaced(double min, double max, std::size_t count) {
        detail::require(min > 0.0, "Grid: log-spaced grid needs min > 0");
        Grid g = uniform(std::log(min), std::log(max), count);
        for (auto& v : g.pts_) v = std::exp(v);
        return g;
    }

    // Geometric spacing with the given ratio from tau_min to tau_switch, then
    // uniform steps up to tau_max. Suited to densities with an integrable
    // power-law singularity at the origin.
    static Grid graded(double tau_min, double tau_switch, double tau_max, double ratio, double step) {
        detail::require(tau_min > 0.0 && tau_min < tau_switch && tau_switch < tau_max,
                        "Grid: need 0 < tau_min < tau_switch < tau_max");
        detail::require(ratio > 1.0 && step > 0.0, "Grid: need ratio > 1 and step > 0");
        std::vector<double> p;
        const auto n_geo = static_cast<std::size_t>(std::ceil(std::log(tau_switch / tau_min) / std::log(ratio)));
        const double r = std::pow(tau_switch / tau_min, 1.0 / static_cast<double>(n_geo));
        for (std::size_t i = 0; i < n_geo; ++i) p.push_back(tau_min * std::pow(r, static_cast<double>(i)));
        const auto n_lin = static_cast<std::size_t>(std::ceil((tau_max - tau_switch) / step));
        const double h = (tau_max - tau_switch) / static_cast<double>(n_lin);
        for (std::size_t i = 0; i <= n_lin; ++i) p.push_back(tau_switch + h * static_cast<double>(i));
        p.back() = tau_max;
        return Grid(std::move(p));
    }

    static Grid explicit_points(std::vector<double> p) { return Grid(std::move(p)); }

    const std::vector<double>& points() const { return pts_; }
    std::size_t size() const { return pts_.size(); }
    double min() const { return pts_.front(); }
    double max() const { return pts_.back(); }
    double operator[](std::size_t i) const { return pts_[i]; }

private:
    explicit Grid(std::vector<double> p) : pts_(std::move(p)) {
        detail::require(pts_.size() >= 64, "Grid: at least 64 points required");
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            detail::require(std::isfinite(pts_[i]), "Grid: points must be finite");
            if (i > 0) detail::require(pts_[i] > pts_[i - 1], "Grid: points must be strictly increasing");
        }
    }
    std::vector<double> pts_;
};

namespace detail {

inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

}  // namespace detail

// Tabulated density. Mass and all moments use the trapezoid rule on the
// grid; interpolation is linear and zero outside the grid.
struct DensityTable {
    std::vector<double> grid;
    std::vector<double> values;
    double mass = 0.0;
    double tail_bound = 0.0;
    double clamp_mass = 0.0;

    DensityTable() = default;
    DensityTable(std::vector<double> g, std::vector<double> v, double tail = 0.0, double clamped = 0.0)
        : grid(std::move(g)), values(std::move(v)), tail_bound(tail), clamp_mass(clamped) {
        detail::require(grid.size() == values.size(), "DensityTable: grid and values differ in length");
        detail::require(grid.size() >= 64, "DensityTable: at least 64 points required");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            detail::require(std::isfinite(values[i]) && values[i] >= 0.0, "DensityTable: values must be finite and >= 0");
            if (i > 0) detail::require(grid[i] > grid[i - 1], "DensityTable: grid must be strictly increasing");
        }
        mass = detail::trapezoid(grid, values);
    }

    std::size_t size() const { return grid.size(); }
    bool is_normalized(double tol = 1e-6) const { return std::abs(mass - 1.0) <= tol; }

    DensityTable normalized() const {
        if (!(mass > 0.0) || !std::isfinite(mass)) throw AccuracyError("DensityTable: cannot normalize zero mass");
        std::vector<double> v(values);
        for (auto& x : v) x /= mass;
        return DensityTable(grid, std::move(v), tail_bound / mass, clamp_mass / mass);
    }

    double operator()(double x) const {
        if (x < grid.front() || x > grid.back()) return 0.0;
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        if (it == grid.end()) return values.back();
        const auto i = static_cast<std::size_t>(it - grid.begin());
        const double t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
        return values[i - 1] + t * (values[i] - values[i - 1]);
    }

    template <class F>
    double expectation(F&& f) const {
        double s = 0.0;
        double prev = values[0] * f(grid[0]);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double cur = values[i] * f(grid[i]);
            s += 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
            prev = cur;
        }
        return s / mass;
    }

    double mean() const {
        return expectation([](double x) { return x; });
    }

    // Cumulative distribution at the grid nodes, scaled to end at 1.
    std::vector<double> cdf_nodes() const {
        std::vector<double> c(grid.size(), 0.0);
        for (std::size_t i = 1; i < grid.size(); ++i)
            c[i] = c[i - 1] + 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
        const double total = c.back();
        for (auto& v : c) v /= total;
        return c;
    }

    // Mass of [x, grid end] relative to the table mass.
    double upper_mass(double x) const {
        double s = 0.0;
        for (std::size_t i = grid.size() - 1; i > 0 && grid[i] > x; --i) {
            const double lo = std::max(grid[i - 1], x);
            s += 0.5 * ((*this)(lo) + values[i]) * (grid[i] - lo);
        }
        return s / mass;
    }
};

// Piecewise-linear inversion of the tabulated CDF.
class InverseCdf {
public:
    explicit InverseCdf(const DensityTable& d) : x_(d.grid), c_(d.cdf_nodes()) {}

    double operator()(double u) const {
        if (!(u > 0.0 && u < 1.0)) throw DomainError("inverse_cdf: u must lie in (0, 1)");
        auto it = std::lower_bound(c_.begin(), c_.end(), u);
        auto i = static_cast<std::size_t>(it - c_.begin());
        if (i == 0) return x_.front();
        if (i >= c_.size()) return x_.back();
        // Skip flat stretches so the result is the left-most preimage.
        const double dc = c_[i] - c_[i - 1];
        const double t = dc > 0.0 ? (u - c_[i - 1]) / dc : 0.0;
        return x_[i - 1] + t * (x_[i] - x_[i - 1]);
    }

    double cdf(double x) const {
        if (x <= x_.front()) return 0.0;
        if (x >= x_.back()) return 1.0;
        const auto i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
        return c_[i - 1] + t * (c_[i] - c_[i - 1]);
    }

private:
    std::vector<double> x_;
    std::vector<double> c_;
};

inline double inverse_cdf(const DensityTable& d, double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("inverse_cdf: u must lie in (0, 1)");
    if (!d.is_normalized()) throw DomainError("inverse_cdf: table is not normalized");
    return InverseCdf(d)(u);
}

namespace detail {

// First t on a 1/8 lattice beyond which |cf| stays below 1e-17 for a while.
template <class F>
double cf_cutoff(F& cf) {
    const double step = 0.125;
    int quiet = 0;
    for (double t = step; t < 1e4; t += step) {
        const double v = std::abs(cf(t));
        if (!std::isfinite(v)) throw DomainError("cf_to_density: characteristic function is not finite");
        quiet = v < 1e-17 ? quiet + 1 : 0;
        if (quiet >= 8) return t;
    }
    throw DomainError("cf_to_density: characteristic function does not decay");
}

}  // namespace detail

// Density of a real variable with even real characteristic function cf:
// f(s) = (1/pi) int_0^inf cos(t s) cf(t) dt, evaluated on the grid.
template <class F>
DensityTable cf_to_density(F cf, const Grid& grid) {
    const double c0 = cf(0.0);
    if (!(std::abs(c0 - 1.0) <= 1e-8)) throw DomainError("cf_to_density: cf(0) must equal 1");
    const double T = detail::cf_cutoff(cf);
    const double smax = std::max(std::abs(grid.min()), std::abs(grid.max()));
    const double h = std::min(0.5, 2.0 * std::numbers::pi / std::max(smax, 1.0));
    const int panels = static_cast<int>(std::ceil(T / h));
    const double hp = T / panels;

    using G = boost::math::quadrature::gauss<double, 20>;
    const auto& gx = G::abscissa();
    const auto& gw = G::weights();
    std::vector<double> t, w;
    t.reserve(panels * gx.size() * 2);
    w.reserve(t.capacity());
    for (int p = 0; p < panels; ++p) {
        const double c = (p + 0.5) * hp, r = 0.5 * hp;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            if (gx[i] == 0.0) {
                t.push_back(c);
                w.push_back(gw[i] * r * cf(c));
                continue;
            }
            t.push_back(c + r * gx[i]);
            w.push_back(gw[i] * r * cf(c + r * gx[i]));
            t.push_back(c - r * gx[i]);
            w.push_back(gw[i] * r * cf(c - r * gx[i]));
        }
    }

    const auto& s = grid.points();
    std::vector<double> v(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) acc += w[i] * std::cos(t[i] * s[k]);
        v[k] = acc / std::numbers::pi;
    }

    // Clamp the inversion's negative ripple and account for it.
    double clamped = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < 0.0) {
            const double dl = k > 0 ? s[k] - s[k - 1] : 0.0;
            const double dr = k + 1 < s.size() ? s[k + 1] - s[k] : 0.0;
            clamped += -v[k] * 0.5 * (dl + dr);
            v[k] = 0.0;
        }
    }
    if (clamped > 1e-8) throw AccuracyError("cf_to_density: clamped negative mass exceeds 1e-8", clamped);
    DensityTable d(std::vector<double>(s), std::move(v), 0.0, clamped);
    d.tail_bound = std::max(0.0, 1.0 - d.mass);
    return d;
}

// Normalized convolution of the e^{rate x}-tilted, renormalized inputs.
// Both tables must share one grid starting near 0. The integral over [0, x]
// is split at x/2 so each factor is evaluated where it is tabulated densely,
// which also makes the result exactly symmetric in (d1, d2).
inline DensityTable tilt_convolve(const DensityTable& d1, const DensityTable& d2, double tilt_rate) {
    if (d1.grid != d2.grid) throw DomainError("tilt_convolve: grids differ");
    if (!(d1.grid.front() >= 0.0)) throw DomainError("tilt_convolve: grid must lie in [0, inf)");
    const auto& x = d1.grid;
    const std::size_t n = x.size();

    auto tilt = [&](const DensityTable& d, double& tail) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = d.values[i] * std::exp(tilt_rate * x[i]);
        DensityTable t(x, std::move(v));
        if (!(t.mass > 0.0) || !std::isfinite(t.mass)) throw AccuracyError("tilt_convolve: tilted mass underflow");
        tail = d.tail_bound * std::exp(std::max(0.0, tilt_rate) * x.back()) / t.mass;
        return t.normalized();
    };
    double tail1 = 0.0, tail2 = 0.0;
    const DensityTable a = tilt(d1, tail1);
    const DensityTable b = tilt(d2, tail2);

    // int_0^{X/2} p(s) q(X - s) ds on the grid nodes below X/2. The
    // interpolation cell of X - s is tracked as s increases.
    auto half = [&](const DensityTable& p, const DensityTable& q, std::size_t k) {
        const double X = x[k], H = 0.5 * X;
        std::size_t m = k;
        auto qat = [&](double y) {
            while (m > 1 && x[m - 1] > y) --m;
            const double t = (y - x[m - 1]) / (x[m] - x[m - 1]);
            return q.values[m - 1] + t * (q.values[m] - q.values[m - 1]);
        };
        double prev = p.values[0] * qat(X - x[0]);
        double s = prev * x[0];
        double prev_s = x[0];
        std::size_t j = 1;
        for (; j < n && x[j] < H; ++j) {
            const double cur = p.values[j] * qat(X - x[j]);
            s += 0.5 * (prev + cur) * (x[j] - prev_s);
            prev = cur;
            prev_s = x[j];
        }
        if (H > prev_s) s += 0.5 * (prev + p(H) * qat(H)) * (H - prev_s);
        return s;
    };

    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (x[k] <= 2.0 * x[0]) continue;
        out[k] = half(a, b, k) + half(b, a, k);
    }
    DensityTable c(x, std::move(out));
    if (!(c.mass > 0.0) || !std::isfinite(c.mass)) throw AccuracyError("tilt_convolve: output mass underflow");
    const double T = x.back();
    c.tail_bound = tail1 + tail2 + a.upper_mass(0.5 * T) + b.upper_mass(0.5 * T);
    DensityTable r = c.normalized();
    r.tail_bound = c.tail_bound;
    return r;
}

}  // namespace annulus_moduli
