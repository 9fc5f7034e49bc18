#pragma once

// Random variates: inverse-CDF sampling from tables, Brownian exit and
// last-zero times by discretized paths, and modulus samplers.

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "laws.hpp"
#include "rng.hpp"
#include "transforms.hpp"

namespace annulus_moduli {

struct PathConfig {
    double dt = 1e-5;
    double max_time = 1e3;

    void validate() const {
        detail::require(dt > 0.0 && dt <= 1e-2, "PathConfig: dt must lie in (0, 1e-2]");
        detail::require(max_time > 0.0 && std::isfinite(max_time), "PathConfig: max_time must be finite and positive");
    }
};

// Draws from a normalized table through a prebuilt inverse CDF.
class TableSampler {
public:
    explicit TableSampler(DensityTable d) : table_(std::move(d)), inv_(check(table_)) {}

    double operator()(RngStream& rng) const { return inv_(rng.uniform()); }
    const DensityTable& table() const { return table_; }
    double cdf(double x) const { return inv_.cdf(x); }

    std::vector<double> draw(std::size_t n, RngStream& rng) const {
        std::vector<double> out(n);
        for (auto& x : out) x = (*this)(rng);
        return out;
    }

private:
    static const DensityTable& check(const DensityTable& d) {
        if (!d.is_normalized()) throw DomainError("sample_density: table is not normalized");
        return d;
    }

    DensityTable table_;
    InverseCdf inv_;
};

inline double sample_density(const DensityTable& d, RngStream& rng) { return TableSampler(d)(rng); }

struct PathSample {
    double exit_time;
    double last_zero;  // last time the path was at 0 before exit; 0 if it never was
    bool censored;
};

// Euler path from a until it leaves (-1, 1). Within each step the Brownian
// bridge may cross a level x = b it did not reach at the grid points; that
// happens with probability exp(-2 (b - x0)(b - x1) / dt) and is resolved with
// one uniform draw. The same correction locates zeros hidden inside a step.
inline PathSample simulate_exit_path(double a, const PathConfig& cfg, RngStream& rng) {
    cfg.validate();
    if (!(std::abs(a) < 1.0)) throw DomainError("sample_bm_exit: start must lie in (-1, 1)");
    const double dt = cfg.dt, sd = std::sqrt(dt), near = 20.0 * dt;
    double x = a, t = 0.0, last_zero = 0.0;
    while (t < cfg.max_time) {
        const double xn = x + sd * rng.normal();
        if (xn >= 1.0 || xn <= -1.0) {
            const double b = xn >= 1.0 ? 1.0 : -1.0;
            if (x * xn < 0.0) last_zero = t + dt * x / (x - xn);
            return {t + dt * (b - x) / (xn - x), last_zero, false};
        }
        const double up = (1.0 - x) * (1.0 - xn), dn = (1.0 + x) * (1.0 + xn);
        if (up < near && rng.uniform() < std::exp(-2.0 * up / dt)) return {t + 0.5 * dt, last_zero, false};
        if (dn < near && rng.uniform() < std::exp(-2.0 * dn / dt)) return {t + 0.5 * dt, last_zero, false};
        const double z = x * xn;
        if (z <= 0.0) {
            last_zero = (x == xn) ? t : t + dt * x / (x - xn);
        } else if (z < near && rng.uniform() < std::exp(-2.0 * z / dt)) {
            last_zero = t + 0.5 * dt;
        }
        x = xn;
        t += dt;
    }
    return {t, last_zero, true};
}

// Y_a = inf{t : |B^a_t| = 1}.
inline PathSample sample_bm_exit(double a, const PathConfig& cfg, RngStream& rng) { return simulate_exit_path(a, cfg, rng); }

// T_0 = sup{t < Y_0 : B^0_t = 0}, with the exit time of the same path.
inline PathSample sample_last_zero(const PathConfig& cfg, RngStream& rng) { return simulate_exit_path(0.0, cfg, rng); }

// Batch of paths split over kStreams fixed streams (seed, base_stream + s);
// censored paths are dropped and counted.
struct PathBatch {
    std::vector<PathSample> samples;
    std::size_t censored = 0;
};

inline PathBatch simulate_paths(double a, std::size_t n, const PathConfig& cfg, std::uint64_t seed, std::uint64_t base_stream = 0) {
    std::vector<PathSample> all(n);
    parallel_tasks(kStreams, [&](int s) {
        RngStream rng(seed, base_stream + static_cast<std::uint64_t>(s));
        const auto [b, e] = stream_block(n, s);
        for (std::size_t i = b; i < e; ++i) all[i] = simulate_exit_path(a, cfg, rng);
    });
    PathBatch out;
    for (const auto& p : all) {
        if (p.censored)
            ++out.censored;
        else
            out.samples.push_back(p);
    }
    return out;
}

inline TableSampler cle_modulus_sampler(const CleParams& p, int j) { return TableSampler(cle_mod_density(p, j)); }

// Builds the table on every call; use cle_modulus_sampler for repeated draws.
inline double sample_cle_modulus(const CleParams& p, int j, RngStream& rng) { return cle_modulus_sampler(p, j)(rng); }

// Path construction of Mod(eta_1): the untilted variable
// M = (kappa pi/8) T_0 + (2 pi/kappa) Y_{kappa/4} is accepted with probability
// min(1, e^{c (M - cap)}), c = pi kappa u0^2/4. The cap is placed where the
// tilted law has mass below cap_mass; draws beyond it are accepted with
// probability 1, which is the only bias.
struct PathModulusSample {
    double value;
    std::size_t proposals;
    std::size_t censored;
};

inline PathModulusSample sample_cle_modulus_paths(const CleParams& p, const PathConfig& cfg, RngStream& rng, double cap_mass = 1e-6) {
    const double c = cle_tilt_rate(p), r = cle_decay_rate(p);
    const double cap = (-std::log(cap_mass) + 3.0) / r;
    PathModulusSample out{0.0, 0, 0};
    for (;;) {
        const PathSample z = simulate_exit_path(0.0, cfg, rng);
        // kappa = 4 starts Y on the boundary: Y_1 = 0.
        const PathSample y = p.kappa < 4.0 ? simulate_exit_path(p.kappa / 4.0, cfg, rng) : PathSample{0.0, 0.0, false};
        ++out.proposals;
        if (z.censored || y.censored) {
            ++out.censored;
            continue;
        }
        const double yv = y.exit_time;
        const double m = p.kappa * detail::pi / 8.0 * z.last_zero + 2.0 * detail::pi / p.kappa * yv;
        if (m >= cap || rng.uniform() < std::exp(c * (m - cap))) {
            out.value = m;
            return out;
        }
    }
}

inline TableSampler ba_modulus_sampler(double a, double b) { return TableSampler(ba_modulus_density(a, b)); }

inline double sample_ba_modulus(double a, double b, RngStream& rng) { return ba_modulus_sampler(a, b)(rng); }

}  // namespace annulus_moduli
