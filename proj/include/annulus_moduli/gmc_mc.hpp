#pragma once

// Monte Carlo for boundary GMC lengths on the cylinder [0, tau] x R/Z.
//
// The free-boundary GFF with Dirichlet form (2 pi)^{-1} int |grad f|^2 has
// covariance 2 pi (-Laplacian_Neumann)^{-1} with the constant mode removed.
// Restricted to the two boundary circles it is stationary in y, so each
// transverse frequency m carries a 2x2 block over the pair of circles:
//   m != 0: [coth(2 pi |m| tau), 1/sinh(2 pi |m| tau)] / |m|
//   m  = 0: [2 pi tau/3, -pi tau/3]
// (same-circle entry first). These are the longitudinal cosine sums done in
// closed form; an explicit truncated sum is available through k_cut.

#include <cmath>
#include <complex>
#include <cstdint>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "errors.hpp"
#include "laws.hpp"
#include "rng.hpp"

namespace annulus_moduli {

struct CylinderSpec {
    double tau = 1.0;
    int n_boundary = 1024;
    int m_cut = 0;  // 0: n_boundary/2 - 1
    long k_cut = 0;  // 0: longitudinal sum in closed form

    int modes() const { return m_cut > 0 ? m_cut : n_boundary / 2 - 1; }

    void validate() const {
        detail::require(tau > 0.0 && std::isfinite(tau), "CylinderSpec: tau must be positive");
        detail::require(n_boundary >= 128 && (n_boundary & (n_boundary - 1)) == 0,
                        "CylinderSpec: n_boundary must be a power of two >= 128");
        detail::require(m_cut >= 0 && m_cut < n_boundary / 2, "CylinderSpec: m_cut must lie in [0, n_boundary/2)");
        detail::require(k_cut >= 0, "CylinderSpec: k_cut must be >= 0");
    }
};

struct CovBlock {
    double same;
    double cross;
};

struct BoundaryCov {
    CylinderSpec spec;
    std::vector<CovBlock> blocks;  // index m = 0 .. modes()
    double point_variance;          // Var h(y) on either circle
};

namespace detail {

inline CovBlock closed_block(int m, double tau) {
    if (m == 0) return {2.0 * pi * tau / 3.0, -pi * tau / 3.0};
    const double w = 2.0 * pi * m * tau;
    if (w > 700.0) return {1.0 / m, 0.0};
    return {1.0 / (m * std::tanh(w)), 1.0 / (m * std::sinh(w))};
}

// 2 pi sum_k phi_k(a) phi_k(b) / (||phi_k||^2 lambda_{k,m}) over k <= K,
// phi_k(s) = cos(k pi s / tau), lambda = (k pi/tau)^2 + (2 pi m)^2.
inline CovBlock explicit_block(int m, double tau, long K) {
    double same = 0.0, cross = 0.0;
    if (m != 0) same = cross = 2.0 * pi / (tau * 4.0 * pi * pi * m * m);
    for (long k = K; k >= 1; --k) {
        const double lam = std::pow(k * pi / tau, 2) + std::pow(2.0 * pi * m, 2);
        const double v = 2.0 * pi * 2.0 / (tau * lam);
        same += v;
        cross += (k % 2 == 0) ? v : -v;
    }
    return {same, cross};
}

}  // namespace detail

inline BoundaryCov boundary_covariance(const CylinderSpec& spec) {
    spec.validate();
    const int M = spec.modes();
    if (spec.k_cut > 0) {
        // sum_{k > K} 4 tau / (pi k^2) <= 4 tau / (pi K)
        const double tail = 4.0 * spec.tau / (detail::pi * static_cast<double>(spec.k_cut));
        if (tail > 1e-10) throw AccuracyError("boundary_covariance: k_cut too small for a 1e-10 covariance tail", 0.0, tail);
    }
    BoundaryCov cov{spec, std::vector<CovBlock>(M + 1), 0.0};
    for (int m = 0; m <= M; ++m) {
        CovBlock b = spec.k_cut > 0 ? detail::explicit_block(m, spec.tau, spec.k_cut) : detail::closed_block(m, spec.tau);
        // eigenvalues same +- cross must be >= 0; clamp rounding
        if (b.same - std::abs(b.cross) < -1e-10) throw AccuracyError("boundary_covariance: block not positive semidefinite");
        if (b.same < std::abs(b.cross)) b.cross = std::copysign(b.same, b.cross);
        cov.blocks[m] = b;
    }
    double v = cov.blocks[0].same;
    for (int m = 1; m <= M; ++m) v += 2.0 * cov.blocks[m].same;
    cov.point_variance = v;
    return cov;
}

// Entry of the full covariance between (circle a, y) and (circle b, y').
inline double boundary_cov_entry(const BoundaryCov& cov, int a, double y, int b, double y2) {
    const bool same = a == b;
    double s = same ? cov.blocks[0].same : cov.blocks[0].cross;
    for (std::size_t m = 1; m < cov.blocks.size(); ++m)
        s += 2.0 * (same ? cov.blocks[m].same : cov.blocks[m].cross) * std::cos(2.0 * detail::pi * m * (y - y2));
    return s;
}

struct BoundaryField {
    std::vector<double> h0;  // circle s = 0 at y = i / n
    std::vector<double> h1;  // circle s = tau
};

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

// Reusable buffers and an inverse real FFT plan for one circle size.
class FieldSampler {
public:
    explicit FieldSampler(const BoundaryCov& cov) : cov_(cov), n_(cov.spec.n_boundary) {
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n_ / 2 + 1)));
        out_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        plan_ = fftw_plan_dft_c2r_1d(n_, spec_, out_, FFTW_ESTIMATE);
    }
    FieldSampler(const FieldSampler&) = delete;
    FieldSampler& operator=(const FieldSampler&) = delete;
    ~FieldSampler() {
        {
            std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
            fftw_destroy_plan(plan_);
        }
        fftw_free(spec_);
        fftw_free(out_);
    }

    // h(y) = Z_0 + sum_{m>=1} A_m cos(2 pi m y) + B_m sin(2 pi m y), with
    // (A_m^0, A_m^1) and (B_m^0, B_m^1) independent N(0, 2 block_m).
    // include_zero_mode = false gives the lateral field.
    BoundaryField sample(RngStream& rng, bool include_zero_mode = true) {
        const int M = static_cast<int>(cov_.blocks.size()) - 1;
        std::vector<std::complex<double>> x0(n_ / 2 + 1), x1(n_ / 2 + 1);
        for (int m = 0; m <= M; ++m) {
            const CovBlock& b = cov_.blocks[m];
            const double f = m == 0 ? 1.0 : 2.0;
            const double sp = std::sqrt(f * std::max(0.0, b.same + b.cross) / 2.0);
            const double sm = std::sqrt(f * std::max(0.0, b.same - b.cross) / 2.0);
            // (1,1)/sqrt2 and (1,-1)/sqrt2 eigenvectors
            const double g1 = rng.normal(), g2 = rng.normal();
            const double a0 = sp * g1 + sm * g2, a1 = sp * g1 - sm * g2;
            if (m == 0) {
                if (include_zero_mode) {
                    x0[0] = a0;
                    x1[0] = a1;
                }
                continue;
            }
            const double g3 = rng.normal(), g4 = rng.normal();
            const double b0 = sp * g3 + sm * g4, b1 = sp * g3 - sm * g4;
            x0[m] = {0.5 * a0, -0.5 * b0};
            x1[m] = {0.5 * a1, -0.5 * b1};
        }
        return {transform(x0), transform(x1)};
    }

private:
    std::vector<double> transform(const std::vector<std::complex<double>>& x) {
        for (int k = 0; k <= n_ / 2; ++k) {
            spec_[k][0] = x[k].real();
            spec_[k][1] = x[k].imag();
        }
        fftw_execute_dft_c2r(plan_, spec_, out_);
        return std::vector<double>(out_, out_ + n_);
    }

    const BoundaryCov& cov_;
    int n_;
    fftw_complex* spec_;
    double* out_;
    fftw_plan plan_;
};

inline BoundaryField sample_boundary_field(const BoundaryCov& cov, RngStream& rng, bool include_zero_mode = true) {
    FieldSampler s(cov);
    return s.sample(rng, include_zero_mode);
}

// Wick-ordered Riemann sum (1/n) sum exp((g/2) h_i - (g^2/8) Var h_i).
inline double gmc_length(const std::vector<double>& field, double gamma, double variance) {
    if (!(gamma >= 0.0 && gamma < 2.0)) throw DomainError("gmc_length: gamma must lie in [0, 2)");
    detail::require(!field.empty(), "gmc_length: empty field");
    const double shift = gamma * gamma / 8.0 * variance;
    double s = 0.0;
    for (double h : field) s += std::exp(gamma / 2.0 * h - shift);
    return s / static_cast<double>(field.size());
}

// Pointwise variance with or without the zero mode.
inline double field_variance(const BoundaryCov& cov, bool include_zero_mode) {
    return include_zero_mode ? cov.point_variance : cov.point_variance - cov.blocks[0].same;
}

struct McRun {
    std::uint64_t seed;
    std::size_t n_samples;
    double gamma;
    CylinderSpec spec;
    std::vector<double> x;
    std::vector<double> re, im;        // estimates of E[e^{i x D}]
    std::vector<double> se_re, se_im;  // jackknife standard errors
};

namespace detail {

// log L1 - log L0 for n fields, split over kStreams streams.
inline std::vector<double> log_ratio_draws(const CylinderSpec& spec, double gamma, std::size_t n, std::uint64_t seed,
                                           bool include_zero_mode) {
    const BoundaryCov cov = boundary_covariance(spec);
    const double var = field_variance(cov, include_zero_mode);
    std::vector<double> d(n);
    parallel_tasks(kStreams, [&](int s) {
        RngStream rng(seed, static_cast<std::uint64_t>(s));
        FieldSampler sampler(cov);
        const auto [b, e] = stream_block(n, s);
        for (std::size_t i = b; i < e; ++i) {
            const BoundaryField f = sampler.sample(rng, include_zero_mode);
            d[i] = std::log(gmc_length(f.h1, gamma, var)) - std::log(gmc_length(f.h0, gamma, var));
        }
    });
    return d;
}

// Mean with delete-one jackknife standard error.
inline std::pair<double, double> jackknife_mean(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double total = 0.0;
    for (double x : v) total += x;
    const double mean = total / n;
    double ss = 0.0;
    for (double x : v) {
        const double loo = (total - x) / (n - 1.0);
        ss += (loo - mean) * (loo - mean);
    }
    return {mean, std::sqrt((n - 1.0) / n * ss)};
}

}  // namespace detail

inline McRun estimate_log_ratio_cf(const CylinderSpec& spec, double gamma, const std::vector<double>& xs, std::size_t n_samples,
                                   std::uint64_t seed) {
    if (!(gamma > 0.0 && gamma <= 1.9)) throw DomainError("estimate_log_ratio_cf: gamma must lie in (0, 1.9]");
    detail::require(n_samples >= 2, "estimate_log_ratio_cf: need at least two samples");
    const std::vector<double> d = detail::log_ratio_draws(spec, gamma, n_samples, seed, true);
    McRun run{seed, n_samples, gamma, spec, xs, {}, {}, {}, {}};
    std::vector<double> c(n_samples), s(n_samples);
    for (double x : xs) {
        for (std::size_t i = 0; i < n_samples; ++i) {
            c[i] = std::cos(x * d[i]);
            s[i] = std::sin(x * d[i]);
        }
        const auto [mr, er] = detail::jackknife_mean(c);
        const auto [mi, ei] = detail::jackknife_mean(s);
        run.re.push_back(mr);
        run.im.push_back(mi);
        run.se_re.push_back(er);
        run.se_im.push_back(ei);
    }
    return run;
}

// L1^Y / L0^Y for the lateral field Y = h - R (zero mode removed).
inline std::vector<double> lateral_ratio_samples(const CylinderSpec& spec, double gamma, std::size_t n_samples, std::uint64_t seed) {
    if (!(gamma > 0.0 && gamma <= 1.9)) throw DomainError("lateral_ratio_samples: gamma must lie in (0, 1.9]");
    std::vector<double> d = detail::log_ratio_draws(spec, gamma, n_samples, seed, false);
    for (auto& v : d) v = std::exp(v);
    return d;
}

}  // namespace annulus_moduli
