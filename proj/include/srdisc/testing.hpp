#pragma once

// Finite-n Neyman-Pearson machinery: exact randomized binomial tests,
// common-random-number Monte Carlo power for direct imaging, power curves,
// and the blind-spot locator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srdisc/errors.hpp"
#include "srdisc/optics.hpp"
#include "srdisc/parallel.hpp"
#include "srdisc/rng.hpp"

namespace srdisc {

struct BinarySpadeModel {
    double p0 = 0.0;  // null q=0 rate e^{-gamma^2}
    double ps = 0.0;  // displaced-source q=0 rate e^{-(gamma-g_s)^2}
    double p1 = 0.0;  // (1-eps) p0 + eps ps
};

// p1 is formed as p0 + eps (ps - p0), so p1 == p0 bitwise whenever ps == p0
// (in particular at the blind separation s = 2 theta).
inline BinarySpadeModel binary_spade_model(const SceneParams& scene, const GaussianPsf& psf) {
    BinarySpadeModel m;
    const double gamma = scene.theta / (2.0 * psf.sigma);
    const double gs = scene.s / (2.0 * psf.sigma);
    m.p0 = std::exp(-gamma * gamma);
    const double t = gamma - gs;
    m.ps = std::exp(-t * t);
    m.p1 = m.p0 + scene.epsilon * (m.ps - m.p0);
    return m;
}

inline double blind_spot_separation(double theta) { return 2.0 * theta; }

enum class TestDirection { upper, lower, degenerate };

// Exact-size-alpha randomized NP rejection rule for Binomial(n, p0).
struct RandomizedTest {
    TestDirection direction = TestDirection::degenerate;
    long k_star = 0;
    double gamma_r = 0.0;  // randomization probability at K = k_star
    double alpha = 0.0;
    long n = 0;
};

namespace detail {

// Binomial(n, p) pmf over k = 0..n, each term from its own log-space formula.
inline std::vector<double> binomial_pmf(long n, double p) {
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lgn = std::lgamma(n + 1.0);
    for (long k = 0; k <= n; ++k) {
        const double lg = lgn - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        pmf[k] = std::exp(lg + k * lp + (n - k) * lq);
    }
    return pmf;
}

}  // namespace detail

inline RandomizedTest randomized_np_binomial(long n, double p0, double p1, double alpha) {
    if (n < 1) throw DomainError("randomized_np_binomial: n must be >= 1");
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("randomized_np_binomial: p0 must lie in (0,1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("randomized_np_binomial: alpha must lie in (0,1)");

    RandomizedTest test;
    test.alpha = alpha;
    test.n = n;
    if (p1 == p0) {
        test.direction = TestDirection::degenerate;
        return test;
    }
    const auto pmf = detail::binomial_pmf(n, p0);
    if (p1 > p0) {
        // Reject for large K. Upper tails summed from the top for accuracy.
        std::vector<double> tail(pmf.size() + 1, 0.0);  // tail[k] = P(K >= k)
        for (long k = n; k >= 0; --k) tail[k] = tail[k + 1] + pmf[k];
        long k_star = n;
        while (k_star > 0 && tail[k_star] <= alpha) --k_star;  // smallest k with P(K > k) <= alpha
        test.direction = TestDirection::upper;
        test.k_star = k_star;
        const double strict = tail[k_star + 1];  // P(K > k_star)
        test.gamma_r = pmf[k_star] > 0.0 ? (alpha - strict) / pmf[k_star] : 0.0;
    } else {
        // Reject for small K. Lower tails summed from the bottom.
        std::vector<double> low(pmf.size() + 1, 0.0);  // low[k] = P(K < k)
        for (long k = 0; k <= n; ++k) low[k + 1] = low[k] + pmf[k];
        long k_star = 0;
        while (k_star < n && low[k_star + 1] <= alpha) ++k_star;  // largest k with P(K < k) <= alpha
        test.direction = TestDirection::lower;
        test.k_star = k_star;
        const double strict = low[k_star];  // P(K < k_star)
        test.gamma_r = pmf[k_star] > 0.0 ? (alpha - strict) / pmf[k_star] : 0.0;
    }
    test.gamma_r = std::clamp(test.gamma_r, 0.0, 1.0);
    return test;
}

// Rejection probability of `test` under Binomial(n, p).
inline double np_power_exact(const RandomizedTest& test, long n, double p) {
    if (n != test.n) throw DomainError("np_power_exact: test was built for a different n");
    if (test.direction == TestDirection::degenerate) return test.alpha;
    const auto pmf = detail::binomial_pmf(n, p);
    double strict = 0.0;
    if (test.direction == TestDirection::upper) {
        for (long k = n; k > test.k_star; --k) strict += pmf[k];
    } else {
        for (long k = 0; k < test.k_star; ++k) strict += pmf[k];
    }
    return strict + test.gamma_r * pmf[test.k_star];
}

// Exact size under the test's own null; should equal alpha to rounding.
inline double np_size_exact(const RandomizedTest& test, long n, double p0) {
    if (test.direction == TestDirection::degenerate) return test.alpha;
    return np_power_exact(test, n, p0);
}

// Sum of per-photon log likelihood ratios ln(p1(x)/p0(x)) for direct imaging,
// in the stable form ln(1 + eps (r(x) - 1)).
inline double di_lrt_statistic(std::span<const double> sample, const SceneParams& scene,
                               const GaussianPsf& psf) {
    if (!(scene.epsilon < 1.0)) throw DomainError("di_lrt_statistic: requires epsilon < 1");
    const double eps = scene.epsilon;
    const double s = scene.s;
    if (eps == 0.0 || s == 0.0) return 0.0;
    const double sig2 = psf.sigma * psf.sigma;
    double acc = 0.0;
    for (double x : sample)
        acc += std::log1p(eps * std::expm1((2.0 * x * s - s * s) / (2.0 * sig2)));
    return acc;
}

struct PowerPoint {
    double s = 0.0;
    long n = 0;
    double power = 0.0;
    double std_err = 0.0;  // 0 for exact computations
    std::string scheme;    // "DI" or "bSPADE"
};

namespace detail {

// Null/alternative LRT statistic banks for one (s, n) cell across replicates.
struct CrnBank {
    std::vector<double> t0;
    std::vector<double> t1;
};

// Power with randomized tie handling at the empirical null (1-alpha) quantile,
// so that a null-identical alternative yields power alpha exactly.
inline std::pair<double, double> crn_power(const CrnBank& bank, double alpha) {
    const std::size_t m = bank.t0.size();
    std::vector<double> sorted(bank.t0);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const double target = alpha * static_cast<double>(m);  // expected null rejections
    const std::size_t idx = std::min(static_cast<std::size_t>(target), m - 1);
    const double c = sorted[idx];
    std::size_t null_gt = 0, null_eq = 0;
    for (double v : bank.t0) {
        if (v > c) ++null_gt;
        else if (v == c) ++null_eq;
    }
    const double tie_prob = null_eq > 0 ? (target - static_cast<double>(null_gt)) / null_eq : 0.0;
    std::size_t alt_gt = 0, alt_eq = 0;
    for (double v : bank.t1) {
        if (v > c) ++alt_gt;
        else if (v == c) ++alt_eq;
    }
    const double power = (static_cast<double>(alt_gt) + tie_prob * alt_eq) / m;
    const double se = std::sqrt(std::max(0.0, power * (1.0 - power)) / m);
    return {power, se};
}

// CRN evaluation of the DI LRT over an s grid and a set of n cut points.
// Each replicate draws one (uniform, normal) pair per photon, in a fixed
// order independent of the parameters; the same bank is reused for every s
// and for the null and alternative statistics.
inline std::vector<std::vector<CrnBank>> di_crn_banks(double epsilon, const GaussianPsf& psf,
                                                      std::span<const double> s_grid,
                                                      std::span<const long> n_cuts, long mc_reps,
                                                      std::uint64_t seed, unsigned threads) {
    const std::size_t ns = s_grid.size();
    const std::size_t nn = n_cuts.size();
    long n_max = 0;
    for (long n : n_cuts) n_max = std::max(n_max, n);
    std::vector<std::vector<CrnBank>> banks(ns, std::vector<CrnBank>(nn));
    for (auto& row : banks)
        for (auto& b : row) {
            b.t0.resize(static_cast<std::size_t>(mc_reps));
            b.t1.resize(static_cast<std::size_t>(mc_reps));
        }
    const double sig2 = psf.sigma * psf.sigma;

    parallel_for(static_cast<std::size_t>(mc_reps), threads, [&](std::size_t rep) {
        KeyedRng rng(seed, rep);
        std::vector<double> z(static_cast<std::size_t>(n_max));
        std::vector<std::uint8_t> faint(static_cast<std::size_t>(n_max));
        for (long i = 0; i < n_max; ++i) {
            const double u = rng.next_unit();
            z[i] = rng.next_normal();
            faint[i] = u < epsilon ? 1 : 0;
        }
        std::vector<long> cuts_sorted_idx(nn);
        for (std::size_t k = 0; k < nn; ++k) cuts_sorted_idx[k] = static_cast<long>(k);
        for (std::size_t si = 0; si < ns; ++si) {
            const double s = s_grid[si];
            const double c1 = s / sig2;
            const double c0 = -s * s / (2.0 * sig2);
            double t0 = 0.0, t1 = 0.0;
            long i = 0;
            for (std::size_t k = 0; k < nn; ++k) {
                const long cut = n_cuts[k];
                for (; i < cut; ++i) {
                    const double x0 = psf.sigma * z[i];
                    const double term0 = std::log1p(epsilon * std::expm1(c1 * x0 + c0));
                    t0 += term0;
                    if (faint[i]) {
                        t1 += std::log1p(epsilon * std::expm1(c1 * (x0 + s) + c0));
                    } else {
                        t1 += term0;
                    }
                }
                banks[si][k].t0[rep] = t0;
                banks[si][k].t1[rep] = t1;
            }
        }
    });
    return banks;
}

}  // namespace detail

// CRN Monte Carlo power of the DI likelihood-ratio test. The common offset
// theta shifts both hypotheses and cancels in the statistic, so it does not
// enter the simulation.
inline PowerPoint di_power_mc(const SceneParams& scene, const GaussianPsf& psf, long n,
                              double alpha, long mc_reps, std::uint64_t seed,
                              unsigned threads = 1) {
    if (mc_reps < 1000) throw InsufficientReplicates("di_power_mc: mc_reps must be >= 1000");
    const double s_arr[] = {scene.s};
    const long n_arr[] = {n};
    auto banks = detail::di_crn_banks(scene.epsilon, psf, s_arr, n_arr, mc_reps, seed, threads);
    auto [power, se] = detail::crn_power(banks[0][0], alpha);
    PowerPoint pt;
    pt.s = scene.s;
    pt.n = n;
    pt.power = power;
    pt.std_err = se;
    pt.scheme = "DI";
    return pt;
}

// Exact bSPADE power at one (s, n).
inline PowerPoint bspade_power_exact(const SceneParams& scene, const GaussianPsf& psf, long n,
                                     double alpha) {
    const auto model = binary_spade_model(scene, psf);
    const auto test = randomized_np_binomial(n, model.p0, model.p1, alpha);
    PowerPoint pt;
    pt.s = scene.s;
    pt.n = n;
    pt.power = np_power_exact(test, n, model.p1);
    pt.std_err = 0.0;
    pt.scheme = "bSPADE";
    return pt;
}

// Power over an (s grid) x (n cut list), row-major by n then s. For bSPADE
// every point is exact; for DI a shared CRN deviate bank spans the whole grid.
inline std::vector<PowerPoint> power_grid(const std::string& scheme,
                                          std::span<const double> s_grid,
                                          std::span<const long> n_list, double epsilon,
                                          double theta, const GaussianPsf& psf, double alpha,
                                          long mc_reps, std::uint64_t seed,
                                          unsigned threads = 1) {
    if (s_grid.empty() || n_list.empty()) throw EmptyInput("power_grid: empty grid");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw DomainError("power_grid: epsilon must lie in [0,1)");
    std::vector<PowerPoint> out;
    out.reserve(s_grid.size() * n_list.size());
    if (scheme == "bSPADE") {
        for (long n : n_list)
            for (double s : s_grid)
                out.push_back(bspade_power_exact(SceneParams(epsilon, s, theta), psf, n, alpha));
        return out;
    }
    if (scheme != "DI") throw DomainError("power_grid: scheme must be DI or bSPADE");
    if (mc_reps < 1000) throw InsufficientReplicates("power_grid: mc_reps must be >= 1000");
    std::vector<long> cuts(n_list.begin(), n_list.end());
    if (!std::is_sorted(cuts.begin(), cuts.end()))
        throw DomainError("power_grid: n_list must be ascending for shared CRN banks");
    auto banks = detail::di_crn_banks(epsilon, psf, s_grid, cuts, mc_reps, seed, threads);
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        for (std::size_t si = 0; si < s_grid.size(); ++si) {
            auto [power, se] = detail::crn_power(banks[si][k], alpha);
            PowerPoint pt;
            pt.s = s_grid[si];
            pt.n = cuts[k];
            pt.power = power;
            pt.std_err = se;
            pt.scheme = "DI";
            out.push_back(pt);
        }
    }
    return out;
}

// Power versus s at fixed n.
inline std::vector<PowerPoint> power_curve(const std::string& scheme,
                                           std::span<const double> s_grid, long n,
                                           double epsilon, double theta, const GaussianPsf& psf,
                                           double alpha, long mc_reps, std::uint64_t seed,
                                           unsigned threads = 1) {
    const long n_arr[] = {n};
    return power_grid(scheme, s_grid, n_arr, epsilon, theta, psf, alpha, mc_reps, seed, threads);
}

// Power versus n at fixed separations (transposed axes of power_curve).
inline std::vector<PowerPoint> power_vs_n(const std::string& scheme,
                                          std::span<const long> n_grid,
                                          std::span<const double> s_values, double epsilon,
                                          double theta, const GaussianPsf& psf, double alpha,
                                          long mc_reps, std::uint64_t seed,
                                          unsigned threads = 1) {
    auto rows = power_grid(scheme, s_values, n_grid, epsilon, theta, psf, alpha, mc_reps, seed,
                           threads);
    // Reorder to s-major (each s traces an n curve).
    std::vector<PowerPoint> out;
    out.reserve(rows.size());
    for (std::size_t si = 0; si < s_values.size(); ++si)
        for (std::size_t k = 0; k < n_grid.size(); ++k)
            out.push_back(rows[k * s_values.size() + si]);
    return out;
}

}  // namespace srdisc
