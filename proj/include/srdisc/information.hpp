#pragma once

// Exact and leading-order KL informations for the four discrimination
// benchmarks: direct imaging, aligned SPADE, the quantum relative entropy of
// the rank-two model, and misaligned binary SPADE.

#include <algorithm>
#include <cmath>

#include "srdisc/errors.hpp"
#include "srdisc/optics.hpp"
#include "srdisc/quadrature.hpp"

namespace srdisc {

struct KlResult {
    double exact = 0.0;    // nats
    double leading = 0.0;  // nats, the displayed leading monomial
    double relative_gap = 0.0;
};

namespace detail {

constexpr double kl_gap_floor = 1e-18;

inline KlResult make_kl_result(double exact, double leading) {
    KlResult r;
    r.exact = exact;
    r.leading = leading;
    r.relative_gap = std::abs(exact - leading) / std::max(exact, kl_gap_floor);
    return r;
}

}  // namespace detail

// Two-point KL p log(p/q) + (1-p) log((1-p)/(1-q)), with 0 log 0 := 0.
// The log1p form keeps accuracy when q is close to p.
inline double bernoulli_kl(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli_kl: p outside [0,1]");
    if ((q <= 0.0 && p > 0.0) || (q >= 1.0 && p < 1.0))
        throw DomainError("bernoulli_kl: q on the boundary with nonzero opposite mass");
    if (p == q) return 0.0;
    if (p == 0.0) return -std::log1p(-q);
    if (p == 1.0) return -std::log(q);
    return -p * std::log1p((q - p) / p) - (1.0 - p) * std::log1p((p - q) / (1.0 - p));
}

// Exact D(p0 || p1) by panel-doubled Gauss-Legendre over [-20s, 20s + s];
// leading term eps^2 s^2 / (2 sigma^2).
inline KlResult kl_direct_imaging(const SceneParams& scene, const GaussianPsf& psf,
                                  const QuadratureSpec& quad = {64, 3, 1e-10}) {
    if (!(scene.epsilon < 1.0)) throw DomainError("kl_direct_imaging: requires epsilon < 1");
    const double eps = scene.epsilon;
    const double s = scene.s;
    const double sig2 = psf.sigma * psf.sigma;
    const double leading = eps * eps * s * s / (2.0 * sig2);
    if (eps == 0.0 || s == 0.0) return detail::make_kl_result(0.0, leading);

    // log(p1/p0) = log1p(eps (r - 1)), r = exp((2 x s - s^2)/(2 sigma^2)).
    auto integrand = [&](double x) {
        const double arg = (2.0 * x * s - s * s) / (2.0 * sig2);
        return -p0_density(x, psf) * std::log1p(eps * std::expm1(arg));
    };
    const double a = -20.0 * psf.sigma;
    const double b = 20.0 * psf.sigma + s;
    const double exact = integrate_1d(integrand, a, b, quad, "kl_direct_imaging");
    return detail::make_kl_result(exact, leading);
}

// Aligned SPADE: the null concentrates on q = 0, so the exact KL is
// -log((1-eps) + eps e^{-tau}); leading term eps s^2 / (4 sigma^2).
inline KlResult kl_spade_aligned(const SceneParams& scene, const GaussianPsf& psf) {
    if (!(scene.epsilon < 1.0)) throw DomainError("kl_spade_aligned: requires epsilon < 1");
    const double tau = mode_tau(scene.s, psf);
    const double exact = -std::log1p(scene.epsilon * std::expm1(-tau));
    const double leading = scene.epsilon * tau;
    return detail::make_kl_result(exact, leading);
}

// Quantum relative entropy of the rank-two model. rho0 is pure, so
// D(rho0||rho1) = -<psi0| log rho1 |psi0>, evaluated in the span of
// {psi0, psi_s} by a symmetric 2x2 eigendecomposition.
inline KlResult kl_quantum(const SceneParams& scene, const GaussianPsf& psf) {
    const double eps = scene.epsilon;
    const double c = source_overlap(scene.s, psf);
    const double c2 = c * c;
    const double d2 = 1.0 - c2;  // 1 - |<psi0|psi_s>|^2
    const double leading = eps * d2;
    if (eps == 0.0) return detail::make_kl_result(0.0, leading);
    if (d2 < 1e-14) return detail::make_kl_result(0.0, leading);  // numerically parallel states
    if (eps == 1.0) {
        // rho1 pure and distinct: D is infinite unless states coincide.
        throw DomainError("kl_quantum: requires epsilon < 1 for the exact branch");
    }

    // rho1 in the orthonormal basis {psi0, e2}: [[1-eps+eps c2, eps c d], [eps c d, eps d2]].
    const double d = std::sqrt(d2);
    const double m00 = 1.0 - eps * d2;
    const double m01 = eps * c * d;
    const double m11 = eps * d2;
    const double tr = m00 + m11;
    const double det = m00 * m11 - m01 * m01;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    const double lam_hi = 0.5 * (tr + disc);
    const double lam_lo = det / lam_hi;  // stable small eigenvalue
    // Weight of psi0 on the dominant eigenvector.
    double w_hi;
    if (m01 == 0.0) {
        w_hi = m00 >= m11 ? 1.0 : 0.0;
    } else {
        const double vy = (lam_hi - m00) / m01;
        w_hi = 1.0 / (1.0 + vy * vy);
    }
    const double w_lo = 1.0 - w_hi;
    const double exact = -(w_hi * std::log(lam_hi) + w_lo * std::log(lam_lo));
    return detail::make_kl_result(exact, leading);
}

// Misaligned binary SPADE in the main-text parameterization (bright source at
// the origin, demultiplexer centered at theta).
inline KlResult kl_binary_spade_misaligned(const SceneParams& scene, const GaussianPsf& psf) {
    const double gamma = scene.theta / (2.0 * psf.sigma);
    const double gs = scene.s / (2.0 * psf.sigma);
    const double p0 = std::exp(-gamma * gamma);
    if (!(p0 > 0.0 && p0 < 1.0))
        throw DomainError("kl_binary_spade_misaligned: requires 0 < p0(theta) < 1");
    // ps - p0 = p0 expm1(gs (2 gamma - gs)) keeps the difference accurate.
    const double delta = scene.epsilon * p0 * std::expm1(gs * (2.0 * gamma - gs));
    const double p1 = p0 + delta;
    const double exact = bernoulli_kl(p0, p1);
    const double leading = delta * delta / (2.0 * p0 * (1.0 - p0));
    return detail::make_kl_result(exact, leading);
}

}  // namespace srdisc
