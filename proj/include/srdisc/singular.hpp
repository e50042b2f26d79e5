#pragma once

// Singular-learning invariants: zeta pole structures for monomial KL forms,
// free-energy asymptotes, and the local statistics of the misaligned
// binary-SPADE model.

#include <cmath>
#include <numeric>

#include "srdisc/errors.hpp"
#include "srdisc/optics.hpp"
#include "srdisc/quadrature.hpp"

namespace srdisc {

// Normal-crossing KL exponents (eps^{a_eps} s^{a_s}).
struct MonomialKl {
    int a_eps = 1;
    int a_s = 1;

    MonomialKl(int a_eps_, int a_s_) : a_eps(a_eps_), a_s(a_s_) {
        if (a_eps < 1 || a_s < 1) throw DomainError("MonomialKl: exponents must be >= 1");
    }
};

// RLCT lambda (as an exact rational) and pole multiplicity m.
struct PoleStructure {
    int lambda_num = 1;
    int lambda_den = 1;
    int multiplicity = 1;

    double lambda() const { return static_cast<double>(lambda_num) / lambda_den; }
};

// Local zeta ~ 1/((a_eps z + 1)(a_s z + 1)): the rightmost pole sits at
// -1/max(a_eps, a_s); its order counts the factors attaining the max.
inline PoleStructure zeta_pole_structure(const MonomialKl& m) {
    PoleStructure p;
    const int hi = std::max(m.a_eps, m.a_s);
    p.lambda_num = 1;
    p.lambda_den = hi;
    p.multiplicity = (m.a_eps == hi ? 1 : 0) + (m.a_s == hi ? 1 : 0);
    return p;
}

// lambda ln n - (m-1) ln ln n, natural logs.
inline double free_energy_asymptote(long n, const PoleStructure& p) {
    if (n < 3) throw DomainError("free_energy_asymptote: requires n >= 3");
    const double ln_n = std::log(static_cast<double>(n));
    return p.lambda() * ln_n - (p.multiplicity - 1) * std::log(ln_n);
}

// a(theta) = e^{-gamma^2}(2 gamma^2 - 1) / (4 sigma^2), gamma = theta/(2 sigma).
inline double local_shift_coefficient(double theta, const GaussianPsf& psf) {
    const double gamma = theta / (2.0 * psf.sigma);
    const double g2 = gamma * gamma;
    return std::exp(-g2) * (2.0 * g2 - 1.0) / (4.0 * psf.sigma * psf.sigma);
}

// Exact q=0 success-probability shift in the centered parameterization
// (sources at -eps*s and (1-eps)*s).
inline double delta_centered(const SceneParams& scene, const GaussianPsf& psf) {
    if (scene.s == 0.0) return 0.0;
    const double gamma = scene.theta / (2.0 * psf.sigma);
    const double beta = scene.s / (2.0 * psf.sigma);
    const double eps = scene.epsilon;
    const double t1 = gamma + eps * beta;
    const double t2 = gamma - (1.0 - eps) * beta;
    const double q = (1.0 - eps) * std::exp(-t1 * t1) + eps * std::exp(-t2 * t2);
    return q - std::exp(-gamma * gamma);
}

// Physical separation at local coordinate y: s = (sqrt(p0(1-p0))/|a|)^{1/2} y n^{-1/4}.
inline double local_rescale_separation(double y, long n, double theta, const GaussianPsf& psf) {
    if (y < 0.0) throw DomainError("local_rescale_separation: y must be >= 0");
    if (n < 1) throw DomainError("local_rescale_separation: n must be >= 1");
    const double a = local_shift_coefficient(theta, psf);
    if (std::abs(a) < 1e-14)
        throw DegenerateCoefficient("local_rescale_separation: a(theta) vanishes near theta = sqrt(2) sigma");
    const double gamma = theta / (2.0 * psf.sigma);
    const double p0 = std::exp(-gamma * gamma);
    if (!(p0 > 0.0 && p0 < 1.0))
        throw DomainError("local_rescale_separation: requires 0 < p0(theta) < 1");
    const double scale = std::sqrt(std::sqrt(p0 * (1.0 - p0)) / std::abs(a));
    return scale * y * std::pow(static_cast<double>(n), -0.25);
}

// J_*^(sign)(xi; B) = int_0^1 deps int_0^B dy exp[sign * u^2 y^4 / 2 + xi u y^2],
// u(eps) = eps (1 - eps).
inline double j_statistic(double xi, double cap, int sign,
                          const QuadratureSpec& quad = {128, 2, 1e-9}) {
    if (!(cap > 0.0)) throw DomainError("j_statistic: B must be positive");
    if (sign != 1 && sign != -1) throw DomainError("j_statistic: sign must be +1 or -1");
    auto f = [&](double eps, double y) {
        const double u = eps * (1.0 - eps);
        const double y2 = y * y;
        return std::exp(0.5 * sign * u * u * y2 * y2 + xi * u * y2);
    };
    return integrate_2d(f, 0.0, 1.0, 0.0, cap, quad, "j_statistic");
}

}  // namespace srdisc
