#pragma once

// Gaussian-PSF image-plane densities, Hermite-Gaussian mode occupation, and
// state overlaps for the one-vs-two-source model.

#include <cmath>

#include "srdisc/errors.hpp"

namespace srdisc {

struct GaussianPsf {
    double sigma = 1.0;

    explicit GaussianPsf(double sigma_) : sigma(sigma_) {
        if (!(sigma > 0.0)) throw DomainError("GaussianPsf: sigma must be positive");
    }
};

// (epsilon, s, theta): relative brightness, separation, detector offset.
struct SceneParams {
    double epsilon = 0.0;
    double s = 0.0;
    double theta = 0.0;

    SceneParams(double epsilon_, double s_, double theta_ = 0.0)
        : epsilon(epsilon_), s(s_), theta(theta_) {
        if (!(epsilon >= 0.0 && epsilon <= 1.0))
            throw DomainError("SceneParams: epsilon must lie in [0,1]");
        if (!(s >= 0.0)) throw DomainError("SceneParams: s must be >= 0");
    }
};

// Single-source image-plane density |psi(x)|^2 = N(0, sigma^2).
inline double p0_density(double x, const GaussianPsf& psf) {
    const double z = x / psf.sigma;
    return std::exp(-0.5 * z * z) / (psf.sigma * 2.5066282746310002);
}

// Two-source mixture (1-eps)|psi(x)|^2 + eps|psi(x-s)|^2.
inline double p1_density(double x, const SceneParams& scene, const GaussianPsf& psf) {
    return (1.0 - scene.epsilon) * p0_density(x, psf) +
           scene.epsilon * p0_density(x - scene.s, psf);
}

// Poisson parameter of the mode-occupation law for a source displaced by s.
inline double mode_tau(double s, const GaussianPsf& psf) {
    const double g = s / (2.0 * psf.sigma);
    return g * g;
}

// P_s(q) = e^{-tau} tau^q / q!, evaluated in log space.
inline double mode_prob(int q, double s, const GaussianPsf& psf) {
    if (q < 0) throw DomainError("mode_prob: q must be >= 0");
    const double tau = mode_tau(s, psf);
    if (tau == 0.0) return q == 0 ? 1.0 : 0.0;
    return std::exp(q * std::log(tau) - tau - std::lgamma(q + 1.0));
}

// Truncation level beyond which the Poisson tail is below 1e-12.
inline int mode_truncation(double tau) {
    const int q = static_cast<int>(std::ceil(tau + 10.0 * std::sqrt(tau) + 10.0));
    return q < 20 ? 20 : q;
}

// <psi_0|psi_s> = e^{-s^2/(8 sigma^2)}.
inline double source_overlap(double s, const GaussianPsf& psf) {
    return std::exp(-s * s / (8.0 * psf.sigma * psf.sigma));
}

// Probability that a photon from a source at source_pos lands in the q=0 mode
// of a demultiplexer centered at detector_offset.
inline double q0_detection_prob(double source_pos, double detector_offset,
                                const GaussianPsf& psf) {
    const double g = (detector_offset - source_pos) / (2.0 * psf.sigma);
    return std::exp(-g * g);
}

}  // namespace srdisc
