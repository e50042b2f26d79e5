#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "srdisc/optics.hpp"

using namespace srdisc;

TEST_CASE("p0_density matches the normal density") {
    GaussianPsf psf(1.0);
    CHECK(p0_density(0.0, psf) == Catch::Approx(0.3989422804014327).epsilon(1e-12));
    // one-sigma ratio, sigma arbitrary
    GaussianPsf psf2(0.37);
    CHECK(p0_density(0.37, psf2) / p0_density(0.0, psf2) ==
          Catch::Approx(std::exp(-0.5)).epsilon(1e-12));
    // frozen from a high-precision normal-density oracle
    CHECK(p0_density(0.7, psf) == Catch::Approx(0.31225393336676126).epsilon(1e-13));
}

TEST_CASE("p1_density collapses to the null and keeps unit mass") {
    GaussianPsf psf(1.0);
    for (double x : {-1.0, 0.0, 0.3, 2.0}) {
        CHECK(p1_density(x, SceneParams(0.0, 0.7), psf) == Catch::Approx(p0_density(x, psf)));
        CHECK(p1_density(x, SceneParams(0.4, 0.0), psf) == Catch::Approx(p0_density(x, psf)));
    }
    SceneParams scene(0.3, 0.5, 0.0);
    CHECK(p1_density(0.0, scene, psf) ==
          Catch::Approx(0.7 * p0_density(0.0, psf) + 0.3 * p0_density(0.5, psf)).epsilon(1e-14));
    // quadrature oracle: total mass 1 to 1e-10
    const double mass0 = oracles::simpson([&](double x) { return p0_density(x, psf); },
                                          -20.0, 20.0, 40000);
    const double mass1 = oracles::simpson([&](double x) { return p1_density(x, scene, psf); },
                                          -20.0, 20.5, 40000);
    CHECK(mass0 == Catch::Approx(1.0).margin(1e-10));
    CHECK(mass1 == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("mode occupation is Poisson in tau = s^2/(4 sigma^2)") {
    GaussianPsf psf(1.0);
    CHECK(mode_prob(0, 0.0, psf) == 1.0);
    CHECK(mode_prob(3, 0.0, psf) == 0.0);
    CHECK(mode_prob(0, 1.0, psf) == Catch::Approx(0.7788007830714049).epsilon(1e-13));

    // leakage identity 1 - P_s(0) = tau + O(tau^2)
    const double s = 0.2;  // tau = 0.01
    const double tau = mode_tau(s, psf);
    CHECK(tau == Catch::Approx(0.01));
    const double leak = -std::expm1(-tau);
    CHECK(leak / tau >= 0.99);
    CHECK(leak / tau <= 1.0);

    // truncated sum reaches 1 with deficit < 1e-12
    for (double sv : {0.1, 1.0, 4.0}) {
        const double t = mode_tau(sv, psf);
        const int q_max = mode_truncation(t);
        double total = 0.0;
        for (int q = 0; q <= q_max; ++q) total += mode_prob(q, sv, psf);
        CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("higher-mode weight is O(tau^2)") {
    GaussianPsf psf(1.0);
    // sum_{q>=2} P = 1 - e^{-tau}(1+tau); ratio to tau^2/2 tends to 1
    double prev_gap = 1e9;
    for (double tau : {1e-2, 1e-3, 1e-4}) {
        const double s = 2.0 * std::sqrt(tau);
        double tail = 1.0;
        tail -= mode_prob(0, s, psf);
        tail -= mode_prob(1, s, psf);
        const double ratio = tail / (tau * tau / 2.0);
        CHECK(std::abs(ratio - 1.0) < 0.05);
        CHECK(std::abs(ratio - 1.0) < prev_gap);
        prev_gap = std::abs(ratio - 1.0);
    }
}

TEST_CASE("source overlap and its small-s expansion") {
    GaussianPsf psf(1.0);
    CHECK(source_overlap(0.0, psf) == 1.0);
    CHECK(source_overlap(2.0, psf) == Catch::Approx(0.6065306597126334).epsilon(1e-13));
    const double s = 0.1;
    const double c = source_overlap(s, psf);
    const double lhs = 1.0 - c * c;
    const double approx = s * s / 4.0;
    CHECK(std::abs(lhs - approx) / lhs < 0.01);
}

TEST_CASE("q0 detection probability") {
    GaussianPsf psf(1.0);
    CHECK(q0_detection_prob(0.0, 0.0, psf) == 1.0);
    CHECK(q0_detection_prob(0.0, 0.1, psf) == Catch::Approx(0.9975031223974601).epsilon(1e-13));
    // blind identity: source at s = 2 theta is indistinguishable from the null
    const double theta = 0.17;
    CHECK(q0_detection_prob(2.0 * theta, theta, psf) ==
          Catch::Approx(q0_detection_prob(0.0, theta, psf)).epsilon(1e-15));
    // sign-flip symmetry in (offset - source)
    for (double d : {0.05, 0.4, 1.3})
        CHECK(q0_detection_prob(0.0, d, psf) == q0_detection_prob(0.0, -d, psf));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(GaussianPsf(0.0), DomainError);
    CHECK_THROWS_AS(GaussianPsf(-1.0), DomainError);
    CHECK_THROWS_AS(SceneParams(-0.1, 0.0), DomainError);
    CHECK_THROWS_AS(SceneParams(1.1, 0.0), DomainError);
    CHECK_THROWS_AS(SceneParams(0.5, -1.0), DomainError);
    GaussianPsf psf(1.0);
    CHECK_THROWS_AS(mode_prob(-1, 0.5, psf), DomainError);
}
