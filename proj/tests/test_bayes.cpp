#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "srdisc/bayes.hpp"

using namespace srdisc;

TEST_CASE("simulate_h0: determinism, keying, empirical law") {
    GaussianPsf psf(1.0);
    const auto a = simulate_h0(64, psf, 42, 0);
    const auto b = simulate_h0(64, psf, 42, 0);
    CHECK(a == b);
    const auto c = simulate_h0(64, psf, 42, 1);
    CHECK(a != c);
    const auto d = simulate_h0(64, psf, 43, 0);
    CHECK(a != d);
    CHECK(simulate_h0(0, psf, 42).empty());

    // Kolmogorov-Smirnov distance to the standard normal over 10^4 draws
    std::vector<double> pool;
    for (int r = 0; r < 100; ++r) {
        const auto s = simulate_h0(100, psf, 7, r);
        pool.insert(pool.end(), s.begin(), s.end());
    }
    std::sort(pool.begin(), pool.end());
    double ks = 0.0;
    const double m = static_cast<double>(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-pool[i] / std::sqrt(2.0));
        ks = std::max(ks, std::abs(cdf - (i + 1) / m));
        ks = std::max(ks, std::abs(cdf - i / m));
    }
    CHECK(ks < 0.02);

    // sigma scales the draws exactly
    GaussianPsf wide(2.5);
    const auto e = simulate_h0(64, wide, 42, 0);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == 2.5 * a[i]);
}

TEST_CASE("log_marginal_ratio: empty sample and frozen oracle value") {
    GaussianPsf psf(1.0);
    PriorWindow window(0.10, 0.25);
    QuadratureSpec quad{32, 3, 1e-10};
    CHECK(log_marginal_ratio(std::vector<double>{}, window, psf, quad) == 0.0);

    const std::vector<double> sample{0.1, -0.5, 1.2, 0.3};
    const double lr = log_marginal_ratio(sample, window, psf, quad);
    // frozen from a 30-digit adaptive-quadrature oracle run
    CHECK(lr == Catch::Approx(0.00562165935466280).margin(1e-12));
    // independent fine-grid midpoint oracle
    auto lik = [&](double eps, double s) {
        double v = 1.0;
        for (double x : sample) v *= (1.0 - eps) + eps * std::exp((2.0 * x * s - s * s) / 2.0);
        return v;
    };
    const double brute = oracles::simpson2d(lik, 0.0, 0.10, 0.0, 0.25, 800) / (0.10 * 0.25);
    CHECK(lr == Catch::Approx(std::log(brute)).margin(1e-8));
    CHECK(free_energy_exact(sample, window, psf, quad) == -lr);
}

TEST_CASE("log_marginal_ratio is finite across windows and sizes") {
    GaussianPsf psf(1.0);
    QuadratureSpec quad{32, 3, 1e-8};
    for (auto [em, sm] : {std::pair{0.05, 0.10}, {0.20, 0.50}, {0.50, 1.00}}) {
        PriorWindow window(em, sm);
        for (long n : {8L, 64L, 256L}) {
            const auto sample = simulate_h0(n, psf, 11, static_cast<std::uint64_t>(n));
            const double f = free_energy_exact(sample, window, psf, quad);
            CHECK(std::isfinite(f));
            // marginal-ratio of a mixture against a window containing the null
            // cannot exceed the best in-window likelihood gain; loose sanity bound
            CHECK(std::abs(f) < 0.5 * n);
        }
    }
}

TEST_CASE("free_energy_local: hand value and frozen oracle") {
    GaussianPsf psf(1.0);
    PriorWindow window(0.10, 0.25);
    QuadratureSpec quad{32, 3, 1e-10};
    CHECK(free_energy_local(std::vector<double>{}, window, psf, quad) == 0.0);
    const std::vector<double> sample{0.1, -0.5, 1.2, 0.3};
    const double f = free_energy_local(sample, window, psf, quad);
    CHECK(f == Catch::Approx(-0.00675335167192627).margin(1e-12));
    // local and exact answers agree at leading order on tiny windows
    const auto big = simulate_h0(512, psf, 3, 5);
    PriorWindow tiny(0.02, 0.05);
    const double fe = free_energy_exact(big, tiny, psf, quad);
    const double fl = free_energy_local(big, tiny, psf, quad);
    CHECK(fe == Catch::Approx(fl).margin(0.05));
}

TEST_CASE("centering shift") {
    for (long n : {3L, 32L, 2048L}) {
        const double shift = 0.5 * std::log((double)n) - std::log(std::log((double)n));
        CHECK(center_free_energy(1.7, n) == Catch::Approx(1.7 - shift).epsilon(1e-15));
        CHECK(center_free_energy(shift, n) == Catch::Approx(0.0).margin(1e-15));
    }
    CHECK_THROWS_AS(center_free_energy(0.0, 2), DomainError);
}

TEST_CASE("type-7 quantiles") {
    CHECK(quantile_type7({1, 2, 3, 4, 5}, 0.5) == 3.0);
    CHECK(quantile_type7({1, 2, 3, 4, 5}, 0.0) == 1.0);
    CHECK(quantile_type7({1, 2, 3, 4, 5}, 1.0) == 5.0);
    CHECK(quantile_type7({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile_type7({10, 20}, 0.25) == 12.5);
    CHECK(quantile_type7({7}, 0.9) == 7.0);
    CHECK_THROWS_AS(quantile_type7({}, 0.5), EmptyInput);

    // uniform grid 0..100: type-7 quantile of p is exactly 100p
    std::vector<double> grid(101);
    for (int i = 0; i <= 100; ++i) grid[i] = i;
    for (double p : {0.1, 0.37, 0.5, 0.9})
        CHECK(quantile_type7(grid, p) == Catch::Approx(100.0 * p).margin(1e-12));

    auto s = quantile_summary({5, 1, 4, 2, 3});
    CHECK(s.median == 3.0);
    CHECK(s.q10 == Catch::Approx(1.4));
    CHECK(s.q90 == Catch::Approx(4.6));
    CHECK_THROWS_AS(quantile_summary({}), EmptyInput);
}

TEST_CASE("normal quantiles of the keyed generator") {
    // +-1.2816 empirical 10%/90% quantiles over 1e5 draws
    std::vector<double> z(100000);
    KeyedRng rng(2024, 0);
    for (auto& v : z) v = rng.next_normal();
    std::sort(z.begin(), z.end());
    CHECK(quantile_type7(z, 0.10) == Catch::Approx(-1.2816).margin(0.02));
    CHECK(quantile_type7(z, 0.90) == Catch::Approx(1.2816).margin(0.02));
    CHECK(quantile_type7(z, 0.50) == Catch::Approx(0.0).margin(0.02));
}

TEST_CASE("prior window validation and KL lead scale") {
    CHECK_THROWS_AS(PriorWindow(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(PriorWindow(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(PriorWindow(0.5, 0.0), DomainError);
    GaussianPsf psf(1.0);
    PriorWindow w(0.2, 0.5);
    CHECK(w.d_max_lead(psf) == Catch::Approx(0.2 * 0.2 * 0.5 * 0.5 / 2.0).epsilon(1e-15));
}

TEST_CASE("free_energy_batch: records, determinism, thread invariance") {
    GaussianPsf psf(1.0);
    PriorWindow window(0.20, 0.50);
    QuadratureSpec quad{32, 2, 1e-6};
    const auto recs = free_energy_batch(64, window, psf, quad, 16, 99, 1);
    REQUIRE(recs.size() == 16);
    for (const auto& r : recs) {
        CHECK(r.n == 64);
        CHECK(r.seed == 99);
        CHECK(std::isfinite(r.f_exact));
        CHECK(std::isfinite(r.f_local));
        CHECK(r.centered_exact == Catch::Approx(center_free_energy(r.f_exact, 64)));
        CHECK(r.centered_local == Catch::Approx(center_free_energy(r.f_local, 64)));
    }
    for (std::size_t i = 0; i < recs.size(); ++i)
        CHECK(recs[i].replicate_id == static_cast<long>(i));

    const auto again = free_energy_batch(64, window, psf, quad, 16, 99, 3);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].f_exact == again[i].f_exact);
        CHECK(recs[i].f_local == again[i].f_local);
    }
}
