#pragma once

// Gauss-Legendre rules with cached nodes and doubling refinement.

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "srdisc/errors.hpp"

namespace srdisc {

struct QuadratureSpec {
    int nodes_per_axis = 64;
    int refinement_levels = 2;
    double rel_tol = 1e-10;

    void validate() const {
        if (nodes_per_axis < 8) throw DomainError("QuadratureSpec: nodes_per_axis must be >= 8");
        if (refinement_levels < 1) throw DomainError("QuadratureSpec: refinement_levels must be >= 1");
        if (!(rel_tol > 0)) throw DomainError("QuadratureSpec: rel_tol must be positive");
    }
};

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Nodes by Newton iteration on the Legendre recurrence.
inline GaussRule make_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

// Single evaluation of f over [a, b] with `panels` panels of an n-point rule.
template <class F>
double gl_panels(F&& f, double a, double b, int n, int panels) {
    const GaussRule& rule = gauss_legendre(n);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        const double half = 0.5 * h;
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
        total += half * acc;
    }
    return total;
}

// Panel-doubling refinement with a relative stop rule.
template <class F>
double integrate_1d(F&& f, double a, double b, const QuadratureSpec& spec,
                    const char* label = "integrate_1d") {
    spec.validate();
    double prev = gl_panels(f, a, b, spec.nodes_per_axis, 1);
    int panels = 1;
    for (int level = 1; level <= spec.refinement_levels; ++level) {
        panels *= 2;
        const double cur = gl_panels(f, a, b, spec.nodes_per_axis, panels);
        if (std::abs(cur - prev) <= spec.rel_tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    // One more doubling as the final convergence check.
    const double cur = gl_panels(f, a, b, spec.nodes_per_axis, panels * 2);
    if (std::abs(cur - prev) <= spec.rel_tol * std::max(1.0, std::abs(cur))) return cur;
    throw IntegrationNotConverged(std::string(label) + ": refinements disagree beyond rel_tol");
}

// Tensor 2-D rule over [ax,bx] x [ay,by]; node-doubling refinement.
template <class F>
double integrate_2d(F&& f, double ax, double bx, double ay, double by,
                    const QuadratureSpec& spec, const char* label = "integrate_2d") {
    spec.validate();
    auto eval = [&](int n) {
        const GaussRule& rule = gauss_legendre(n);
        const double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
        const double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = cx + hx * rule.nodes[i];
            double row = 0.0;
            for (int j = 0; j < n; ++j) row += rule.weights[j] * f(x, cy + hy * rule.nodes[j]);
            total += rule.weights[i] * row;
        }
        return hx * hy * total;
    };
    int n = spec.nodes_per_axis;
    double prev = eval(n);
    for (int level = 1; level <= spec.refinement_levels; ++level) {
        n *= 2;
        const double cur = eval(n);
        if (std::abs(cur - prev) <= spec.rel_tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw IntegrationNotConverged(std::string(label) + ": refinements disagree beyond rel_tol");
}

}  // namespace srdisc
