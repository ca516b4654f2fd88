#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "nmr/errors.hpp"

namespace nmr {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

// (P_n(x), P_n'(x)) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace detail

inline GaussLegendreRule make_gauss_legendre(int order) {
    if (order < 1) throw InvalidArgument("Gauss-Legendre order must be >= 1");
    const int n = order;
    GaussLegendreRule rule{std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_n
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = detail::legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = detail::legendre(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Process-wide cache; rules are immutable once built.
inline const GaussLegendreRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<const GaussLegendreRule>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<const GaussLegendreRule>(make_gauss_legendre(order));
    return *slot;
}

/// Composite Gauss-Legendre integral of f over [a, b].
template <typename Fn>
double integrate(Fn&& f, double a, double b, int order, int subintervals) {
    if (subintervals < 1) throw InvalidArgument("integrate: subintervals must be >= 1");
    const auto& rule = gauss_legendre(order);
    const double h = (b - a) / subintervals;
    double total = 0.0;
    for (int s = 0; s < subintervals; ++s) {
        const double mid = a + (s + 0.5) * h;
        double part = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            part += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
        total += 0.5 * h * part;
    }
    return total;
}

}  // namespace nmr
