#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nmr/errors.hpp"

namespace nmr {

namespace detail {

// Fills out[0..count) with the degree (count-1) Bernstein weights at u.
// Binomials come from the multiplicative recurrence C(n,k) = C(n,k-1)(n-k+1)/k,
// which is exact in double far beyond the degrees used for road patches.
inline void bernstein_into(std::size_t count, double u, std::span<double> out) {
    if (count == 0) return;
    const std::size_t n = count - 1;
    const double w = 1.0 - u;
    // out[i] <- u^i, then scaled by C(n,i) (1-u)^(n-i) walking downward
    double up = 1.0;
    for (std::size_t i = 0; i <= n; ++i) {
        out[i] = up;
        up *= u;
    }
    double wp = 1.0;
    double binom = 1.0;
    // C(n, n-j) == C(n, j); walk j = n-i from 0 upward
    for (std::size_t j = 0; j <= n; ++j) {
        const std::size_t i = n - j;
        out[i] *= binom * wp;
        wp *= w;
        binom = binom * static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
}

inline void check_unit(double u, const char* what) {
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError(std::string(what) + " = " + std::to_string(u) + " outside [0,1]");
}

}  // namespace detail

/// Bernstein weights B_e^E(u), e = 1..E, of degree E-1 (returned 0-based).
inline std::vector<double> bernstein_basis(std::size_t count, double u) {
    if (count == 0) throw InvalidArgument("bernstein_basis: basis size must be >= 1");
    detail::check_unit(u, "bernstein_basis: u");
    std::vector<double> out(count);
    detail::bernstein_into(count, u, out);
    return out;
}

/// Basis values together with first and second derivatives in u.
struct BasisJet {
    std::vector<double> value;
    std::vector<double> d1;
    std::vector<double> d2;
};

// d/du B_i^n = n (B_{i-1}^{n-1} - B_i^{n-1});
// d2/du2 B_i^n = n(n-1) (B_{i-2}^{n-2} - 2 B_{i-1}^{n-2} + B_i^{n-2}).
inline BasisJet bernstein_jet(std::size_t count, double u) {
    if (count == 0) throw InvalidArgument("bernstein_jet: basis size must be >= 1");
    detail::check_unit(u, "bernstein_jet: u");
    BasisJet jet{std::vector<double>(count), std::vector<double>(count, 0.0),
                 std::vector<double>(count, 0.0)};
    detail::bernstein_into(count, u, jet.value);
    const std::size_t n = count - 1;
    if (n >= 1) {
        std::vector<double> lower(n);
        detail::bernstein_into(n, u, lower);
        const double dn = static_cast<double>(n);
        for (std::size_t i = 0; i <= n; ++i) {
            const double left = i >= 1 ? lower[i - 1] : 0.0;
            const double right = i < n ? lower[i] : 0.0;
            jet.d1[i] = dn * (left - right);
        }
    }
    if (n >= 2) {
        std::vector<double> lower(n - 1);
        detail::bernstein_into(n - 1, u, lower);
        const double scale = static_cast<double>(n) * static_cast<double>(n - 1);
        auto at = [&](std::ptrdiff_t k) {
            return (k >= 0 && k < static_cast<std::ptrdiff_t>(n - 1)) ? lower[k] : 0.0;
        };
        for (std::size_t i = 0; i <= n; ++i) {
            const auto k = static_cast<std::ptrdiff_t>(i);
            jet.d2[i] = scale * (at(k - 2) - 2.0 * at(k - 1) + at(k));
        }
    }
    return jet;
}

}  // namespace nmr
