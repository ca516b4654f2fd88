#include <catch_amalgamated.hpp>

#include <random>

#include <nmr/arclength.hpp>
#include <nmr/quadrature.hpp>

#include "support.hpp"

using namespace nmr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Brute-force trapezoid rule on ||dP/du(t, v)||, t in [0, u].
double trapezoid_su(const ControlNet& net, double u, double v, int steps) {
    double sum = 0.0;
    const double h = u / steps;
    for (int i = 0; i <= steps; ++i) {
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        sum += w * partials(net, {i * h, v}).first.norm();
    }
    return sum * h;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly", "[quadrature]") {
    for (int order : {1, 2, 5, 16, 32}) {
        const auto& rule = gauss_legendre(order);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        REQUIRE_THAT(wsum, WithinAbs(2.0, 1e-13));
        for (std::size_t i = 1; i < rule.nodes.size(); ++i) REQUIRE(rule.nodes[i] > rule.nodes[i - 1]);
        // x^(2n-2) is integrated exactly: 2 / (2n - 1)
        const int deg = 2 * order - 2;
        const double got = integrate([&](double x) { return std::pow(x, deg); }, -1.0, 1.0, order, 1);
        REQUIRE_THAT(got, WithinRel(2.0 / (deg + 1), 1e-12));
    }
    REQUIRE_THAT(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 32, 8), WithinAbs(std::exp(1.0) - 1, 1e-14));
}

TEST_CASE("flat chart gives Euclidean arc lengths", "[arclength]") {
    const double L = 30.0, W = 8.0;
    const ControlNet net = ControlNet::planar(7, 5, L, W);
    for (double v0 : {0.0, 0.3, 1.0}) {
        const auto a = to_arclength(net, {0.25, v0});
        REQUIRE_THAT(a.s_u, WithinAbs(0.25 * L, 1e-9));
        REQUIRE_THAT(a.s_v, WithinAbs(v0 * W, 1e-9));
    }
    REQUIRE(to_arclength(net, {0.0, 0.7}).s_u == 0.0);
    REQUIRE(to_arclength(net, {0.7, 0.0}).s_v == 0.0);

    const auto p = from_arclength(net, {0.6 * L, 0.2 * W}, {0.0, 0.0});
    REQUIRE_THAT(p.u, WithinAbs(0.6, 1e-10));
    REQUIRE_THAT(p.v, WithinAbs(0.2, 1e-10));
    const auto origin = from_arclength(net, {0.0, 0.0});
    REQUIRE(origin == ParamPoint{0.0, 0.0});
}

TEST_CASE("curved patch matches brute-force quadrature", "[arclength]") {
    const ControlNet tube = test::quarter_cylinder_net(2.0);
    for (double v : {0.0, 0.5, 1.0}) {
        const double oracle = trapezoid_su(tube, 1.0, v, 1'000'000);
        REQUIRE_THAT(to_arclength(tube, {1.0, v}).s_u, WithinAbs(oracle, 1e-8));
    }
    // control points on the circle pull the Bezier arc inside it
    REQUIRE(to_arclength(tube, {1.0, 0.5}).s_u < 3.14159265358979);
}

TEST_CASE("arc length is monotone and additive", "[arclength][property]") {
    std::mt19937_64 rng(201);
    const ControlNet net = test::random_regular_net(rng);
    for (int j = 0; j < 64; ++j) {
        const double v = j / 63.0;
        double prev = -1.0;
        for (int i = 0; i < 64; ++i) {
            const double s = arc_length_u(net, v, 0.0, i / 63.0);
            REQUIRE(s > prev);
            prev = s;
        }
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        double u1 = unit(rng), u2 = unit(rng);
        if (u1 > u2) std::swap(u1, u2);
        const double v = unit(rng);
        const double whole = arc_length_u(net, v, 0.0, u2);
        const double parts = arc_length_u(net, v, 0.0, u1) + arc_length_u(net, v, u1, u2);
        REQUIRE_THAT(parts, WithinAbs(whole, 1e-9));
        const double vparts = arc_length_v(net, u1, 0.0, v * 0.5) + arc_length_v(net, u1, v * 0.5, v);
        REQUIRE_THAT(vparts, WithinAbs(arc_length_v(net, u1, 0.0, v), 1e-9));
    }
}

TEST_CASE("planar nets reproduce in-surface distances", "[arclength][property]") {
    // an arbitrary (non-uniform) planar net: distances along iso-lines equal
    // the polyline length of densely sampled surface points
    std::mt19937_64 rng(203);
    ControlNet net = test::random_regular_net(rng, 6, 4, 15.0, 6.0, 0.2);
    for (std::size_t k = 0; k < net.size(); ++k) {
        auto& p = net.at(k / 4, k % 4);
        p.z() = 0.3 * p.x() - 0.2 * p.y();
    }
    for (double v : {0.1, 0.5, 0.9}) {
        double poly = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) poly += (evaluate(net, {(i + 1.0) / n, v}) - evaluate(net, {double(i) / n, v})).norm();
        REQUIRE_THAT(to_arclength(net, {1.0, v}).s_u, WithinAbs(poly, 1e-7));
    }
}

TEST_CASE("quadrature has converged at the default order", "[arclength][property]") {
    std::mt19937_64 rng(205);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const ControlNet net = test::random_regular_net(rng);
        const ParamPoint p{unit(rng), unit(rng)};
        const auto base = to_arclength(net, p);
        const auto fine = to_arclength(net, p, {64, 8});
        REQUIRE(std::abs(base.s_u - fine.s_u) < 1e-9);
        REQUIRE(std::abs(base.s_v - fine.s_v) < 1e-9);
    }
}

TEST_CASE("from_arclength inverts to_arclength", "[arclength][property]") {
    std::mt19937_64 rng(207);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const ControlNet net = test::random_regular_net(rng);
        const ParamPoint p{unit(rng), unit(rng)};
        const auto a = to_arclength(net, p);
        const auto back = from_arclength(net, a, {0.0, 0.0}, 1e-11);
        const auto again = to_arclength(net, back);
        REQUIRE_THAT(again.s_u, WithinAbs(a.s_u, 1e-8));
        REQUIRE_THAT(again.s_v, WithinAbs(a.s_v, 1e-8));
        REQUIRE_THAT(back.u, WithinAbs(p.u, 1e-8));
        REQUIRE_THAT(back.v, WithinAbs(p.v, 1e-8));
    }
}

TEST_CASE("arc length errors", "[arclength]") {
    const ControlNet net = ControlNet::planar(4, 4, 10.0, 5.0);
    try {
        (void)from_arclength(net, {10.5, 1.0});
        FAIL("expected OutOfRangeError");
    } catch (const OutOfRangeError& ex) {
        REQUIRE_THAT(ex.total_length(), WithinAbs(10.0, 1e-9));
    }
    REQUIRE_THROWS_AS(from_arclength(net, {-1.0, 1.0}), OutOfRangeError);
    REQUIRE_THROWS_AS(from_arclength(net, {1.0, 5.5}), OutOfRangeError);

    // the whole first row collapses to one point: dP/dv vanishes along u = 0
    std::vector<SurfacePoint> pts(9);
    for (int e = 0; e < 3; ++e)
        for (int f = 0; f < 3; ++f) pts[e * 3 + f] = e == 0 ? SurfacePoint(0, 0, 0) : SurfacePoint(e, f, 0);
    const ControlNet fan(3, 3, pts);
    REQUIRE_THROWS_AS(to_arclength(fan, {0.0, 0.5}), DegenerateMetricError);
    REQUIRE_NOTHROW(to_arclength(fan, {0.5, 0.5}));
}
