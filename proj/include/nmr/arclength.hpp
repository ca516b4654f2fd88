#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nmr/errors.hpp"
#include "nmr/quadrature.hpp"
#include "nmr/surface.hpp"

namespace nmr {

/// Arc lengths along the iso-parameter lines through a surface point, meters.
///
/// Convention: s_u is measured from u = 0 along the iso-v line through the
/// point, s_v from v = 0 along the iso-u line through it. On curved,
/// non-developable patches the pair is path dependent; this convention fixes it.
struct ArcPoint {
    double s_u = 0.0;
    double s_v = 0.0;
};

struct QuadratureOptions {
    int order = 32;        ///< Gauss-Legendre nodes per subinterval
    int subintervals = 8;  ///< composite panels over the unit parameter interval
};

namespace detail {

inline void check_speed(double speed, double scale, const char* axis) {
    if (!(speed > 1e-12 * std::max(scale, 1.0)))
        throw DegenerateMetricError(std::string("arc length: vanishing ") + axis +
                                    " tangent along integration path");
}

inline double speed_u(const ControlNet& net, double u, double v) {
    return partials(net, {u, v}).first.norm();
}

inline double speed_v(const ControlNet& net, double u, double v) {
    return partials(net, {u, v}).second.norm();
}

// Panels scale with the parameter span so short increments stay cheap.
inline int panels_for(double span, const QuadratureOptions& q) {
    return std::max(1, static_cast<int>(std::ceil(std::abs(span) * q.subintervals - 1e-12)));
}

}  // namespace detail

/// Integral of ||dP/du(t, v)|| for t in [u0, u1].
inline double arc_length_u(const ControlNet& net, double v, double u0, double u1,
                           const QuadratureOptions& q = {}) {
    detail::check_unit(v, "v");
    detail::check_unit(u0, "u0");
    detail::check_unit(u1, "u1");
    if (u0 == u1) return 0.0;
    const double scale = net.extent();
    return integrate(
        [&](double t) {
            const double s = detail::speed_u(net, t, v);
            detail::check_speed(s, scale, "u");
            return s;
        },
        u0, u1, q.order, detail::panels_for(u1 - u0, q));
}

/// Integral of ||dP/dv(u, t)|| for t in [v0, v1].
inline double arc_length_v(const ControlNet& net, double u, double v0, double v1,
                           const QuadratureOptions& q = {}) {
    detail::check_unit(u, "u");
    detail::check_unit(v0, "v0");
    detail::check_unit(v1, "v1");
    if (v0 == v1) return 0.0;
    const double scale = net.extent();
    return integrate(
        [&](double t) {
            const double s = detail::speed_v(net, u, t);
            detail::check_speed(s, scale, "v");
            return s;
        },
        v0, v1, q.order, detail::panels_for(v1 - v0, q));
}

/// (u,v) -> (s_u, s_v) by composite Gauss-Legendre quadrature of the metric.
inline ArcPoint to_arclength(const ControlNet& net, const ParamPoint& p,
                             const QuadratureOptions& q = {}) {
    check_param(p);
    return {arc_length_u(net, p.v, 0.0, p.u, q), arc_length_v(net, p.u, 0.0, p.v, q)};
}

namespace detail {

// Solves L(x) = target for the monotone arc length L along one iso-line,
// by Newton steps kept inside a shrinking bracket (bisection when Newton leaves it).
template <typename Segment, typename Speed>
double invert_monotone(Segment&& segment, Speed&& speed, double target, double total) {
    if (target <= 0.0) return 0.0;
    if (target >= total) return 1.0;
    double lo = 0.0, hi = 1.0;
    double x = target / total;
    double value = segment(0.0, x);
    const double eps = 1e-14 * std::max(total, 1.0);
    for (int it = 0; it < 200; ++it) {
        const double err = value - target;
        if (std::abs(err) <= eps) break;
        if (err > 0.0)
            hi = x;
        else
            lo = x;
        double next = x - err / speed(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) break;
        value += next > x ? segment(x, next) : -segment(next, x);
        x = next;
    }
    return x;
}

}  // namespace detail

/// Inverse of to_arclength: finds (u,v) whose arc-length coordinates equal `a`.
///
/// Starting from `anchor`, alternately solves s_u along the current iso-v line
/// and s_v along the current iso-u line until both match to `tol`. A target
/// longer than the iso-line it must lie on raises OutOfRangeError carrying
/// that line's total length.
inline ParamPoint from_arclength(const ControlNet& net, const ArcPoint& a,
                                 const ParamPoint& anchor = {}, double tol = 1e-10,
                                 const QuadratureOptions& q = {}) {
    check_param(anchor);
    if (!(tol > 0.0)) throw InvalidArgument("from_arclength: tol must be positive");
    auto out_of_range = [](const char* axis, double s, double total) {
        return OutOfRangeError(std::string("from_arclength: ") + axis + " = " + std::to_string(s) +
                                   " beyond iso-line length " + std::to_string(total),
                               total);
    };
    if (!(a.s_u >= 0.0)) throw out_of_range("s_u", a.s_u, 0.0);
    if (!(a.s_v >= 0.0)) throw out_of_range("s_v", a.s_v, 0.0);

    double u = anchor.u, v = anchor.v;
    for (int sweep = 0; sweep < 200; ++sweep) {
        const double total_u = arc_length_u(net, v, 0.0, 1.0, q);
        const double u_next = detail::invert_monotone(
            [&](double x0, double x1) { return arc_length_u(net, v, x0, x1, q); },
            [&](double x) { return detail::speed_u(net, x, v); }, a.s_u, total_u);
        const double total_v = arc_length_v(net, u_next, 0.0, 1.0, q);
        const double v_next = detail::invert_monotone(
            [&](double x0, double x1) { return arc_length_v(net, u_next, x0, x1, q); },
            [&](double x) { return detail::speed_v(net, u_next, x); }, a.s_v, total_v);
        const bool stalled = std::abs(u_next - u) + std::abs(v_next - v) == 0.0;
        u = u_next;
        v = v_next;

        // v was just solved on the current iso-u line; only s_u can have drifted
        if (a.s_v > total_v + tol) {
            if (stalled) throw out_of_range("s_v", a.s_v, total_v);
            continue;
        }
        const double total_here = u == 1.0 ? arc_length_u(net, v, 0.0, 1.0, q) : 0.0;
        if (u == 1.0 && a.s_u > total_here + tol) {
            if (stalled) throw out_of_range("s_u", a.s_u, total_here);
            continue;
        }
        if (std::abs(arc_length_u(net, v, 0.0, u, q) - a.s_u) <= tol) return {u, v};
    }
    throw DegenerateMetricError("from_arclength: alternating solve did not converge");
}

}  // namespace nmr
