#pragma once

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nmr/errors.hpp"

namespace nmr {

/// Side-view geometry of a camera over an inclined road.
///
/// The camera sits at (0, h) above its ground contact at the origin. The true
/// road is the line through the origin inclined at theta (positive = rising
/// away from the ego vehicle), and the object touches it at horizontal
/// distance d, i.e. at (d, d tan theta). Backprojection assumes the flat plane
/// z = 0 instead.
struct SceneGeometry {
    double h = 1.0;      ///< camera height, meters
    double d = 1.0;      ///< horizontal distance to the object contact, meters
    double theta = 0.0;  ///< road inclination, radians

    /// Denominator of the flat-ground intersection; must stay positive.
    double clearance() const { return h - d * std::tan(theta); }
    bool valid() const { return h > 0.0 && d > 0.0 && std::isfinite(theta) && clearance() > 0.0; }
};

struct CoordinateErrors {
    double longitudinal = 0.0;  ///< flat estimate minus truth along X
    double vertical = 0.0;      ///< flat estimate minus truth along Z
};

namespace detail {

inline void check_geometry(const SceneGeometry& g) {
    if (!(g.h > 0.0) || !(g.d > 0.0)) throw InvalidArgument("coplanarity: h and d must be positive");
    if (!(g.clearance() > 0.0))
        throw DivergentGeometryError("coplanarity: backprojection ray never meets the assumed ground "
                                     "(h - d tan(theta) = " + std::to_string(g.clearance()) + ")");
}

}  // namespace detail

/// Per-axis error of the flat-ground estimate (h d / (h - d tan theta), 0)
/// against the true contact (d, d tan theta). Lateral error is zero in this model.
inline CoordinateErrors coordinate_errors(const SceneGeometry& g) {
    detail::check_geometry(g);
    const double slope = std::tan(g.theta);
    // h d / (h - d t) - d rewritten as d^2 t / (h - d t): exactly zero on flat roads
    return {g.d * g.d * slope / g.clearance(), -g.d * slope};
}

/// Euclidean localization error caused by assuming a flat road.
inline double backprojection_error(const SceneGeometry& g) {
    const auto e = coordinate_errors(g);
    return std::hypot(e.longitudinal, e.vertical);
}

struct SweepRow {
    double theta = 0.0;
    double error = 0.0;
    double err_longitudinal = 0.0;
    double err_vertical = 0.0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    bool truncated = false;  ///< some angles fell outside the validity domain and were dropped
};

/// Error table over `steps` evenly spaced inclinations in [theta_min, theta_max].
/// Angles where the ray misses the assumed plane are dropped and flagged.
inline SweepTable sweep(double h, double d, double theta_min, double theta_max, int steps) {
    if (steps < 1) throw InvalidArgument("sweep: steps must be >= 1");
    if (!(h > 0.0) || !(d > 0.0)) throw InvalidArgument("sweep: h and d must be positive");
    if (!std::isfinite(theta_min) || !std::isfinite(theta_max) || theta_max < theta_min)
        throw InvalidArgument("sweep: need finite theta_min <= theta_max");
    SweepTable table;
    table.rows.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double theta =
            steps == 1 ? theta_min : theta_min + (theta_max - theta_min) * k / static_cast<double>(steps - 1);
        const SceneGeometry g{h, d, theta};
        // |theta| >= 90 deg is outside the side-view model as well
        if (std::abs(theta) >= std::numbers::pi / 2 || !g.valid()) {
            table.truncated = true;
            continue;
        }
        const auto e = coordinate_errors(g);
        table.rows.push_back({theta, std::hypot(e.longitudinal, e.vertical), e.longitudinal, e.vertical});
    }
    return table;
}

inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    std::ostringstream buf;
    buf << std::setprecision(9);
    buf << "theta_rad,error,err_longitudinal,err_vertical\n";
    // + 0.0 folds negative zero so flat rows print as 0
    for (const auto& r : table.rows)
        buf << r.theta + 0.0 << ',' << r.error + 0.0 << ',' << r.err_longitudinal + 0.0 << ','
            << r.err_vertical + 0.0 << '\n';
    os << buf.str();
}

}  // namespace nmr
