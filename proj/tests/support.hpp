#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <nmr/surface.hpp>

namespace nmr::test {

/// Planar grid over [0,length] x [0,width] with every coordinate jittered by
/// up to `jitter` times the control spacing.
inline ControlNet random_regular_net(std::mt19937_64& rng, std::size_t rows = 7, std::size_t cols = 5,
                                     double length = 20.0, double width = 10.0, double jitter = 0.2) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double dx = length / static_cast<double>(rows - 1);
    const double dy = width / static_cast<double>(cols - 1);
    const double dz = std::min(dx, dy);
    ControlNet net = ControlNet::planar(rows, cols, length, width);
    for (std::size_t e = 0; e < rows; ++e)
        for (std::size_t f = 0; f < cols; ++f) {
            auto& p = net.at(e, f);
            p.x() += jitter * dx * unit(rng);
            p.y() += jitter * dy * unit(rng);
            p.z() += jitter * dz * unit(rng);
        }
    return net;
}

/// Control points sampled from the quarter cylinder y^2 + z^2 = radius^2,
/// y, z >= 0, with the u direction running around the arc.
inline ControlNet quarter_cylinder_net(double radius, std::size_t rows = 7, std::size_t cols = 5,
                                       double length = 6.0) {
    std::vector<SurfacePoint> pts;
    for (std::size_t e = 0; e < rows; ++e) {
        const double angle = 0.5 * 3.14159265358979323846 * static_cast<double>(e) / static_cast<double>(rows - 1);
        for (std::size_t f = 0; f < cols; ++f)
            pts.emplace_back(length * static_cast<double>(f) / static_cast<double>(cols - 1),
                             radius * std::cos(angle), radius * std::sin(angle));
    }
    return ControlNet(rows, cols, std::move(pts));
}

/// Direct double-sum evaluation with Pascal-triangle binomials and std::pow;
/// shares no code with the library's basis routine.
inline SurfacePoint evaluate_direct(const ControlNet& net, double u, double v) {
    auto binom = [](std::size_t n, std::size_t k) {
        std::vector<double> row{1.0};
        for (std::size_t i = 1; i <= n; ++i) {
            std::vector<double> next(i + 1, 1.0);
            for (std::size_t j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
            row = next;
        }
        return row[k];
    };
    const std::size_t n = net.rows() - 1, m = net.cols() - 1;
    SurfacePoint out = SurfacePoint::Zero();
    for (std::size_t e = 0; e <= n; ++e)
        for (std::size_t f = 0; f <= m; ++f) {
            const double be = binom(n, e) * std::pow(u, double(e)) * std::pow(1 - u, double(n - e));
            const double bf = binom(m, f) * std::pow(v, double(f)) * std::pow(1 - v, double(m - f));
            out += be * bf * net.at(e, f);
        }
    return out;
}

}  // namespace nmr::test
