#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nmr/bernstein.hpp"
#include "nmr/errors.hpp"

namespace nmr {

/// Point on the surface (or a query location), meters in the ego frame:
/// X forward, Y left, Z up.
using SurfacePoint = Eigen::Vector3d;

/// Surface parameters in the unit square.
struct ParamPoint {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
};

/// E x F grid of control points of a tensor-product Bezier patch.
///
/// Rows (index e) run along u, the vehicle-forward direction; columns
/// (index f) run along v, the lateral direction. Storage is row-major.
class ControlNet {
public:
    ControlNet(std::size_t rows, std::size_t cols, std::vector<SurfacePoint> points)
        : rows_(rows), cols_(cols), points_(std::move(points)) {
        if (rows_ < 2 || cols_ < 2)
            throw InvalidArgument("ControlNet: E and F must both be >= 2");
        if (points_.size() != rows_ * cols_)
            throw InvalidArgument("ControlNet: expected " + std::to_string(rows_ * cols_) +
                                  " points, got " + std::to_string(points_.size()));
        for (const auto& p : points_)
            if (!p.allFinite()) throw InvalidArgument("ControlNet: non-finite coordinate");
    }

    /// Flat net spanning [x0, x0+length] x [y0, y0+width] at height z,
    /// with uniformly spaced control points.
    static ControlNet planar(std::size_t rows, std::size_t cols, double length, double width,
                             double x0 = 0.0, double y0 = 0.0, double z = 0.0) {
        std::vector<SurfacePoint> pts;
        pts.reserve(rows * cols);
        for (std::size_t e = 0; e < rows; ++e)
            for (std::size_t f = 0; f < cols; ++f)
                pts.emplace_back(x0 + length * static_cast<double>(e) / static_cast<double>(rows - 1),
                                 y0 + width * static_cast<double>(f) / static_cast<double>(cols - 1),
                                 z);
        return ControlNet(rows, cols, std::move(pts));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return points_.size(); }

    const SurfacePoint& at(std::size_t e, std::size_t f) const { return points_[e * cols_ + f]; }
    SurfacePoint& at(std::size_t e, std::size_t f) { return points_[e * cols_ + f]; }

    std::span<const SurfacePoint> points() const noexcept { return points_; }

    /// Largest distance of any control point from the first one; a length scale for tolerances.
    double extent() const {
        double r = 0.0;
        for (const auto& p : points_) r = std::max(r, (p - points_.front()).norm());
        return r;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<SurfacePoint> points_;
};

/// Position and partial derivatives up to second order at one parameter.
struct SurfaceJet {
    SurfacePoint point = SurfacePoint::Zero();
    Eigen::Vector3d du = Eigen::Vector3d::Zero();
    Eigen::Vector3d dv = Eigen::Vector3d::Zero();
    Eigen::Vector3d duu = Eigen::Vector3d::Zero();
    Eigen::Vector3d duv = Eigen::Vector3d::Zero();
    Eigen::Vector3d dvv = Eigen::Vector3d::Zero();
};

inline void check_param(const ParamPoint& p) {
    detail::check_unit(p.u, "u");
    detail::check_unit(p.v, "v");
}

/// Full second-order jet of the patch at p.
inline SurfaceJet surface_jet(const ControlNet& net, const ParamPoint& p) {
    check_param(p);
    const BasisJet bu = bernstein_jet(net.rows(), p.u);
    const BasisJet bv = bernstein_jet(net.cols(), p.v);
    SurfaceJet jet;
    for (std::size_t e = 0; e < net.rows(); ++e) {
        for (std::size_t f = 0; f < net.cols(); ++f) {
            const SurfacePoint& c = net.at(e, f);
            jet.point += (bu.value[e] * bv.value[f]) * c;
            jet.du += (bu.d1[e] * bv.value[f]) * c;
            jet.dv += (bu.value[e] * bv.d1[f]) * c;
            jet.duu += (bu.d2[e] * bv.value[f]) * c;
            jet.duv += (bu.d1[e] * bv.d1[f]) * c;
            jet.dvv += (bu.value[e] * bv.d2[f]) * c;
        }
    }
    return jet;
}

/// P(u,v) = sum_e sum_f P_ef B_e^E(u) B_f^F(v).
inline SurfacePoint evaluate(const ControlNet& net, const ParamPoint& p) {
    check_param(p);
    std::vector<double> bu(net.rows()), bv(net.cols());
    detail::bernstein_into(net.rows(), p.u, bu);
    detail::bernstein_into(net.cols(), p.v, bv);
    SurfacePoint out = SurfacePoint::Zero();
    for (std::size_t e = 0; e < net.rows(); ++e) {
        Eigen::Vector3d row = Eigen::Vector3d::Zero();
        for (std::size_t f = 0; f < net.cols(); ++f) row += bv[f] * net.at(e, f);
        out += bu[e] * row;
    }
    return out;
}

/// (dP/du, dP/dv) at p.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> partials(const ControlNet& net,
                                                            const ParamPoint& p) {
    check_param(p);
    const std::size_t E = net.rows(), F = net.cols();
    std::vector<double> bu(E), bv(F), lu(E - 1), lv(F - 1);
    detail::bernstein_into(E, p.u, bu);
    detail::bernstein_into(F, p.v, bv);
    detail::bernstein_into(E - 1, p.u, lu);
    detail::bernstein_into(F - 1, p.v, lv);
    // forward differences of the control net against the degree-lowered basis
    Eigen::Vector3d du = Eigen::Vector3d::Zero(), dv = Eigen::Vector3d::Zero();
    for (std::size_t e = 0; e + 1 < E; ++e)
        for (std::size_t f = 0; f < F; ++f)
            du += (lu[e] * bv[f]) * (net.at(e + 1, f) - net.at(e, f));
    for (std::size_t e = 0; e < E; ++e)
        for (std::size_t f = 0; f + 1 < F; ++f)
            dv += (bu[e] * lv[f]) * (net.at(e, f + 1) - net.at(e, f));
    du *= static_cast<double>(E - 1);
    dv *= static_cast<double>(F - 1);
    return {du, dv};
}

/// Output of least-squares control-net fitting.
struct FitResult {
    ControlNet net;
    double rms_residual = 0.0;
    double max_residual = 0.0;
};

struct FitSample {
    ParamPoint param;
    SurfacePoint point;
};

/// Least-squares fit of an E x F net to (parameter, point) samples through the
/// normal equations (A^T A + ridge I) X = A^T B.
inline FitResult fit_control_net(std::span<const FitSample> samples, std::size_t rows,
                                 std::size_t cols, double ridge = 0.0) {
    if (rows < 2 || cols < 2) throw InvalidArgument("fit_control_net: E and F must be >= 2");
    if (!(ridge >= 0.0)) throw InvalidArgument("fit_control_net: ridge must be non-negative");
    const std::size_t unknowns = rows * cols;
    const auto n = static_cast<Eigen::Index>(samples.size());
    if (ridge == 0.0 && samples.size() < unknowns)
        throw SingularSystemError("fit_control_net: " + std::to_string(samples.size()) +
                                  " samples cannot determine " + std::to_string(unknowns) +
                                  " control points");

    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(unknowns));
    Eigen::MatrixXd targets(n, 3);
    std::vector<double> bu(rows), bv(cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        check_param(s.param);
        detail::bernstein_into(rows, s.param.u, bu);
        detail::bernstein_into(cols, s.param.v, bv);
        for (std::size_t e = 0; e < rows; ++e)
            for (std::size_t f = 0; f < cols; ++f)
                design(i, static_cast<Eigen::Index>(e * cols + f)) = bu[e] * bv[f];
        targets.row(i) = s.point.transpose();
    }

    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().array() += ridge;
    if (ridge == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 1e-13 * hi))
            throw SingularSystemError("fit_control_net: normal equations are rank deficient");
    }
    const Eigen::MatrixXd solution = normal.ldlt().solve(design.transpose() * targets);

    std::vector<SurfacePoint> pts(unknowns);
    for (std::size_t k = 0; k < unknowns; ++k)
        pts[k] = solution.row(static_cast<Eigen::Index>(k)).transpose();

    const Eigen::MatrixXd resid = design * solution - targets;
    const Eigen::VectorXd dist = resid.rowwise().norm();
    FitResult out{ControlNet(rows, cols, std::move(pts)), 0.0, 0.0};
    if (n > 0) {
        out.rms_residual = std::sqrt(dist.squaredNorm() / static_cast<double>(n));
        out.max_residual = dist.maxCoeff();
    }
    return out;
}

}  // namespace nmr
