#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmr/errors.hpp"
#include "nmr/surface.hpp"

namespace nmr {

/// Box constraints of the unit square that hold the solution.
struct ActiveBounds {
    bool u_low = false;
    bool u_high = false;
    bool v_low = false;
    bool v_high = false;

    bool u_clamped() const noexcept { return u_low || u_high; }
    bool v_clamped() const noexcept { return v_low || v_high; }
    bool any() const noexcept { return u_clamped() || v_clamped(); }

    friend bool operator==(const ActiveBounds&, const ActiveBounds&) = default;
};

struct InversionResult {
    ParamPoint p;
    double residual = 0.0;  ///< ||query - P(p)||, meters
    int iterations = 0;
    bool converged = false;
    ActiveBounds active_bounds;
    double gradient_norm = 0.0;  ///< projected-gradient norm of 0.5||query - P||^2 at p
};

struct InversionOptions {
    double tol = 1e-10;  ///< on the projected-gradient norm
    int max_iter = 100;
    std::optional<ParamPoint> init;
    int seeds_per_axis = 3;
};

namespace detail {

struct FirstOrder {
    SurfacePoint point;
    Eigen::Vector3d du;
    Eigen::Vector3d dv;
};

// Reuses basis buffers across Gauss-Newton iterations.
class PatchEvaluator {
public:
    explicit PatchEvaluator(const ControlNet& net)
        : net_(net), bu_(net.rows()), bv_(net.cols()), lu_(net.rows() - 1), lv_(net.cols() - 1) {}

    FirstOrder operator()(double u, double v) {
        const std::size_t E = net_.rows(), F = net_.cols();
        bernstein_into(E, u, bu_);
        bernstein_into(F, v, bv_);
        bernstein_into(E - 1, u, lu_);
        bernstein_into(F - 1, v, lv_);
        FirstOrder out{SurfacePoint::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
        for (std::size_t e = 0; e < E; ++e) {
            for (std::size_t f = 0; f < F; ++f) {
                const SurfacePoint& c = net_.at(e, f);
                out.point += (bu_[e] * bv_[f]) * c;
                if (e + 1 < E) out.du += (lu_[e] * bv_[f]) * (net_.at(e + 1, f) - c);
                if (f + 1 < F) out.dv += (bu_[e] * lv_[f]) * (net_.at(e, f + 1) - c);
            }
        }
        out.du *= static_cast<double>(E - 1);
        out.dv *= static_cast<double>(F - 1);
        return out;
    }

private:
    const ControlNet& net_;
    std::vector<double> bu_, bv_, lu_, lv_;
};

inline double projected_component(double x, double g) {
    if (x <= 0.0 && g > 0.0) return 0.0;
    if (x >= 1.0 && g < 0.0) return 0.0;
    return g;
}

struct LocalSolution {
    ParamPoint p;
    double objective;
    double gradient_norm;
    int iterations;
    bool converged;
};

inline LocalSolution gauss_newton(PatchEvaluator& eval, const SurfacePoint& query, ParamPoint start,
                                  double tol, int max_iter) {
    double u = std::clamp(start.u, 0.0, 1.0);
    double v = std::clamp(start.v, 0.0, 1.0);
    FirstOrder s = eval(u, v);
    Eigen::Vector3d r = s.point - query;
    double f = 0.5 * r.squaredNorm();
    int it = 0;
    for (;; ++it) {
        const double gu = s.du.dot(r), gv = s.dv.dot(r);
        const double pgu = projected_component(u, gu), pgv = projected_component(v, gv);
        const double pg = std::hypot(pgu, pgv);
        if (pg < tol) return {{u, v}, f, pg, it, true};
        if (it >= max_iter) return {{u, v}, f, pg, it, false};

        const bool free_u = pgu != 0.0, free_v = pgv != 0.0;
        const double huu = s.du.squaredNorm(), huv = s.du.dot(s.dv), hvv = s.dv.squaredNorm();
        double du = 0.0, dv = 0.0;
        if (free_u && free_v) {
            const double det = huu * hvv - huv * huv;
            if (det > 1e-14 * huu * hvv) {
                du = -(hvv * gu - huv * gv) / det;
                dv = -(huu * gv - huv * gu) / det;
            } else {
                const double scale = 1.0 / std::max(huu + hvv, 1e-300);
                du = -gu * scale;
                dv = -gv * scale;
            }
        } else if (free_u) {
            du = -gu / std::max(huu, 1e-300);
        } else {
            dv = -gv / std::max(hvv, 1e-300);
        }

        // Armijo backtracking along the projected path. Once the predicted
        // decrease drops below the resolution of f, take the step outright.
        const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + f);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
            const double un = std::clamp(u + alpha * du, 0.0, 1.0);
            const double vn = std::clamp(v + alpha * dv, 0.0, 1.0);
            const double descent = gu * (un - u) + gv * (vn - v);
            FirstOrder sn = eval(un, vn);
            Eigen::Vector3d rn = sn.point - query;
            const double fn = 0.5 * rn.squaredNorm();
            if (fn <= f + 1e-4 * descent || (std::abs(descent) <= slack && fn <= f + slack)) {
                if (un == u && vn == v) break;
                u = un;
                v = vn;
                s = sn;
                r = rn;
                f = fn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            ++it;
            const double gu2 = s.du.dot(r), gv2 = s.dv.dot(r);
            const double pg2 = std::hypot(projected_component(u, gu2), projected_component(v, gv2));
            return {{u, v}, f, pg2, it, pg2 < tol};
        }
    }
}

inline void check_regular(const ControlNet& net) {
    const double scale = net.extent();
    double max_area = 0.0;
    if (scale > 0.0) {
        for (int i = 0; i <= 4; ++i)
            for (int j = 0; j <= 4; ++j) {
                const auto [du, dv] = partials(net, {i / 4.0, j / 4.0});
                max_area = std::max(max_area, du.cross(dv).norm());
            }
    }
    if (!(max_area > 1e-12 * scale * scale))
        throw DegenerateSurfaceError("invert_point: control net spans zero area");
}

}  // namespace detail

/// Closest point on the patch to `query` under 0 <= u,v <= 1.
///
/// Squared distance is minimized by projected Gauss-Newton with Armijo
/// backtracking from a uniform seed lattice (cell centers) plus the optional
/// caller seed; the lowest objective wins and near-ties (< 1e-12) go to the
/// lexicographically smallest (u,v).
inline InversionResult invert_point(const ControlNet& net, const SurfacePoint& query,
                                    const InversionOptions& opts = {}) {
    if (!(opts.tol > 0.0)) throw InvalidArgument("invert_point: tol must be positive");
    if (opts.max_iter < 0) throw InvalidArgument("invert_point: max_iter must be >= 0");
    if (opts.seeds_per_axis < 1) throw InvalidArgument("invert_point: seeds_per_axis must be >= 1");
    if (!query.allFinite()) throw InvalidArgument("invert_point: non-finite query");
    detail::check_regular(net);

    std::vector<ParamPoint> seeds;
    if (opts.init) {
        check_param(*opts.init);
        seeds.push_back(*opts.init);
    }
    const int n = opts.seeds_per_axis;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            seeds.push_back({(i + 0.5) / n, (j + 0.5) / n});

    detail::PatchEvaluator eval(net);
    std::optional<detail::LocalSolution> best;
    for (const auto& seed : seeds) {
        auto cand = detail::gauss_newton(eval, query, seed, opts.tol, opts.max_iter);
        if (!best) {
            best = cand;
            continue;
        }
        const double diff = cand.objective - best->objective;
        if (diff < -1e-12) {
            best = cand;
        } else if (std::abs(diff) < 1e-12) {
            const bool smaller = cand.p.u < best->p.u || (cand.p.u == best->p.u && cand.p.v < best->p.v);
            if (smaller) best = cand;
        }
    }

    InversionResult out;
    out.p = best->p;
    out.residual = (eval(out.p.u, out.p.v).point - query).norm();
    out.iterations = best->iterations;
    out.converged = best->converged;
    out.gradient_norm = best->gradient_norm;
    out.active_bounds = {out.p.u == 0.0, out.p.u == 1.0, out.p.v == 0.0, out.p.v == 1.0};
    return out;
}

inline InversionResult invert_point(const ControlNet& net, const SurfacePoint& query,
                                    std::optional<ParamPoint> init, double tol = 1e-10,
                                    int max_iter = 100) {
    InversionOptions opts;
    opts.init = init;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return invert_point(net, query, opts);
}

/// Sensitivities of the inversion solution.
///
/// `d_net` columns are ordered (e * F + f) * 3 + c for control point (e, f)
/// and coordinate c in {x, y, z}, with e and f zero-based.
struct InversionJacobian {
    Eigen::Matrix<double, 2, 3> d_query;
    Eigen::MatrixXd d_net;
    double condition_number = 1.0;
};

/// Implicit-function-theorem derivatives of (u,v) with respect to the query
/// and the control points, from the stationarity condition
/// G = J^T (P(u,v) - q) = 0:  H d(u,v) = -dG.  Clamped coordinates are held
/// fixed, so their rows are zero and the free coordinate uses the reduced system.
inline InversionJacobian inversion_jacobian(const ControlNet& net, const SurfacePoint& query,
                                            const InversionResult& solution) {
    if (!solution.converged)
        throw ContractViolation("inversion_jacobian: solution did not converge");
    const ParamPoint p = solution.p;
    const std::size_t E = net.rows(), F = net.cols();
    const SurfaceJet jet = surface_jet(net, p);
    const BasisJet bu = bernstein_jet(E, p.u);
    const BasisJet bv = bernstein_jet(F, p.v);
    const Eigen::Vector3d r = jet.point - query;

    Eigen::Matrix2d hess;
    hess(0, 0) = jet.du.squaredNorm() + r.dot(jet.duu);
    hess(0, 1) = jet.du.dot(jet.dv) + r.dot(jet.duv);
    hess(1, 0) = hess(0, 1);
    hess(1, 1) = jet.dv.squaredNorm() + r.dot(jet.dvv);

    const bool free_u = !solution.active_bounds.u_clamped();
    const bool free_v = !solution.active_bounds.v_clamped();

    const auto cols = static_cast<Eigen::Index>(E * F * 3);
    Eigen::Matrix<double, 2, 3> dgdq;  // dG/dq = -J^T
    dgdq.row(0) = -jet.du.transpose();
    dgdq.row(1) = -jet.dv.transpose();
    Eigen::MatrixXd dgdp(2, cols);
    for (std::size_t e = 0; e < E; ++e) {
        for (std::size_t f = 0; f < F; ++f) {
            const double w = bu.value[e] * bv.value[f];
            const double wu = bu.d1[e] * bv.value[f];
            const double wv = bu.value[e] * bv.d1[f];
            for (int c = 0; c < 3; ++c) {
                const auto k = static_cast<Eigen::Index>((e * F + f) * 3 + static_cast<std::size_t>(c));
                dgdp(0, k) = wu * r[c] + jet.du[c] * w;
                dgdp(1, k) = wv * r[c] + jet.dv[c] * w;
            }
        }
    }

    InversionJacobian out;
    out.d_query.setZero();
    out.d_net = Eigen::MatrixXd::Zero(2, cols);
    if (free_u && free_v) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(hess);
        const double lo = eig.eigenvalues().cwiseAbs().minCoeff();
        const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
        const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        out.condition_number = cond;
        if (!(cond < 1e12))
            throw IllConditionedJacobianError(
                "inversion_jacobian: singular Hessian (condition " + std::to_string(cond) + ")", cond);
        const Eigen::Matrix2d inv = hess.inverse();
        out.d_query = -inv * dgdq;
        out.d_net = -inv * dgdp;
    } else if (free_u || free_v) {
        const int i = free_u ? 0 : 1;
        const double h = hess(i, i);
        const double scale = i == 0 ? jet.du.squaredNorm() : jet.dv.squaredNorm();
        const double cond = h != 0.0 ? std::abs(scale / h) : std::numeric_limits<double>::infinity();
        out.condition_number = cond;
        if (!(std::abs(h) > 1e-12 * scale))
            throw IllConditionedJacobianError(
                "inversion_jacobian: flat objective along the free coordinate", cond);
        out.d_query.row(i) = -dgdq.row(i) / h;
        out.d_net.row(i) = -dgdp.row(i) / h;
    }
    return out;
}

}  // namespace nmr
