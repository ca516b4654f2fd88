#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmr/attention.hpp"
#include "nmr/errors.hpp"
#include "nmr/surface.hpp"

namespace nmr {

struct LossWeights {
    double eta_pc = 1.0;
    double eta_off = 1.0;
    double eta_ce = 1.0;
};

/// Supervision for one scene: the control net and per-query class ids / offsets.
struct LossTargets {
    Eigen::MatrixXd control_points;  ///< (E*F) x 3
    std::vector<int> class_ids;
    std::vector<Eigen::Vector2d> offsets;
};

struct LossTerms {
    double control = 0.0;  ///< mean absolute control-point error
    double offset = 0.0;   ///< mean absolute offset error
    double cross_entropy = 0.0;
};

/// (E*F) x 3 matrix of control points, row e*F + f.
inline Eigen::MatrixXd control_matrix(const ControlNet& net) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(net.size()), 3);
    for (std::size_t k = 0; k < net.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = net.points()[k].transpose();
    return m;
}

inline ControlNet control_net_from_matrix(const Eigen::MatrixXd& m, std::size_t rows, std::size_t cols) {
    if (m.cols() != 3 || static_cast<std::size_t>(m.rows()) != rows * cols)
        throw ContractViolation("control_net_from_matrix: expected (E*F) x 3");
    std::vector<SurfacePoint> pts(rows * cols);
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = m.row(static_cast<Eigen::Index>(k)).transpose();
    return ControlNet(rows, cols, std::move(pts));
}

/// -log softmax(scores)[label], via log-sum-exp.
inline double cross_entropy(const Eigen::VectorXd& scores, int label) {
    const double top = scores.maxCoeff();
    const double lse = top + std::log((scores.array() - top).exp().sum());
    return lse - scores[label];
}

/// Per-term losses for predictions indexed [iteration][query]. Each term is
/// averaged over queries within an iteration, then equally over iterations.
inline LossTerms loss_terms(const std::vector<std::vector<DecoderOutput>>& pred, const LossTargets& target) {
    if (pred.empty()) throw ContractViolation("total_loss: no iterations");
    const std::size_t queries = target.class_ids.size();
    if (target.offsets.size() != queries)
        throw ContractViolation("total_loss: class ids and offsets disagree in length");
    if (queries == 0) throw ContractViolation("total_loss: no queries");
    if (target.control_points.cols() != 3) throw ContractViolation("total_loss: target control points must be n x 3");

    LossTerms sum;
    for (const auto& iteration : pred) {
        if (iteration.size() != queries)
            throw ContractViolation("total_loss: " + std::to_string(iteration.size()) + " predictions for " +
                                    std::to_string(queries) + " targets");
        LossTerms it;
        for (std::size_t k = 0; k < queries; ++k) {
            const auto& out = iteration[k];
            if (out.control_points.rows() != target.control_points.rows() || out.control_points.cols() != 3)
                throw ContractViolation("total_loss: control point shape mismatch");
            const int label = target.class_ids[k];
            if (label < 0 || label >= out.semantics.size())
                throw ContractViolation("total_loss: class id " + std::to_string(label) + " outside 0..M-1");
            it.control += (out.control_points - target.control_points).cwiseAbs().mean();
            it.offset += (out.offset - target.offsets[k]).cwiseAbs().mean();
            it.cross_entropy += cross_entropy(out.semantics, label);
        }
        const double nq = static_cast<double>(queries);
        sum.control += it.control / nq;
        sum.offset += it.offset / nq;
        sum.cross_entropy += it.cross_entropy / nq;
    }
    const double ni = static_cast<double>(pred.size());
    return {sum.control / ni, sum.offset / ni, sum.cross_entropy / ni};
}

/// eta_PC L_PC + eta_Off L_Off + eta_CE L_CE.
inline double total_loss(const std::vector<std::vector<DecoderOutput>>& pred, const LossTargets& target,
                         const LossWeights& w) {
    if (!(w.eta_pc >= 0.0 && w.eta_off >= 0.0 && w.eta_ce >= 0.0))
        throw InvalidArgument("total_loss: weights must be non-negative");
    const LossTerms t = loss_terms(pred, target);
    return w.eta_pc * t.control + w.eta_off * t.offset + w.eta_ce * t.cross_entropy;
}

}  // namespace nmr
