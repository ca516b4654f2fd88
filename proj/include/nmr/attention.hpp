#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmr/errors.hpp"

namespace nmr {

/// Encoder output Z: one row per (sensor, timestep, patch), C columns.
/// Row index is (s * T + t) * P + p.
struct LatentFeatures {
    int S = 1;
    int T = 1;
    int P = 1;
    int C = 1;
    Eigen::MatrixXd data;

    Eigen::Index rows() const { return data.rows(); }
};

/// q = (x, y, z, t, x', y', z'): query location, time, target location.
struct QueryPoint {
    double x = 0.0, y = 0.0, z = 0.0;
    double t = 0.0;
    double xp = 0.0, yp = 0.0, zp = 0.0;

    Eigen::Matrix<double, 7, 1> as_vector() const {
        Eigen::Matrix<double, 7, 1> v;
        v << x, y, z, t, xp, yp, zp;
        return v;
    }
};

struct AttentionState {
    Eigen::VectorXd weights;  ///< length S*T*P, non-negative, sums to 1
    Eigen::VectorXd pooled;   ///< weights^T Z, length C
    int iteration = 0;
};

namespace detail {

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::initializer_list<std::uint32_t> salt) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    words.insert(words.end(), salt.begin(), salt.end());
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

// Dyadic value k / 2^20 with |value| <= 1. Sums of a few of these, and their
// sum with small integers, are exact in double.
inline double dyadic_unit(std::mt19937_64& rng) {
    const auto k = static_cast<std::int64_t>(rng() >> 43) - (std::int64_t{1} << 20);
    return static_cast<double>(k) * 0x1.0p-20;
}

inline double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace detail

/// Deterministic stand-in for the image encoder: seeded patch features plus a
/// seeded per-(timestep, patch) position embedding, with `speed` added to every entry.
inline LatentFeatures stub_encoder(std::uint64_t seed, int S, int T, int P, int C, double speed) {
    if (S < 1 || T < 1 || P < 1 || C < 1) throw InvalidArgument("stub_encoder: all dimensions must be >= 1");
    if (!std::isfinite(speed)) throw InvalidArgument("stub_encoder: speed must be finite");
    LatentFeatures z{S, T, P, C, Eigen::MatrixXd(S * T * P, C)};
    auto patch_rng = detail::seeded_engine(seed, {1u, static_cast<std::uint32_t>(S), static_cast<std::uint32_t>(T),
                                                  static_cast<std::uint32_t>(P), static_cast<std::uint32_t>(C)});
    for (Eigen::Index r = 0; r < z.data.rows(); ++r)
        for (Eigen::Index c = 0; c < C; ++c) z.data(r, c) = detail::dyadic_unit(patch_rng);
    auto pos_rng = detail::seeded_engine(seed, {2u, static_cast<std::uint32_t>(T), static_cast<std::uint32_t>(P),
                                                static_cast<std::uint32_t>(C)});
    Eigen::MatrixXd pos(T * P, C);
    for (Eigen::Index r = 0; r < pos.rows(); ++r)
        for (Eigen::Index c = 0; c < C; ++c) pos(r, c) = 0.5 * detail::dyadic_unit(pos_rng);
    for (int s = 0; s < S; ++s)
        z.data.middleRows(static_cast<Eigen::Index>(s) * T * P, T * P) += pos;
    z.data.array() += speed;
    return z;
}

/// Numerically stable softmax.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
    const double top = scores.maxCoeff();
    Eigen::VectorXd e = (scores.array() - top).exp().matrix();
    return e / e.sum();
}

/// Iterative attention: state 0 attends uniformly; state i re-weights Z by
/// softmax(scorer(q, pooled_{i-1})). The one scorer instance is applied at
/// every iteration, so its parameters are shared across all N steps.
template <typename Scorer>
std::vector<AttentionState> iterate_attention(const LatentFeatures& z, const QueryPoint& q, Scorer& scorer, int N) {
    if (N < 1) throw InvalidArgument("iterate_attention: N must be >= 1");
    const Eigen::Index n = z.rows();
    if (n < 1) throw ContractViolation("iterate_attention: empty feature matrix");
    std::vector<AttentionState> states;
    states.reserve(static_cast<std::size_t>(N) + 1);
    AttentionState first;
    first.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    first.pooled = z.data.transpose() * first.weights;
    first.iteration = 0;
    states.push_back(std::move(first));
    for (int i = 1; i <= N; ++i) {
        const Eigen::VectorXd scores = scorer(q, states.back().pooled);
        if (scores.size() != n)
            throw ContractViolation("iterate_attention: scorer returned " + std::to_string(scores.size()) +
                                    " scores for " + std::to_string(n) + " features");
        AttentionState next;
        next.weights = softmax(scores);
        next.pooled = z.data.transpose() * next.weights;
        next.iteration = i;
        states.push_back(std::move(next));
    }
    return states;
}

/// Scorer that never changes the attention: all scores zero.
class ZeroScorer {
public:
    explicit ZeroScorer(Eigen::Index rows) : rows_(rows) {}
    Eigen::VectorXd operator()(const QueryPoint&, const Eigen::VectorXd&) const {
        return Eigen::VectorXd::Zero(rows_);
    }

private:
    Eigen::Index rows_;
};

/// Seeded dot-product attention scorer: embeds (q, pooled) into feature space
/// with one tanh layer and scores each row of Z against it, scaled by 1/sqrt(C).
class DotProductScorer {
public:
    DotProductScorer(const LatentFeatures& z, std::uint64_t seed) : z_(z) {
        const int C = z.C;
        auto rng = detail::seeded_engine(seed, {3u, static_cast<std::uint32_t>(C)});
        w_query_.resize(C, 7);
        w_pooled_.resize(C, C);
        bias_.resize(C);
        const double sq = 0.1 / std::sqrt(7.0), sp = 1.0 / std::sqrt(static_cast<double>(C));
        for (Eigen::Index i = 0; i < w_query_.size(); ++i) w_query_.data()[i] = sq * detail::uniform_pm1(rng);
        for (Eigen::Index i = 0; i < w_pooled_.size(); ++i) w_pooled_.data()[i] = sp * detail::uniform_pm1(rng);
        for (Eigen::Index i = 0; i < bias_.size(); ++i) bias_[i] = 0.1 * detail::uniform_pm1(rng);
    }

    Eigen::VectorXd operator()(const QueryPoint& q, const Eigen::VectorXd& pooled) const {
        const Eigen::VectorXd h = (w_query_ * q.as_vector() + w_pooled_ * pooled + bias_).array().tanh().matrix();
        return (z_.data * h) / std::sqrt(static_cast<double>(z_.C));
    }

private:
    const LatentFeatures& z_;
    Eigen::MatrixXd w_query_;
    Eigen::MatrixXd w_pooled_;
    Eigen::VectorXd bias_;
};

struct DecoderOutput {
    Eigen::VectorXd semantics;       ///< M class scores
    Eigen::Vector2d offset;          ///< waypoint offset in (s_u, s_v), meters
    Eigen::MatrixXd control_points;  ///< (E*F) x 3, row e*F + f
};

/// Extent of the flat control net the control head is biased toward.
struct DecoderExtent {
    double length = 40.0;  ///< along u / X, meters
    double width = 20.0;   ///< along v / Y, centered on the ego vehicle
};

/// Fixed seeded affine heads. The semantic and offset heads read [pooled; q];
/// the control-point head reads only the pooled features, so decoding the
/// query-independent uniform state yields the scene's shared control net.
class StubDecoder {
public:
    StubDecoder(std::uint64_t seed, int C, int M, int E, int F, DecoderExtent extent = {})
        : C_(C), M_(M), E_(E), F_(F) {
        if (C < 1 || M < 1 || E < 2 || F < 2)
            throw InvalidArgument("StubDecoder: need C, M >= 1 and E, F >= 2");
        auto rng = detail::seeded_engine(seed, {4u, static_cast<std::uint32_t>(C), static_cast<std::uint32_t>(M),
                                                static_cast<std::uint32_t>(E), static_cast<std::uint32_t>(F)});
        const int in = C + 7;
        const double s_in = 1.0 / std::sqrt(static_cast<double>(in));
        auto fill = [&](Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c, double scale) {
            m.resize(r, c);
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * detail::uniform_pm1(rng);
        };
        fill(w_sem_, M, in, s_in);
        fill(w_off_, 2, in, s_in);
        fill(w_ctrl_, 3 * E * F, C, 0.25 / std::sqrt(static_cast<double>(C)));
        b_sem_.resize(M);
        for (int i = 0; i < M; ++i) b_sem_[i] = 0.1 * detail::uniform_pm1(rng);
        b_off_ << 0.1 * detail::uniform_pm1(rng), 0.1 * detail::uniform_pm1(rng);
        b_ctrl_.resize(3 * E * F);
        for (int e = 0; e < E; ++e)
            for (int f = 0; f < F; ++f) {
                const int k = 3 * (e * F + f);
                b_ctrl_[k] = extent.length * e / (E - 1.0);
                b_ctrl_[k + 1] = extent.width * (f / (F - 1.0) - 0.5);
                b_ctrl_[k + 2] = 0.0;
            }
    }

    DecoderOutput operator()(const AttentionState& state, const QueryPoint& q) const {
        if (state.pooled.size() != C_)
            throw ContractViolation("StubDecoder: pooled length " + std::to_string(state.pooled.size()) +
                                    " != C = " + std::to_string(C_));
        Eigen::VectorXd input(C_ + 7);
        input << state.pooled, q.as_vector();
        DecoderOutput out;
        out.semantics = w_sem_ * input + b_sem_;
        out.offset = w_off_ * input + b_off_;
        const Eigen::VectorXd ctrl = w_ctrl_ * state.pooled + b_ctrl_;
        out.control_points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
            ctrl.data(), static_cast<Eigen::Index>(E_) * F_, 3);
        return out;
    }

    int num_classes() const noexcept { return M_; }
    int rows() const noexcept { return E_; }
    int cols() const noexcept { return F_; }

private:
    int C_, M_, E_, F_;
    Eigen::MatrixXd w_sem_, w_off_, w_ctrl_;
    Eigen::VectorXd b_sem_, b_ctrl_;
    Eigen::Vector2d b_off_;
};

inline DecoderOutput decode(const AttentionState& state, const QueryPoint& q, std::uint64_t seed, int M, int E,
                            int F) {
    const StubDecoder decoder(seed, static_cast<int>(state.pooled.size()), M, E, F);
    return decoder(state, q);
}

}  // namespace nmr
