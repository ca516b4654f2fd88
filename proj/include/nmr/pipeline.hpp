#pragma once

#include <span>
#include <vector>

#include "nmr/arclength.hpp"
#include "nmr/attention.hpp"
#include "nmr/config.hpp"
#include "nmr/loss.hpp"
#include "nmr/parallel.hpp"
#include "nmr/sampler.hpp"
#include "nmr/surface.hpp"

namespace nmr {

enum class ScorerKind { DotProduct, Zero };

struct QueryResult {
    std::vector<AttentionState> states;   ///< N + 1 states, state 0 uniform
    std::vector<DecoderOutput> outputs;   ///< decoded from states 1..N
};

struct PipelineResult {
    LatentFeatures features;
    ControlNet shared_net;  ///< decoded from the uniform (query-independent) state
    std::vector<QueryResult> queries;

    /// Outputs regrouped as [iteration][query] for total_loss.
    std::vector<std::vector<DecoderOutput>> by_iteration() const {
        std::vector<std::vector<DecoderOutput>> out;
        if (queries.empty()) return out;
        out.resize(queries.front().outputs.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            for (const auto& q : queries) out[i].push_back(q.outputs[i]);
        return out;
    }
};

/// Encoder -> iterative attention -> decoder for every query.
inline PipelineResult run_pipeline(const RunConfig& cfg, std::span<const QueryPoint> queries,
                                   ScorerKind kind = ScorerKind::DotProduct, unsigned threads = 1) {
    cfg.validate();
    LatentFeatures z = stub_encoder(cfg.seed, cfg.S, cfg.T, cfg.P, cfg.C, cfg.speed);
    const StubDecoder decoder(cfg.seed, cfg.C, cfg.M, cfg.E, cfg.F, {cfg.length, cfg.width});

    AttentionState uniform;
    uniform.weights = Eigen::VectorXd::Constant(z.rows(), 1.0 / static_cast<double>(z.rows()));
    uniform.pooled = z.data.transpose() * uniform.weights;
    const ControlNet net = control_net_from_matrix(decoder(uniform, QueryPoint{}).control_points,
                                                   static_cast<std::size_t>(cfg.E), static_cast<std::size_t>(cfg.F));

    PipelineResult result{std::move(z), net, std::vector<QueryResult>(queries.size())};
    const DotProductScorer dot(result.features, cfg.seed);
    const ZeroScorer zero(result.features.rows());
    parallel_for(queries.size(), threads, [&](std::size_t k) {
        QueryResult& qr = result.queries[k];
        qr.states = kind == ScorerKind::Zero ? iterate_attention(result.features, queries[k], zero, cfg.N)
                                             : iterate_attention(result.features, queries[k], dot, cfg.N);
        for (std::size_t i = 1; i < qr.states.size(); ++i) qr.outputs.push_back(decoder(qr.states[i], queries[k]));
    });
    return result;
}

struct MappedSample {
    Sample sample;
    bool in_range = false;  ///< false when the cell lies beyond the surface's arc-length extent
    ParamPoint param;
    SurfacePoint point = SurfacePoint::Zero();
};

/// Lifts sampled (s_u, s_v) cell centers onto the surface through the inverse
/// arc-length chart (anchored at the (0,0) corner) and Bezier evaluation.
inline std::vector<MappedSample> map_samples_to_surface(const ControlNet& net, const SampleSet& samples,
                                                        const QuadratureOptions& quad = {}, unsigned threads = 1) {
    std::vector<MappedSample> out;
    for (const auto& cls : samples.per_class)
        for (const auto& s : cls) out.push_back({s, false, {}, SurfacePoint::Zero()});
    parallel_for(out.size(), threads, [&](std::size_t i) {
        auto& m = out[i];
        try {
            m.param = from_arclength(net, {m.sample.s_u, m.sample.s_v}, {0.0, 0.0}, 1e-10, quad);
            m.point = evaluate(net, m.param);
            m.in_range = true;
        } catch (const OutOfRangeError&) {
            m.in_range = false;
        }
    });
    return out;
}

}  // namespace nmr
