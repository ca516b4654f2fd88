#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "nmr/errors.hpp"

namespace nmr {

inline std::vector<std::string> default_class_names() {
    return {"none", "road", "obstacle", "red-light", "green-light"};
}

/// Labeled grid over the arc-length chart.
///
/// Cell (row, col) is stored at labels[row * width + col]. Columns run along
/// s_u and rows along s_v; the cell center sits at ((col+0.5)*res, (row+0.5)*res).
struct SemanticOccupancyGrid {
    int width = 0;
    int height = 0;
    double resolution = 1.0;
    int num_classes = 5;
    std::vector<std::string> class_names = default_class_names();
    int t = 1;
    std::vector<int> labels;

    int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
    std::size_t size() const noexcept { return labels.size(); }

    void validate() const {
        if (width < 1 || height < 1) throw InvalidArgument("SOG: width and height must be >= 1");
        if (!(resolution > 0.0)) throw InvalidArgument("SOG: resolution must be positive");
        if (num_classes < 1) throw InvalidArgument("SOG: M must be >= 1");
        if (labels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw InvalidArgument("SOG: label count does not match width*height");
        for (int l : labels)
            if (l < 0 || l >= num_classes)
                throw InvalidArgument("SOG: label " + std::to_string(l) + " outside 0..M-1");
    }

    static SemanticOccupancyGrid filled(int width, int height, int label, int num_classes = 5,
                                        double resolution = 1.0) {
        SemanticOccupancyGrid g;
        g.width = width;
        g.height = height;
        g.num_classes = num_classes;
        g.resolution = resolution;
        if (num_classes != 5) g.class_names.clear();
        g.labels.assign(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), label);
        return g;
    }
};

/// Per-cell Chebyshev distance, in cells, to the nearest differently labeled cell.
struct DistanceGrid {
    int width = 0;
    int height = 0;
    std::vector<int> values;

    int at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

/// Edge distance transform of the grid.
///
/// Cells adjacent (8-connectivity) to a different label are at distance 1.
/// For any other cell the nearest differently labeled cell lies one step past
/// the nearest such boundary cell, so a single two-pass chessboard sweep seeded
/// at the boundary gives every distance. Single-label grids hold width+height.
inline DistanceGrid edge_distance_transform(const SemanticOccupancyGrid& sog) {
    sog.validate();
    const int W = sog.width, H = sog.height;
    const int sentinel = W + H;
    DistanceGrid out{W, H, std::vector<int>(sog.size(), sentinel)};
    auto idx = [W](int r, int c) { return static_cast<std::size_t>(r) * W + c; };

    bool any_boundary = false;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const int l = sog.at(r, c);
            bool boundary = false;
            for (int dr = -1; dr <= 1 && !boundary; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= H || cc < 0 || cc >= W) continue;
                    if (sog.at(rr, cc) != l) {
                        boundary = true;
                        break;
                    }
                }
            if (boundary) {
                out.values[idx(r, c)] = 0;
                any_boundary = true;
            }
        }
    if (!any_boundary) return out;

    auto relax = [&](int r, int c, int rr, int cc) {
        if (rr < 0 || rr >= H || cc < 0 || cc >= W) return;
        auto& here = out.values[idx(r, c)];
        here = std::min(here, out.values[idx(rr, cc)] + 1);
    };
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            relax(r, c, r - 1, c - 1);
            relax(r, c, r - 1, c);
            relax(r, c, r - 1, c + 1);
            relax(r, c, r, c - 1);
        }
    for (int r = H - 1; r >= 0; --r)
        for (int c = W - 1; c >= 0; --c) {
            relax(r, c, r + 1, c + 1);
            relax(r, c, r + 1, c);
            relax(r, c, r + 1, c - 1);
            relax(r, c, r, c + 1);
        }
    for (auto& d : out.values) d += 1;
    return out;
}

struct Sample {
    int label = 0;
    int row = 0;
    int col = 0;
    double s_u = 0.0;
    double s_v = 0.0;
    double weight = 0.0;  ///< selection probability of this cell within its class

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct SampleSet {
    std::uint64_t seed = 0;
    std::vector<std::vector<Sample>> per_class;  ///< indexed by class id, size M

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& c : per_class) n += c.size();
        return n;
    }

    friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

namespace detail {

// Uniform double in (0, 1) from the top 53 bits.
inline double open_unit(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline std::mt19937_64 class_engine(std::uint64_t seed, int label) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(label)};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Edge-aware sampling: K cells per present class, with probability
/// proportional to exp(-distance/tau) within the class. Drawn without
/// replacement (exponential-key method) when the class holds at least K
/// cells, with replacement otherwise. tau may be +infinity for uniform sampling.
inline SampleSet sample_queries(const SemanticOccupancyGrid& sog, int K, double tau,
                                std::uint64_t seed) {
    if (sog.width < 1 || sog.height < 1 || sog.labels.empty())
        throw InvalidArgument("sample_queries: empty grid");
    if (K < 1) throw InvalidArgument("sample_queries: K must be >= 1");
    if (!(tau > 0.0)) throw InvalidArgument("sample_queries: tau must be positive");
    const DistanceGrid dist = edge_distance_transform(sog);

    std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(sog.num_classes));
    for (std::size_t i = 0; i < sog.size(); ++i) cells[static_cast<std::size_t>(sog.labels[i])].push_back(i);

    SampleSet out;
    out.seed = seed;
    out.per_class.resize(cells.size());
    for (int label = 0; label < sog.num_classes; ++label) {
        const auto& members = cells[static_cast<std::size_t>(label)];
        if (members.empty()) continue;
        int dmin = std::numeric_limits<int>::max();
        for (auto i : members) dmin = std::min(dmin, dist.values[i]);
        // distances are small integers; one exp per distinct value
        std::vector<double> kernel(static_cast<std::size_t>(sog.width + sog.height - dmin + 1), -1.0);
        std::vector<double> w(members.size());
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto offset = static_cast<std::size_t>(dist.values[members[k]] - dmin);
            if (kernel[offset] < 0.0) kernel[offset] = std::exp(-static_cast<double>(offset) / tau);
            w[k] = kernel[offset];
        }
        const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

        auto rng = detail::class_engine(seed, label);
        std::vector<std::size_t> picked;
        picked.reserve(static_cast<std::size_t>(K));
        if (members.size() >= static_cast<std::size_t>(K)) {
            std::vector<std::pair<double, std::size_t>> keys(members.size());
            for (std::size_t k = 0; k < members.size(); ++k)
                keys[k] = {-std::log(detail::open_unit(rng)) / w[k], k};
            std::partial_sort(keys.begin(), keys.begin() + K, keys.end());
            for (int k = 0; k < K; ++k) picked.push_back(keys[static_cast<std::size_t>(k)].second);
        } else {
            std::vector<double> cdf(w.size());
            std::partial_sum(w.begin(), w.end(), cdf.begin());
            for (int k = 0; k < K; ++k) {
                const double x = detail::open_unit(rng) * cdf.back();
                auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
                if (it == cdf.end()) --it;
                picked.push_back(static_cast<std::size_t>(it - cdf.begin()));
            }
        }

        auto& bucket = out.per_class[static_cast<std::size_t>(label)];
        for (auto k : picked) {
            const std::size_t cell = members[k];
            const int row = static_cast<int>(cell / static_cast<std::size_t>(sog.width));
            const int col = static_cast<int>(cell % static_cast<std::size_t>(sog.width));
            bucket.push_back({label, row, col, (col + 0.5) * sog.resolution,
                              (row + 0.5) * sog.resolution, w[k] / wsum});
        }
    }
    return out;
}

/// Fraction of coarse bins that contain grid cells but no sample.
///
/// The grid is split into bins_per_axis x bins_per_axis bins; cell (row, col)
/// falls in bin (row*bins/height, col*bins/width). Bins with no cells (when
/// bins_per_axis exceeds a grid dimension) do not count.
inline double coverage_loss(const SampleSet& samples, const SemanticOccupancyGrid& sog,
                            int bins_per_axis) {
    if (bins_per_axis < 1) throw InvalidArgument("coverage_loss: bins_per_axis must be >= 1");
    sog.validate();
    const auto b = static_cast<std::size_t>(bins_per_axis);
    auto bin_of = [&](int row, int col) {
        const auto br = static_cast<std::size_t>(row) * b / static_cast<std::size_t>(sog.height);
        const auto bc = static_cast<std::size_t>(col) * b / static_cast<std::size_t>(sog.width);
        return br * b + bc;
    };
    std::vector<char> occupied(b * b, 0), hit(b * b, 0);
    for (int r = 0; r < sog.height; ++r)
        for (int c = 0; c < sog.width; ++c) occupied[bin_of(r, c)] = 1;
    for (const auto& cls : samples.per_class)
        for (const auto& s : cls)
            if (s.row >= 0 && s.row < sog.height && s.col >= 0 && s.col < sog.width) hit[bin_of(s.row, s.col)] = 1;
    std::size_t total = 0, missed = 0;
    for (std::size_t i = 0; i < occupied.size(); ++i) {
        if (!occupied[i]) continue;
        ++total;
        if (!hit[i]) ++missed;
    }
    return total ? static_cast<double>(missed) / static_cast<double>(total) : 0.0;
}

struct CoverageSampling {
    SampleSet samples;
    double coverage = 1.0;
    int attempts = 0;
};

/// Redraws with seed, seed+1, ... until coverage_loss <= threshold or
/// max_attempts draws were made; returns the last draw.
inline CoverageSampling sample_with_coverage(const SemanticOccupancyGrid& sog, int K, double tau,
                                             std::uint64_t seed, int bins_per_axis, double threshold,
                                             int max_attempts = 10) {
    if (max_attempts < 1) throw InvalidArgument("sample_with_coverage: max_attempts must be >= 1");
    CoverageSampling out;
    for (int a = 0; a < max_attempts; ++a) {
        out.samples = sample_queries(sog, K, tau, seed + static_cast<std::uint64_t>(a));
        out.coverage = coverage_loss(out.samples, sog, bins_per_axis);
        out.attempts = a + 1;
        if (out.coverage <= threshold) break;
    }
    return out;
}

}  // namespace nmr
