#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include <nmr/sampler.hpp>
#include <nmr/sog_io.hpp>

using namespace nmr;
using Catch::Matchers::WithinAbs;

namespace {

constexpr int kRoad = 1;
constexpr int kObstacle = 2;

SemanticOccupancyGrid half_planes(int width, int height) {
    auto g = SemanticOccupancyGrid::filled(width, height, 0);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width / 2; ++c) g.labels[static_cast<std::size_t>(r * width + c)] = kRoad;
    return g;
}

// O(N^2) nearest-different-label search.
std::vector<int> brute_force_distance(const SemanticOccupancyGrid& g) {
    std::vector<int> out(g.size(), g.width + g.height);
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c)
            for (int rr = 0; rr < g.height; ++rr)
                for (int cc = 0; cc < g.width; ++cc)
                    if (g.at(rr, cc) != g.at(r, c)) {
                        auto& d = out[static_cast<std::size_t>(r * g.width + c)];
                        d = std::min(d, std::max(std::abs(rr - r), std::abs(cc - c)));
                    }
    return out;
}

double chi_square_p(const std::vector<double>& counts, double expected) {
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
double ks_uniform_p(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        d = std::max({d, (i + 1) / n - x[i], x[i] - i / n});
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k < 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("distance transform of a uniform grid is the sentinel", "[sampler][edt]") {
    const auto g = SemanticOccupancyGrid::filled(7, 4, kRoad);
    const auto d = edge_distance_transform(g);
    for (int v : d.values) REQUIRE(v == 11);
}

TEST_CASE("distance transform of two half planes", "[sampler][edt]") {
    const auto g = half_planes(10, 10);
    const auto d = edge_distance_transform(g);
    const int expected[] = {5, 4, 3, 2, 1, 1, 2, 3, 4, 5};
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) REQUIRE(d.at(r, c) == expected[c]);
    REQUIRE(d.values == brute_force_distance(g));
}

TEST_CASE("distance transform around an isolated cell", "[sampler][edt]") {
    auto g = SemanticOccupancyGrid::filled(9, 9, kRoad);
    g.labels[4 * 9 + 4] = kObstacle;
    const auto d = edge_distance_transform(g);
    for (int r = 3; r <= 5; ++r)
        for (int c = 3; c <= 5; ++c) REQUIRE(d.at(r, c) == 1);
    REQUIRE(d.at(0, 0) == 4);
    REQUIRE(d.values == brute_force_distance(g));
}

TEST_CASE("distance transform matches brute force on random grids", "[sampler][edt][property]") {
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 60; ++trial) {
        std::uniform_int_distribution<int> dim(1, 14), label(0, 4);
        auto g = SemanticOccupancyGrid::filled(dim(rng), dim(rng), 0);
        // blobs: mostly one label with a few others sprinkled in
        const int base = label(rng);
        std::bernoulli_distribution flip(trial % 3 == 0 ? 0.4 : 0.05);
        for (auto& l : g.labels) l = flip(rng) ? label(rng) : base;
        REQUIRE(edge_distance_transform(g).values == brute_force_distance(g));
    }
}

TEST_CASE("K samples per present class, none for absent classes", "[sampler]") {
    auto g = half_planes(20, 16);
    g.labels[5 * 20 + 15] = kObstacle;  // a single-cell class forces replacement
    const auto set = sample_queries(g, 128, 2.0, 9);
    REQUIRE(set.per_class.size() == 5);
    REQUIRE(set.per_class[0].size() == 128);
    REQUIRE(set.per_class[kRoad].size() == 128);
    REQUIRE(set.per_class[kObstacle].size() == 128);
    REQUIRE(set.per_class[3].empty());
    REQUIRE(set.per_class[4].empty());
    for (const auto& cls : set.per_class)
        for (const auto& s : cls) {
            REQUIRE(g.at(s.row, s.col) == s.label);
            REQUIRE_THAT(s.s_u, WithinAbs((s.col + 0.5) * g.resolution, 1e-15));
            REQUIRE_THAT(s.s_v, WithinAbs((s.row + 0.5) * g.resolution, 1e-15));
            REQUIRE(s.weight > 0.0);
        }
    // without replacement inside the large classes
    std::set<std::pair<int, int>> seen;
    for (const auto& s : set.per_class[kRoad]) REQUIRE(seen.insert({s.row, s.col}).second);
    REQUIRE(set.per_class[kObstacle].front().weight == 1.0);
}

TEST_CASE("sampling is a pure function of its inputs", "[sampler]") {
    const auto g = half_planes(12, 12);
    REQUIRE(sample_queries(g, 16, 2.0, 77) == sample_queries(g, 16, 2.0, 77));
    REQUIRE_FALSE(sample_queries(g, 16, 2.0, 77) == sample_queries(g, 16, 2.0, 78));
}

TEST_CASE("sampler argument errors", "[sampler]") {
    const auto g = half_planes(4, 4);
    REQUIRE_THROWS_AS(sample_queries(SemanticOccupancyGrid{}, 4, 1.0, 0), InvalidArgument);
    REQUIRE_THROWS_AS(sample_queries(g, 0, 1.0, 0), InvalidArgument);
    REQUIRE_THROWS_AS(sample_queries(g, 4, 0.0, 0), InvalidArgument);
    auto bad = g;
    bad.labels[0] = 7;
    REQUIRE_THROWS_AS(sample_queries(bad, 4, 1.0, 0), InvalidArgument);
}

TEST_CASE("single-class grids are sampled uniformly", "[sampler][statistics]") {
    const auto g = SemanticOccupancyGrid::filled(10, 10, kRoad);
    std::vector<double> counts(100, 0.0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto set = sample_queries(g, 10, 2.0, seed);
        for (const auto& s : set.per_class[kRoad]) counts[s.row * 10 + s.col] += 1;
    }
    REQUIRE(chi_square_p(counts, 100.0) > 0.01);
}

TEST_CASE("boundary cells are favoured by exp(-d/tau)", "[sampler][statistics]") {
    const auto g = half_planes(10, 10);
    const auto dist = edge_distance_transform(g);
    double near = 0, far = 0;
    for (std::uint64_t seed = 0; seed < 50000; ++seed) {
        const auto set = sample_queries(g, 1, 1.0, seed);
        for (const auto& cls : set.per_class)
            for (const auto& s : cls) {
                const int d = dist.at(s.row, s.col);
                if (d == 1) near += 1;
                if (d == 3) far += 1;
            }
    }
    const double ratio = near / far;
    REQUIRE(std::abs(ratio / std::exp(2.0) - 1.0) < 0.10);
}

TEST_CASE("mean sampled edge distance sits below the class mean", "[sampler][statistics]") {
    const auto g = half_planes(16, 16);
    const auto dist = edge_distance_transform(g);
    double class_mean = 0;
    int class_n = 0;
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            if (g.at(r, c) == kRoad) {
                class_mean += dist.at(r, c);
                ++class_n;
            }
    class_mean /= class_n;
    double sum = 0, sum2 = 0;
    const int draws = 100000;
    for (int seed = 0; seed < draws; ++seed) {
        const auto set = sample_queries(g, 1, 2.0, seed);
        const auto& s = set.per_class[kRoad][0];
        const double d = dist.at(s.row, s.col);
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    REQUIRE(mean + 3 * se < class_mean);
}

TEST_CASE("infinite tau recovers uniform sampling", "[sampler][statistics]") {
    const auto g = half_planes(10, 10);
    std::mt19937_64 jitter(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const auto set = sample_queries(g, 1, std::numeric_limits<double>::infinity(), seed);
        const auto& s = set.per_class[kRoad][0];
        // rank of the cell among the 50 road cells, spread to a continuous U(0,1)
        const int rank = s.row * 5 + s.col;
        x.push_back((rank + unit(jitter)) / 50.0);
    }
    REQUIRE(ks_uniform_p(x) > 0.01);
}

TEST_CASE("coverage loss extremes", "[sampler][coverage]") {
    const auto g = SemanticOccupancyGrid::filled(8, 8, kRoad);
    SampleSet empty;
    empty.per_class.resize(5);
    REQUIRE(coverage_loss(empty, g, 4) == 1.0);

    // one sample per 2x2 bin
    SampleSet every = empty;
    for (int r = 0; r < 8; r += 2)
        for (int c = 0; c < 8; c += 2) every.per_class[kRoad].push_back({kRoad, r, c, 0, 0, 0});
    REQUIRE(coverage_loss(every, g, 4) == 0.0);

    SampleSet clumped = empty;
    for (int k = 0; k < 10; ++k) clumped.per_class[kRoad].push_back({kRoad, k % 2, (k / 2) % 2, 0, 0, 0});
    REQUIRE(coverage_loss(clumped, g, 4) == 15.0 / 16.0);

    // more bins than cells: only bins holding cells count
    const auto tiny = SemanticOccupancyGrid::filled(2, 2, kRoad);
    SampleSet one = empty;
    one.per_class[kRoad].push_back({kRoad, 0, 0, 0, 0, 0});
    REQUIRE(coverage_loss(one, tiny, 4) == 0.75);
    REQUIRE_THROWS_AS(coverage_loss(one, tiny, 0), InvalidArgument);
}

TEST_CASE("coverage loss is bounded and zero on bin-covering supersets", "[sampler][coverage][property]") {
    std::mt19937_64 rng(307);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> dim(3, 30), bins(1, 6);
        auto g = half_planes(dim(rng), dim(rng));
        const int b = bins(rng);
        const auto set = sample_queries(g, 1 + trial % 20, 2.0, trial);
        const double loss = coverage_loss(set, g, b);
        REQUIRE(loss >= 0.0);
        REQUIRE(loss <= 1.0);
        auto cover = set;
        for (int r = 0; r < g.height; ++r)
            for (int c = 0; c < g.width; ++c) cover.per_class[g.at(r, c)].push_back({g.at(r, c), r, c, 0, 0, 0});
        REQUIRE(coverage_loss(cover, g, b) == 0.0);
    }
}

TEST_CASE("resampling stops once coverage is reached", "[sampler][coverage]") {
    const auto g = half_planes(16, 16);
    const auto fine = sample_with_coverage(g, 128, 2.0, 3, 4, 0.0);
    REQUIRE(fine.attempts == 1);
    REQUIRE(fine.coverage == 0.0);
    const auto hopeless = sample_with_coverage(g, 1, 0.5, 3, 8, 0.0);
    REQUIRE(hopeless.attempts == 10);
    REQUIRE(hopeless.samples == sample_queries(g, 1, 0.5, 12));
}

TEST_CASE("SOG CSV and PGM readers", "[sampler][io]") {
    const auto g = half_planes(6, 3);
    std::ostringstream os;
    write_sog_csv(os, g);
    std::istringstream is(os.str());
    const auto back = read_sog_csv(is);
    REQUIRE(back.labels == g.labels);
    REQUIRE(back.width == 6);
    REQUIRE(back.height == 3);

    std::istringstream named("width,height,resolution,M,t\n2,2,0.5,5,3\n0,1\n2,3\n");
    const auto n = read_sog_csv(named);
    REQUIRE(n.resolution == 0.5);
    REQUIRE(n.t == 3);
    REQUIRE(n.labels == std::vector<int>{0, 1, 2, 3});

    std::istringstream bad_label("2,2,1,5,1\n0,1\n2,9\n");
    REQUIRE_THROWS_AS(read_sog_csv(bad_label), ParseError);
    std::istringstream short_row("2,2,1,5,1\n0,1\n2\n");
    try {
        (void)read_sog_csv(short_row);
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        REQUIRE(ex.line() == 3);
    }

    std::istringstream ascii("P2\n# labels\n3 2\n255\n0 1 1\n2 2 4\n");
    const auto p2 = read_sog_pgm(ascii, 0.25);
    REQUIRE(p2.labels == std::vector<int>{0, 1, 1, 2, 2, 4});
    REQUIRE(p2.resolution == 0.25);
    REQUIRE(p2.num_classes == 5);
    std::string bin = "P5\n2 2\n255\n";
    bin += std::string{char(1), char(0), char(6), char(1)};
    std::istringstream binary(bin);
    const auto p5 = read_sog_pgm(binary);
    REQUIRE(p5.labels == std::vector<int>{1, 0, 6, 1});
    REQUIRE(p5.num_classes == 7);
}

TEST_CASE("samples CSV round trip", "[sampler][io]") {
    const auto set = sample_queries(half_planes(9, 7), 5, 2.0, 4);
    std::ostringstream os;
    write_samples_csv(os, set);
    std::istringstream is(os.str());
    REQUIRE(read_samples_csv(is, 5, 4) == set);
}
