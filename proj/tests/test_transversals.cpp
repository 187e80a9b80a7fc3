#include "doctest.h"

#include <cmath>

#include "pra/transversals.hpp"
#include "test_util.hpp"

using namespace pra;

namespace {

// l blocks of size b; random inter-block edges until the max block-average
// degree reaches roughly d_target without exceeding it.
BlockGraph random_block_graph(int l, int b, double d_target, uint64_t seed,
                              std::vector<double> weights = {}) {
    Rng rng(seed);
    int n = l * b;
    std::vector<std::vector<int>> blocks{size_t(l)};
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < b; ++j) blocks[size_t(i)].push_back(i * b + j);
    std::vector<std::pair<int, int>> edges;
    std::vector<long long> deg_sum(size_t(l), 0);
    long long max_edges = (long long)(d_target * b / 2.0 * l);
    int guard = 0;
    while ((long long)edges.size() < max_edges && guard++ < 50 * n) {
        int u = int(rng.uniform_int(uint64_t(n)));
        int v = int(rng.uniform_int(uint64_t(n)));
        if (u == v || u / b == v / b) continue;
        // Keep every block average at or below the target.
        if (double(deg_sum[size_t(u / b)] + 1) / b > d_target) continue;
        if (double(deg_sum[size_t(v / b)] + 1) / b > d_target) continue;
        bool dup = false;
        for (auto& [x, y] : edges)
            if ((x == u && y == v) || (x == v && y == u)) dup = true;
        if (dup) continue;
        edges.push_back({u, v});
        deg_sum[size_t(u / b)]++;
        deg_sum[size_t(v / b)]++;
    }
    return BlockGraph(n, edges, blocks, std::move(weights));
}

// Degree-capped random graph for the weighted and star modes.
BlockGraph degree_capped_graph(int l, int b, int delta, uint64_t seed,
                               std::vector<double> weights = {}) {
    Rng rng(seed);
    int n = l * b;
    std::vector<std::vector<int>> blocks{size_t(l)};
    for (int i = 0; i < l; ++i)
        for (int j = 0; j < b; ++j) blocks[size_t(i)].push_back(i * b + j);
    std::vector<int> deg(size_t(n), 0);
    std::vector<std::pair<int, int>> edges;
    int tries = 8 * n * std::max(delta, 1);
    while (tries-- > 0) {
        int u = int(rng.uniform_int(uint64_t(n)));
        int v = int(rng.uniform_int(uint64_t(n)));
        if (u == v || u / b == v / b) continue;
        if (deg[size_t(u)] >= delta || deg[size_t(v)] >= delta) continue;
        bool dup = false;
        for (auto& [x, y] : edges)
            if ((x == u && y == v) || (x == v && y == u)) dup = true;
        if (dup) continue;
        edges.push_back({u, v});
        deg[size_t(u)]++;
        deg[size_t(v)]++;
    }
    return BlockGraph(n, edges, blocks, std::move(weights));
}

} // namespace

TEST_SUITE("transversals") {

TEST_CASE("block graph statistics") {
    BlockGraph g(4, {{0, 2}, {0, 3}, {1, 2}}, {{0, 1}, {2, 3}});
    CHECK(g.min_block_size() == 2);
    CHECK(g.max_degree() == 2);
    CHECK(g.max_block_avg_degree() == doctest::Approx(1.5)); // block 0: (2+1)/2
    CHECK(g.adjacent(0, 2));
    CHECK_FALSE(g.adjacent(1, 3));
}

TEST_CASE("edgeless graphs: any transversal works with zero resamplings") {
    std::vector<std::vector<int>> blocks = {{0, 1, 2}, {3, 4, 5}};
    BlockGraph g(6, {}, blocks);
    for (int r = 1; r <= 3; ++r) {
        TransversalResult res = transversal_omit(g, r, 7);
        CHECK(res.status == RunStatus::Solved);
        CHECK(res.resamples == 0);
        CHECK(res.vertices.size() == 2);
    }
}

TEST_CASE("transversal_omit enforces its precondition") {
    // Two blocks of size 1 joined by an edge: d = 1, b = 1 < 4d.
    BlockGraph g(2, {{0, 1}}, {{0}, {1}});
    CHECK_THROWS_AS(transversal_omit(g, 1, 3), CriterionError);
}

TEST_CASE("r = 1: independent transversals at b = 4d") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        int d = 1 + int(seed % 3);
        BlockGraph g = random_block_graph(8, 4 * d, double(d), 1000 + seed);
        TransversalResult res = transversal_omit(g, 1, seed);
        REQUIRE(res.status == RunStatus::Solved);
        CHECK_FALSE(edge_inside(g, res.vertices));
    }
}

TEST_CASE("r = 2: no induced component above two vertices at b = 2d") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        int d = 1 + int(seed % 3);
        BlockGraph g = random_block_graph(8, 2 * d, double(d), 2000 + seed);
        TransversalResult res = transversal_omit(g, 2, seed);
        REQUIRE(res.status == RunStatus::Solved);
        CHECK(max_induced_component(g, res.vertices) <= 2);
    }
}

TEST_CASE("r = 3: triangle-free transversals at b = ceil(4d/3)") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        int d = 2 + int(seed % 3);
        int b = int(std::ceil(4.0 * d / 3.0));
        BlockGraph g = random_block_graph(8, b, double(d), 3000 + seed);
        TransversalResult res = transversal_omit(g, 3, seed);
        REQUIRE(res.status == RunStatus::Solved);
        CHECK_FALSE(triangle_inside(g, res.vertices));
    }
}

TEST_CASE("lambda criterion holds on omit instances") {
    BlockGraph g = random_block_graph(6, 8, 2.0, 99);
    double alpha = 1.0 / (2.0 * g.max_block_avg_degree());
    std::vector<std::vector<double>> lam(size_t(g.num_blocks()), std::vector<double>{});
    for (int i = 0; i < g.num_blocks(); ++i)
        lam[size_t(i)].assign(g.blocks()[size_t(i)].size(), alpha);
    Instance inst = make_edge_instance(g, LambdaVector(std::move(lam)), 1.0, 1);
    auto res = check_lambda_criterion(inst, CriterionVariant::C);
    CHECK(res.precondition_ok);
    CHECK(res.satisfied);
}

TEST_CASE("star-free transversals") {
    SUBCASE("s above the max degree is trivial") {
        BlockGraph g = degree_capped_graph(4, 2, 2, 5);
        TransversalResult res = star_free_transversal(g, 10, 3);
        CHECK(res.status == RunStatus::Solved);
        CHECK(res.resamples == 0);
    }
    SUBCASE("criterion gate") {
        // Tiny blocks with a large max degree cannot satisfy the bound.
        BlockGraph g = degree_capped_graph(6, 2, 8, 17);
        if (g.max_degree() >= 5) CHECK_FALSE(star_criterion_holds(g, 4));
        CHECK_THROWS_AS(star_free_transversal(g, 4, 1), CriterionError);
    }
    SUBCASE("max induced degree stays below s") {
        // s = 4, delta = 8: r = ceil(sqrt(4 ln 4)) = 3, and the explicit
        // inequality needs b >= delta (1+r)^{1+2/r} / (r (s-r)).
        int s = 4, delta = 8;
        int r = int(std::ceil(std::sqrt(double(s) * std::log(double(s)))));
        int b = int(std::ceil(double(delta) * std::pow(1.0 + r, 1.0 + 2.0 / r) /
                              (double(r) * double(s - r)))) +
                1;
        for (uint64_t seed = 0; seed < 5; ++seed) {
            BlockGraph g = degree_capped_graph(6, b, delta, 4000 + seed);
            REQUIRE(star_criterion_holds(g, s));
            TransversalResult res = star_free_transversal(g, s, seed);
            REQUIRE(res.status == RunStatus::Solved);
            CHECK(max_induced_degree(g, res.vertices) < s);
        }
    }
}

TEST_CASE("weighted transversals") {
    SUBCASE("equal weights make the guarantee trivial") {
        BlockGraph g = degree_capped_graph(5, 9, 2, 31,
                                           std::vector<double>(45, 1.0));
        WeightedTransversal wt = weighted_transversal(g, WeightDirection::High, 11);
        REQUIRE(wt.result.status == RunStatus::Solved);
        CHECK_FALSE(edge_inside(g, wt.result.vertices));
        CHECK(wt.weight == doctest::Approx(5.0)); // one unit per block
    }
    SUBCASE("precondition b >= 4 delta") {
        BlockGraph g = degree_capped_graph(4, 3, 4, 13);
        if (g.min_block_size() < 4 * g.max_degree())
            CHECK_THROWS_AS(weighted_transversal(g, WeightDirection::High, 1), CriterionError);
    }
    SUBCASE("high mode meets the expectation bound empirically") {
        Rng wr(555);
        int l = 5, delta = 2;
        int b = int(4.5 * delta) + 1;
        std::vector<double> weights(size_t(l * b));
        for (auto& w : weights) w = wr.uniform();
        BlockGraph g = degree_capped_graph(l, b, delta, 77, weights);
        REQUIRE(g.max_degree() <= delta);
        double total = 0.0, sq = 0.0;
        const int trials = 400;
        for (int t = 0; t < trials; ++t) {
            WeightedTransversal wt =
                weighted_transversal(g, WeightDirection::High, derive_seed(9, uint64_t(t)));
            REQUIRE(wt.result.status == RunStatus::Solved);
            CHECK_FALSE(edge_inside(g, wt.result.vertices));
            total += wt.weight;
            sq += wt.weight * wt.weight;
        }
        double mean = total / trials;
        double sd = std::sqrt(std::max(sq / trials - mean * mean, 0.0));
        double bound = g.total_weight() * weighted_guarantee(g, WeightDirection::High);
        CHECK(mean >= bound - 3.0 * sd / std::sqrt(double(trials)));
    }
    SUBCASE("low mode stays under w(V)/b at b >= 8 delta") {
        Rng wr(556);
        int l = 5, delta = 1;
        int b = 8 * delta + 1;
        std::vector<double> weights(size_t(l * b));
        for (auto& w : weights) w = wr.uniform();
        BlockGraph g = degree_capped_graph(l, b, delta, 78, weights);
        double total = 0.0, sq = 0.0;
        const int trials = 400;
        for (int t = 0; t < trials; ++t) {
            WeightedTransversal wt =
                weighted_transversal(g, WeightDirection::Low, derive_seed(10, uint64_t(t)));
            REQUIRE(wt.result.status == RunStatus::Solved);
            total += wt.weight;
            sq += wt.weight * wt.weight;
        }
        double mean = total / trials;
        double sd = std::sqrt(std::max(sq / trials - mean * mean, 0.0));
        double bound = g.total_weight() / double(g.min_block_size());
        CHECK(mean <= bound + 3.0 * sd / std::sqrt(double(trials)));
    }
}

TEST_CASE("mean resamplings stay below the lambda total on omit instances") {
    BlockGraph g = random_block_graph(8, 8, 2.0, 321);
    double alpha = 1.0 / (2.0 * g.max_block_avg_degree());
    double lambda_total = 0.0;
    for (const auto& blk : g.blocks()) lambda_total += double(blk.size()) * alpha;
    const int trials = 200;
    double total = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        TransversalResult res = transversal_omit(g, 1, derive_seed(99, uint64_t(t)));
        REQUIRE(res.status == RunStatus::Solved);
        total += double(res.resamples);
        sq += double(res.resamples) * double(res.resamples);
    }
    double mean = total / trials;
    double sd = std::sqrt(std::max(sq / trials - mean * mean, 0.0));
    CHECK(mean <= lambda_total + 3.0 * sd / std::sqrt(double(trials)));
}

TEST_CASE("per-vertex selection bound matches the closed form") {
    // Untruncated high mode: lower envelope of P(select v) dominates
    // (a - a^2 D) / (b a - a^2 D).
    BlockGraph g = degree_capped_graph(4, 13, 3, 404); // 4D <= b < 4.5D
    REQUIRE(g.min_block_size() >= 4 * g.max_degree());
    REQUIRE(double(g.min_block_size()) < 4.5 * g.max_degree());
    double b = double(g.min_block_size());
    double delta = double(g.max_degree());
    double alpha = (b - std::sqrt(b) * std::sqrt(b - 4.0 * delta)) / (2.0 * b * delta);
    std::vector<std::vector<double>> lam{size_t(g.num_blocks())};
    for (int i = 0; i < g.num_blocks(); ++i)
        lam[size_t(i)].assign(g.blocks()[size_t(i)].size(), alpha);
    Instance inst = make_edge_instance(g, LambdaVector(std::move(lam)), 1.0, 1);
    ChargeReport rep = charges(inst);
    double closed = (alpha - alpha * alpha * delta) / (b * alpha - alpha * alpha * delta);
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (g.blocks()[size_t(g.block_of(v))].size() != size_t(g.min_block_size())) continue;
        auto sb = singleton_bounds(g.block_of(v), {g.index_in_block(v)}, rep);
        REQUIRE(sb.ok);
        // Exact per-vertex charges dominate the Delta-based estimate.
        CHECK(sb.lower >= closed - 1e-9);
    }
}

TEST_CASE("distribution statistics") {
    SUBCASE("edgeless frequencies match lambda ratios") {
        std::vector<std::vector<int>> blocks = {{0, 1}, {2, 3}};
        BlockGraph g(4, {}, blocks);
        LambdaVector lam({{1.0, 3.0}, {2.0, 2.0}});
        DistributionStats stats = transversal_distribution_stats(g, lam, 4000, 21);
        CHECK(stats.pass);
        CHECK(stats.freq[0] == doctest::Approx(0.25).epsilon(0.15));
        CHECK(stats.freq[1] == doctest::Approx(0.75).epsilon(0.08));
    }
    SUBCASE("envelopes hold on a live instance") {
        BlockGraph g = degree_capped_graph(4, 5, 1, 91);
        REQUIRE(g.min_block_size() >= 4 * g.max_degree());
        double alpha = (g.max_degree() > 0) ? 1.0 / (2.0 * g.max_degree()) : 1.0;
        std::vector<std::vector<double>> lam(size_t(g.num_blocks()), std::vector<double>{});
        for (int i = 0; i < g.num_blocks(); ++i)
            lam[size_t(i)].assign(g.blocks()[size_t(i)].size(), alpha);
        DistributionStats stats =
            transversal_distribution_stats(g, LambdaVector(std::move(lam)), 4000, 23);
        CHECK(stats.pass);
    }
    SUBCASE("zero lambda support never gets picked") {
        std::vector<std::vector<int>> blocks = {{0, 1}};
        BlockGraph g(2, {}, blocks);
        LambdaVector lam({{2.0, 0.0}});
        DistributionStats stats = transversal_distribution_stats(g, lam, 500, 3);
        CHECK(stats.freq[1] == 0.0);
    }
}

} // TEST_SUITE
