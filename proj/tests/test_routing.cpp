#include "doctest.h"

#include <cstdlib>
#include <sstream>

#include "pra/routing.hpp"
#include "pra/simplex.hpp"
#include "test_util.hpp"

using namespace pra;

namespace {

// One edge; per_time[t] packets cross it at time t+1.
InfeasibleSchedule single_edge_schedule(const std::vector<long long>& per_time,
                                        RoutingInstance& inst) {
    inst.num_vertices = 2;
    inst.edges = {{0, 1}};
    InfeasibleSchedule sched;
    for (size_t t = 0; t < per_time.size(); ++t)
        for (long long k = 0; k < per_time[t]; ++k) {
            inst.packet_paths.push_back({0});
            sched.packets.push_back({{0, (long long)t + 1}});
        }
    sched.length = (long long)per_time.size();
    return sched;
}

} // namespace

TEST_SUITE("routing") {

TEST_CASE("congestion and dilation") {
    SUBCASE("one packet, path length 5") {
        RoutingInstance inst = testutil::line_routing_instance(5, 1, 1);
        inst.packet_paths = {{0, 1, 2, 3, 4}};
        auto [c, d] = congestion_dilation(inst);
        CHECK(c == 1);
        CHECK(d == 5);
    }
    SUBCASE("k packets sharing one edge") {
        RoutingInstance inst;
        inst.num_vertices = 2;
        inst.edges = {{0, 1}};
        for (int k = 0; k < 7; ++k) inst.packet_paths.push_back({0});
        auto [c, d] = congestion_dilation(inst);
        CHECK(c == 7);
        CHECK(d == 1);
    }
    SUBCASE("random grid matches an independent recount") {
        RoutingInstance inst = testutil::grid_routing_instance(6, 6, 8, 99);
        auto [c, d] = congestion_dilation(inst);
        std::vector<long long> per_edge(inst.edges.size(), 0);
        long long dil = 0;
        for (const auto& path : inst.packet_paths) {
            dil = std::max(dil, (long long)path.size());
            for (int e : path) per_edge[size_t(e)]++;
        }
        long long cong = 0;
        for (long long v : per_edge) cong = std::max(cong, v);
        CHECK(c == cong);
        CHECK(d == dil);
    }
    SUBCASE("non-simple path is rejected") {
        RoutingInstance inst;
        inst.num_vertices = 3;
        inst.edges = {{0, 1}, {1, 2}};
        inst.packet_paths = {{0, 1, 1}}; // returns over edge 1
        CHECK_THROWS_AS(congestion_dilation(inst), InputError);
    }
}

TEST_CASE("large-scale parameter sets pass their stage criteria") {
    // Binomial tower step: m=64, i'=1024, C'=1385 at i=2^24, C=17040600.
    CHECK(binomial_stage_ok(17040600LL, 1LL << 24, 1024, 64, 1385));
    // Its final step: i=1024, C=1385, i'=2, C'=20.
    CHECK(binomial_stage_ok(1385, 1024, 2, 64, 20));
    // Width steps: i=1024, C=1312, i'=2, m=64, C'=16, d=12, a=0.0011306,
    // and the 2^24-interval stage with d=247.
    CHECK(width_stage_ok(1312, 1024, 2, 64, 16, 12, 0.0011306));
    CHECK(width_stage_ok(17040600LL, 1LL << 24, 1024, 64, 1312, 247, 5.985e-8));
}

TEST_CASE("refine_interval") {
    SUBCASE("identity refinement is allowed degenerately") {
        RoutingInstance inst = testutil::line_routing_instance(32, 6, 5);
        InfeasibleSchedule sched = initial_schedule(inst);
        IntervalParams p;
        p.i = p.iprime = 16;
        p.m = 4;
        p.c_in = p.c_out = 6;
        InfeasibleSchedule out = refine_interval(sched, p, 1);
        CHECK(out.length == sched.length);
    }
    SUBCASE("criterion refusal carries diagnostics") {
        RoutingInstance inst = testutil::line_routing_instance(64, 20, 5);
        InfeasibleSchedule sched = initial_schedule(inst);
        IntervalParams p;
        p.i = 64;
        p.iprime = 8;
        p.m = 8;
        p.c_in = 20;
        p.c_out = 2; // hopeless target
        CHECK_THROWS_AS(refine_interval(sched, p, 1), CriterionError);
    }
    SUBCASE("binomial stage bounds the refined congestion") {
        RoutingInstance inst = testutil::line_routing_instance(96, 30, 7);
        InfeasibleSchedule sched = initial_schedule(inst);
        auto [c, d] = congestion_dilation(inst);
        (void)d;
        IntervalParams p;
        p.i = sched.length;
        p.iprime = 16;
        p.m = 4;
        p.c_in = c;
        p.c_out = c;
        for (long long cand = 1; cand <= c; ++cand)
            if (binomial_stage_ok(c, p.i, p.iprime, p.m, cand)) {
                p.c_out = cand;
                break;
            }
        InfeasibleSchedule out = refine_interval(sched, p, 42);
        CHECK(interval_congestion(out, p.iprime, inst) <= p.c_out);
        CHECK(out.length <= sched.length + sched.length / p.m + p.i);
        for (size_t pk = 0; pk < out.packets.size(); ++pk) {
            REQUIRE(out.packets[pk].size() == sched.packets[pk].size());
            for (size_t i = 0; i < out.packets[pk].size(); ++i)
                CHECK(out.packets[pk][i].edge == sched.packets[pk][i].edge);
        }
    }
    SUBCASE("width stage bounds the refined congestion") {
        RoutingInstance inst = testutil::line_routing_instance(128, 40, 11);
        InfeasibleSchedule sched = initial_schedule(inst);
        auto [c, d] = congestion_dilation(inst);
        (void)d;
        IntervalParams p;
        p.i = sched.length;
        p.iprime = 8;
        p.m = 4;
        p.c_in = c;
        p.width_mode = true;
        bool found = false;
        for (long long cand = 2; cand <= c && !found; ++cand)
            for (int width = 1; width <= int(std::min<long long>(cand, 24)) && !found; ++width)
                for (double alpha : {0.05, 0.1, 0.2, 0.4})
                    if (width_stage_ok(c, p.i, p.iprime, p.m, cand, width, alpha)) {
                        p.c_out = cand;
                        p.d = width;
                        p.alpha = alpha;
                        found = true;
                        break;
                    }
        REQUIRE(found);
        InfeasibleSchedule out = refine_interval(sched, p, 77);
        CHECK(interval_congestion(out, p.iprime, inst) <= p.c_out);
        CHECK(out.length <= sched.length + sched.length / p.m + p.i);
    }
}

TEST_CASE("overflow_of") {
    SUBCASE("pinned examples") {
        Overflow a = overflow_of(3, 3, 6);
        CHECK(a.of_minus == 0);
        CHECK(a.of_plus == 0);
        CHECK(a.a_final == 3);
        CHECK(a.b_final == 3);

        Overflow b = overflow_of(0, 9, 6);
        CHECK(b.of_minus == 0);
        CHECK(b.of_plus == 3);
        CHECK(b.a_final == 0);
        CHECK(b.b_final == 6);

        Overflow c = overflow_of(4, 4, 6);
        CHECK(c.of_minus == 1);
        CHECK(c.of_plus == 1);
        CHECK(c.a_final == 3);
        CHECK(c.b_final == 3);
    }
    SUBCASE("conservation and final cap on a grid") {
        for (long long t = 0; t <= 12; ++t)
            for (long long a = 0; a <= 25; ++a)
                for (long long b = 0; b <= 25; ++b) {
                    Overflow o = overflow_of(a, b, t);
                    CHECK(o.of_minus + o.of_plus + o.a_final + o.b_final == a + b);
                    CHECK(o.a_final + o.b_final <= t);
                }
    }
    SUBCASE("total overflow is monotone in a+b at fixed T") {
        for (long long t = 0; t <= 10; ++t) {
            long long prev = -1;
            for (long long s = 0; s <= 30; ++s) {
                long long best = 0;
                for (long long a = 0; a <= s; ++a) {
                    Overflow o = overflow_of(a, s - a, t);
                    best = std::max(best, o.of_minus + o.of_plus);
                }
                CHECK(best >= prev);
                prev = best;
            }
        }
    }
}

TEST_CASE("check_4conditions") {
    SUBCASE("everything below T/2 passes") {
        RoutingInstance inst;
        InfeasibleSchedule sched = single_edge_schedule({3, 3, 3, 3}, inst);
        auto rep = check_4conditions(sched, 6, 5, inst);
        CHECK(rep.ok);
    }
    SUBCASE("pattern (0,9,9,0) at T=6, T'=5 violates") {
        RoutingInstance inst;
        InfeasibleSchedule sched = single_edge_schedule({0, 9, 9, 0}, inst);
        auto rep = check_4conditions(sched, 6, 5, inst);
        CHECK_FALSE(rep.ok);
        REQUIRE(!rep.violations.empty());
        CHECK(rep.violations[0].t == 1);
        CHECK(rep.violations[0].value == 6); // OF+(0,9) + OF-(9,0) = 3 + 3
    }
    SUBCASE("boundary start condition") {
        RoutingInstance inst;
        InfeasibleSchedule sched = single_edge_schedule({8, 0, 0, 0}, inst);
        // OF-(8,0;6) = 2 <= 5; nothing else overflows.
        auto rep = check_4conditions(sched, 6, 5, inst);
        CHECK(rep.ok);
        auto strict = check_4conditions(sched, 6, 1, inst);
        CHECK_FALSE(strict.ok); // the boundary condition itself fails
    }
}

TEST_CASE("dense simplex solves a hand-checkable covering program") {
    // minimize x + y subject to x + 2y >= 2, 3x + y >= 3:
    // optimum at the intersection (4/5, 3/5), objective 7/5.
    std::vector<std::vector<double>> a = {{1.0, 2.0}, {3.0, 1.0}};
    LpResult res = solve_lp_min(a, {2.0, 3.0}, {1.0, 1.0});
    REQUIRE(res.optimal);
    CHECK(res.objective == doctest::Approx(1.4));
    CHECK(res.x[0] == doctest::Approx(0.8));
    CHECK(res.x[1] == doctest::Approx(0.6));

    // Redundant rows and zero columns stay harmless.
    std::vector<std::vector<double>> b = {{1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}, {0.0, 0.0, 1.0}};
    LpResult res2 = solve_lp_min(b, {1.0, 1.0, 2.0}, {5.0, 1.0, 1.0});
    REQUIRE(res2.optimal);
    CHECK(res2.objective == doctest::Approx(2.0)); // z = 2 covers everything
}

TEST_CASE("overflow table construction") {
    SUBCASE("no bad tuples when T' is huge") {
        OverflowTable table = build_overflow_hitting_set(4, 100, 20, 0.05, 1e-5);
        CHECK(table.minimal_bad.empty());
        CHECK(table.weights.empty());
        CHECK(table.achieved_ratio == 0.0);
    }
    SUBCASE("T=6, T'=5 yields 259 minimal bad tuples") {
        auto minimal = minimal_bad_tuples(6, 5, 1312);
        CHECK(minimal.size() == 259);
    }
    SUBCASE("small table is valid and positive") {
        OverflowTable table = build_overflow_hitting_set(3, 2, 20, 1.3 / 20.0, 1e-4);
        CHECK(!table.weights.empty());
        CHECK(recheck_table_coverage(table));
        CHECK(table.achieved_ratio > 0.0);
        for (const auto& [y, w] : table.weights) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
        for (const auto& k : table.minimal_bad) CHECK(table_coverage(table, k) >= 1.0 - 1e-9);
    }
    SUBCASE("save/load round trip") {
        OverflowTable table = build_overflow_hitting_set(3, 2, 20, 1.3 / 20.0, 1e-4);
        std::stringstream ss;
        save_overflow_table(table, ss);
        OverflowTable loaded = load_overflow_table(ss, 3, 2);
        CHECK(loaded.weights.size() == table.weights.size());
        CHECK(recheck_table_coverage(loaded));
    }
}

TEST_CASE("refine_4cond produces schedules passing the 4-conditions") {
    RoutingInstance inst = testutil::line_routing_instance(256, 12, 21);
    InfeasibleSchedule sched = initial_schedule(inst);
    long long c64 = interval_congestion(sched, 64, inst);

    bool engaged = false;
    for (long long T = 4; T <= 5 && !engaged; ++T) {
        OverflowTable table = build_overflow_hitting_set(T, T - 1, c64, 1.3 / double(c64), 1e-5);
        for (double alpha = 1.0 / 60.0; alpha <= 8.0 / 60.0; alpha += 1.0 / 240.0) {
            auto phis = table_phis(table, c64, alpha);
            if (!(phis[4] < 1.0)) continue;
            double ratio = (phis[0] + phis[1] + phis[2] + phis[3]) / (1.0 - phis[4]);
            double lhs = 60.0 * alpha - 8.0 * 64.0 * 64.0 / 2.0 * ratio;
            if (lhs < 1.0) continue;
            FourFrameParams p;
            p.i = 64;
            p.m = 8;
            p.c_in = c64;
            p.T = T;
            p.Tprime = T - 1;
            p.alpha = alpha;
            InfeasibleSchedule out = refine_4cond(sched, p, table, 3);
            auto rep = check_4conditions(out, T, T - 1, inst);
            CHECK(rep.ok);
            CHECK(out.length <= sched.length + sched.length / p.m + p.i + 8);

            FeasibleSchedule fs = assemble_final(out, T, T - 1, inst);
            auto [ok, problems] = validate_schedule(fs, inst);
            CHECK(ok);
            long long L = out.length % 2 == 0 ? out.length : out.length + 1;
            CHECK(fs.makespan <= L * (T + (T - 1) + 2) / 2 + (T - 1));
            engaged = true;
            break;
        }
    }
    CHECK(engaged);
}

TEST_CASE("assemble_final refuses schedules violating the conditions") {
    RoutingInstance inst;
    InfeasibleSchedule sched = single_edge_schedule({0, 9, 9, 0}, inst);
    CHECK_THROWS_AS(assemble_final(sched, 6, 5, inst), CriterionError);
}

TEST_CASE("expand_two_frames and validate_schedule") {
    SUBCASE("single packet keeps its path length") {
        RoutingInstance inst = testutil::line_routing_instance(8, 1, 3);
        inst.packet_paths = {{0, 1, 2, 3, 4, 5, 6, 7}};
        InfeasibleSchedule sched = initial_schedule(inst);
        FeasibleSchedule fs = expand_two_frames(sched, inst);
        auto [ok, problems] = validate_schedule(fs, inst);
        CHECK(ok);
        CHECK(fs.makespan == 8);
    }
    SUBCASE("random schedules expand to valid ones") {
        for (uint64_t seed = 0; seed < 6; ++seed) {
            RoutingInstance inst = testutil::line_routing_instance(48, 9, 100 + seed);
            InfeasibleSchedule sched = initial_schedule(inst);
            FeasibleSchedule fs = expand_two_frames(sched, inst);
            auto [ok, problems] = validate_schedule(fs, inst);
            if (!ok)
                for (auto& pr : problems) MESSAGE(pr);
            CHECK(ok);
        }
    }
    SUBCASE("double booking is caught") {
        RoutingInstance inst;
        inst.num_vertices = 2;
        inst.edges = {{0, 1}};
        inst.packet_paths = {{0}, {0}};
        FeasibleSchedule fs;
        fs.packets = {{{0, 1}}, {{0, 1}}};
        fs.makespan = 1;
        auto [ok, problems] = validate_schedule(fs, inst);
        CHECK_FALSE(ok);
        CHECK(!problems.empty());
    }
}

TEST_CASE("end_to_end strategies produce valid schedules") {
    RoutingInstance line = testutil::line_routing_instance(150, 25, 5150);
    RoutingInstance grid = testutil::grid_routing_instance(8, 8, 14, 5151);
    for (const RoutingInstance* inst : {&line, &grid}) {
        for (RouteStrategy strat :
             {RouteStrategy::LllBasic, RouteStrategy::PraWidth, RouteStrategy::Pra4Frame}) {
            EndToEndReport rep = end_to_end(*inst, strat, std::nullopt, 7);
            auto [ok, problems] = validate_schedule(rep.schedule, *inst);
            if (!ok)
                for (auto& pr : problems) MESSAGE(pr);
            CHECK(ok);
            CHECK(rep.ratio > 0.0);
        }
    }
}

TEST_CASE("paired strategy comparison stays within a small factor") {
    // Paired runs over 30 instances in the 4-frame engagement zone. At
    // desk scale the width ladder already lands 2-interval congestions of
    // 6..10, so its expansion cost (C2+1)/2 per step sits at or below the
    // 4-frame's (T+T'+2)/2 >= 4.5; the strategies end up within a few
    // percent of each other rather than separating. The 4-frame gain
    // appears once the final width stage hits its large-scale congestion
    // floor (C' = 16 at the large-scale reference parameters).
    double width_total = 0.0, four_total = 0.0;
    int engaged = 0;
    for (uint64_t rep = 0; rep < 30; ++rep) {
        long long c_target = 12 + (long long)(rep % 14);
        int d_target = 150 + int(rep) * 5;
        RoutingInstance inst =
            testutil::line_routing_instance(d_target, c_target, derive_seed(606, rep));
        EndToEndReport w = end_to_end(inst, RouteStrategy::PraWidth, std::nullopt, rep);
        EndToEndReport f = end_to_end(inst, RouteStrategy::Pra4Frame, std::nullopt, rep);
        CHECK(validate_schedule(w.schedule, inst).first);
        CHECK(validate_schedule(f.schedule, inst).first);
        width_total += w.ratio;
        four_total += f.ratio;
        if (f.fourframe_engaged) ++engaged;
    }
    CHECK(engaged > 0);
    CHECK(four_total < 1.1 * width_total);
    MESSAGE("mean ratio width=" << width_total / 30.0 << " 4frame=" << four_total / 30.0
                                << " engaged=" << engaged << "/30");
}

TEST_CASE("full-scale overflow table reaches the reference ratio"
          * doctest::skip(std::getenv("PRA_FULL_SCALE") == nullptr)) {
    // Takes about 90 s: the T=6, T'=5 covering LP at C=1312, a=0.001051.
    OverflowTable table = build_overflow_hitting_set(6, 5, 1312, 0.001051, 3.5e-9);
    CHECK(recheck_table_coverage(table));
    CHECK(table.minimal_bad.size() == 259);
    CHECK(table.achieved_ratio <= 3.495e-9);
}

TEST_CASE("tiny instance goes straight to 2-frame assembly") {
    RoutingInstance inst;
    inst.num_vertices = 3;
    inst.edges = {{0, 1}, {1, 2}};
    inst.packet_paths = {{0, 1}, {0}, {1}};
    EndToEndReport rep = end_to_end(inst, RouteStrategy::PraWidth, std::nullopt, 1);
    CHECK(rep.stages.empty());
    auto [ok, problems] = validate_schedule(rep.schedule, inst);
    CHECK(ok);
}

TEST_CASE("explicit ladders drive the pipeline") {
    RoutingInstance inst = testutil::line_routing_instance(200, 18, 777);
    InfeasibleSchedule sched = initial_schedule(inst);
    auto [c, d] = congestion_dilation(inst);
    (void)d;

    // Stage parameters found the same way a caller would.
    LadderStage s1;
    s1.mode = "binomial";
    s1.i = sched.length;
    s1.iprime = 64;
    s1.m = 8;
    for (long long cand = 1; cand <= c; ++cand)
        if (binomial_stage_ok(c, s1.i, s1.iprime, s1.m, cand)) {
            s1.cprime = cand;
            break;
        }
    LadderStage s2;
    s2.mode = "4frame";
    s2.i = 64;
    s2.m = 8;
    s2.T = 4;
    s2.Tprime = 3;
    s2.alpha = 0.05;
    std::vector<LadderStage> ladder = {s1, s2};
    EndToEndReport rep = end_to_end(inst, RouteStrategy::Pra4Frame, ladder, 5);
    CHECK(rep.fourframe_engaged);
    CHECK(validate_schedule(rep.schedule, inst).first);
    REQUIRE(rep.stages.size() == 2);
    CHECK(rep.stages[0].recounted_congestion <= s1.cprime);
}

} // TEST_SUITE
