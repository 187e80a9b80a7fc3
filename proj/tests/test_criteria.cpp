#include "doctest.h"

#include <cmath>

#include "pra/criteria.hpp"
#include "pra/engine.hpp"
#include "test_util.hpp"

using namespace pra;
using testutil::es;

namespace {

// Two variables with lambda = alpha on value 0 only; one bad event
// {(0,0),(1,0)} with the trivial hitting set.
Instance pair_event_instance(double alpha) {
    Instance inst;
    inst.domain_sizes = {2, 2};
    inst.lambda = LambdaVector({{alpha, alpha}, {alpha, alpha}});
    inst.probabilities = inst.lambda->derive_probabilities();
    std::vector<AtomicEvent> events = {AtomicEvent(es({{0, 0}, {1, 0}}))};
    BadEventFamily fam;
    fam.add_label(std::make_unique<EnumeratedLabel>(events));
    inst.family = std::move(fam);
    inst.hitting.push_back(std::make_shared<TrivialHittingSet>(events));
    return inst;
}

} // namespace

TEST_SUITE("criteria") {

TEST_CASE("charges on a single pair event with the trivial set") {
    const double alpha = 0.4;
    Instance inst = pair_event_instance(alpha);
    ChargeReport report = charges(inst);
    REQUIRE(report.labels.size() == 1);
    const auto& lc = report.labels[0];
    CHECK(lc.exact);
    CHECK(lc.G == doctest::Approx(alpha * alpha));
    CHECK(lc.Gi[0] == doctest::Approx(alpha * alpha));
    CHECK(lc.Gi[1] == doctest::Approx(alpha * alpha));
    CHECK(lc.Gij[0][0] == doctest::Approx(alpha * alpha));
    CHECK(lc.Gij[0][1] == doctest::Approx(0.0));
    // The only supported set is the event itself; it is SIM to itself,
    // never bowtie, so S vanishes.
    CHECK(lc.S == 0.0);
}

TEST_CASE("charges on a null family are zero") {
    Instance inst;
    inst.domain_sizes = {2};
    inst.lambda = LambdaVector({{0.5, 0.5}});
    inst.probabilities = inst.lambda->derive_probabilities();
    BadEventFamily fam;
    fam.add_label(std::make_unique<EnumeratedLabel>(std::vector<AtomicEvent>{}));
    inst.family = std::move(fam);
    inst.hitting.push_back(std::make_shared<TrivialHittingSet>(std::vector<AtomicEvent>{}));
    ChargeReport report = charges(inst);
    CHECK(report.labels[0].G == 0.0);
    CHECK(report.labels[0].S == 0.0);
    CHECK(report.Hi[0] == 0.0);
}

TEST_CASE("width-set charges match brute-force enumeration") {
    // Random small widths: exact symmetric-polynomial charges equal the
    // direct sum over supported sets, and stay below the closed bounds.
    Rng rng(321);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 3 + int(rng.uniform_int(4));
        std::vector<std::vector<double>> lam_rows(size_t(n), std::vector<double>{});
        std::vector<std::pair<Element, double>> coeffs;
        for (int i = 0; i < n; ++i) {
            lam_rows[size_t(i)] = {0.1 + rng.uniform(), 0.1 + rng.uniform()};
            for (int j = 0; j < 2; ++j)
                if (rng.uniform() < 0.8) coeffs.push_back({{i, j}, rng.uniform()});
        }
        if (coeffs.size() < 3) continue;
        int d = 1 + int(rng.uniform_int(2));
        double t = double(d) + rng.uniform() * 2.0;

        Instance inst;
        inst.domain_sizes.assign(size_t(n), 2);
        inst.lambda = LambdaVector(lam_rows);
        inst.probabilities = inst.lambda->derive_probabilities();
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(std::vector<AtomicEvent>{}));
        inst.family = std::move(fam);
        auto q = std::make_shared<WidthHittingSet>(coeffs, t, d);
        inst.hitting.push_back(q);

        ChargeReport report = charges(inst);

        // Brute force over the enumerable support.
        double g = 0.0;
        std::vector<double> gi(size_t(n), 0.0);
        q->enumerate_support([&](const ElementSet& y, double w) {
            double term = w * inst.lambda->power(y);
            g += term;
            for (const Element& e : y) gi[size_t(e.var)] += term;
        });
        CHECK(report.labels[0].G == doctest::Approx(g).epsilon(1e-9));
        for (int i = 0; i < n; ++i)
            CHECK(report.labels[0].Gi[size_t(i)] == doctest::Approx(gi[size_t(i)]).epsilon(1e-9));

        // Closed-form bounds dominate the exact values.
        double mu = q->mu(*inst.lambda);
        if (mu > 0.0 && mu <= t) {
            CHECK(report.labels[0].G <= width_bound(mu, t, d) * (1 + 1e-9));
            auto by_var = q->mu_by_var(*inst.lambda);
            for (auto& [var, mui] : by_var) {
                if (mui <= 0.0) continue;
                double bound = (double(d) * mui / mu) * width_bound(mu, t, d);
                CHECK(report.labels[0].Gi[size_t(var)] <= bound * (1 + 1e-9));
            }
        }
    }
}

TEST_CASE("closed-form width charge bounds hold on 200 elements") {
    Rng rng(654);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 100; // two values each: 200 elements
        std::vector<std::vector<double>> lam_rows(size_t(n), std::vector<double>{});
        std::vector<std::pair<Element, double>> coeffs;
        for (int i = 0; i < n; ++i) {
            lam_rows[size_t(i)] = {0.02 + 0.2 * rng.uniform(), 0.02 + 0.2 * rng.uniform()};
            for (int j = 0; j < 2; ++j) coeffs.push_back({{i, j}, rng.uniform()});
        }
        int d = 2 + int(rng.uniform_int(4));
        Instance inst;
        inst.domain_sizes.assign(size_t(n), 2);
        inst.lambda = LambdaVector(lam_rows);
        inst.probabilities = inst.lambda->derive_probabilities();
        auto q = std::make_shared<WidthHittingSet>(coeffs, 40.0, d);
        double mu = q->mu(*inst.lambda);
        REQUIRE(mu <= 40.0);
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(std::vector<AtomicEvent>{}));
        inst.family = std::move(fam);
        inst.hitting.push_back(q);

        ChargeReport rep_c = charges(inst);
        CHECK(rep_c.labels[0].G <= width_bound(mu, 40.0, d) * (1 + 1e-9));
        auto by_var = q->mu_by_var(*inst.lambda);
        for (auto& [var, mui] : by_var) {
            if (mui <= 0.0) continue;
            double bound = (double(d) * mui / mu) * width_bound(mu, 40.0, d);
            CHECK(rep_c.labels[0].Gi[size_t(var)] <= bound * (1 + 1e-9));
        }
    }
}

TEST_CASE("charge monotonicity in lambda") {
    Instance a = pair_event_instance(0.3);
    Instance b = pair_event_instance(0.35);
    ChargeReport ra = charges(a), rb = charges(b);
    CHECK(rb.labels[0].G >= ra.labels[0].G);
    CHECK(rb.labels[0].Gi[0] >= ra.labels[0].Gi[0]);
}

TEST_CASE("lambda criterion") {
    SUBCASE("zero lambda with a nonempty family fails") {
        Instance inst = pair_event_instance(0.5);
        inst.lambda = LambdaVector({{0.0, 0.0}, {0.0, 0.0}});
        auto res = check_lambda_criterion(inst, CriterionVariant::C);
        CHECK(res.precondition_ok);
        CHECK_FALSE(res.satisfied); // lambda_i = 0 < 1
    }
    SUBCASE("alpha = 0.3 pair instance fails the b-variant") {
        // lambda_1 = 0.6 < 1 + G_1/(1-G); G = 0.09.
        Instance inst = pair_event_instance(0.3);
        auto res = check_lambda_criterion(inst, CriterionVariant::B);
        CHECK(res.precondition_ok);
        CHECK_FALSE(res.satisfied);
    }
    SUBCASE("large alpha satisfies variant c") {
        Instance inst = pair_event_instance(1.0);
        // lambda_i = 2, rhs = 1 + 1 = 2: boundary counts as satisfied.
        auto res = check_lambda_criterion(inst, CriterionVariant::C);
        CHECK(res.precondition_ok);
        CHECK(res.satisfied);
        CHECK(res.slack[0] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("a implies b whenever both preconditions hold") {
        Rng rng(77);
        for (int rep = 0; rep < 40; ++rep) {
            double alpha = 0.2 + rng.uniform();
            Instance inst = pair_event_instance(alpha);
            ChargeReport rep_charges = charges(inst);
            auto a = check_lambda_criterion(inst, CriterionVariant::A, rep_charges);
            auto b = check_lambda_criterion(inst, CriterionVariant::B, rep_charges);
            if (a.precondition_ok && b.precondition_ok && a.satisfied) CHECK(b.satisfied);
        }
    }
    SUBCASE("S_k >= 1 reports a precondition failure, not a crash") {
        // Disjoint pair inside one event makes the bowtie relation live;
        // giant lambda pushes S over 1.
        Instance inst;
        inst.domain_sizes = {2, 2};
        inst.lambda = LambdaVector({{3.0, 0.0}, {3.0, 0.0}});
        inst.probabilities = ProbabilityModel({{0.5, 0.5}, {0.5, 0.5}});
        std::vector<AtomicEvent> events = {AtomicEvent(es({{0, 0}, {1, 0}}))};
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(events));
        inst.family = std::move(fam);
        std::vector<std::pair<Element, double>> coeffs = {{{0, 0}, 1.0}, {{1, 0}, 1.0}};
        inst.hitting.push_back(std::make_shared<WidthHittingSet>(coeffs, 1.0, 1));
        auto res = check_lambda_criterion(inst, CriterionVariant::A);
        CHECK_FALSE(res.precondition_ok);
    }
}

TEST_CASE("check_symmetric") {
    CHECK(check_symmetric(1.0 / (std::exp(1.0) * 4.0), 4)); // boundary
    CHECK(check_symmetric(0.0, 10));
    CHECK_FALSE(check_symmetric(0.5, 1)); // e/2 > 1
}

TEST_CASE("check_main_a") {
    SUBCASE("empty support is vacuously true") {
        Instance inst;
        inst.domain_sizes = {2};
        inst.probabilities = ProbabilityModel({{0.5, 0.5}});
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(std::vector<AtomicEvent>{}));
        inst.family = std::move(fam);
        inst.hitting.push_back(std::make_shared<TrivialHittingSet>(std::vector<AtomicEvent>{}));
        WeightingFunction mu;
        CHECK(check_main_a(inst, mu));
    }
    SUBCASE("single supported pair needs mu >= pQ(1 + mu)") {
        // Neighbor-sets of (Y,k) are the empty set and {(Y,k)} itself
        // (a set always shares variables with itself).
        Instance inst;
        inst.domain_sizes = {2};
        inst.probabilities = ProbabilityModel({{0.5, 0.5}});
        std::vector<AtomicEvent> events = {AtomicEvent(es({{0, 0}}))};
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(events));
        inst.family = std::move(fam);
        inst.hitting.push_back(std::make_shared<TrivialHittingSet>(events));

        WeightingFunction mu;
        mu.values[{es({{0, 0}}), 0}] = 0.9; // 0.5 * (1 + 0.9) = 0.95 > 0.9
        CHECK_FALSE(check_main_a(inst, mu));
        mu.values[{es({{0, 0}}), 0}] = 1.0; // 0.5 * 2 = 1 <= 1
        CHECK(check_main_a(inst, mu));
    }
    SUBCASE("the lambda-form weighting satisfies the criterion on a 3-variable instance") {
        Instance inst;
        inst.domain_sizes = {2, 2, 2};
        inst.lambda = LambdaVector({{0.5, 1.5}, {0.5, 1.5}, {0.5, 1.5}});
        inst.probabilities = inst.lambda->derive_probabilities();
        std::vector<AtomicEvent> events = {AtomicEvent(es({{0, 0}, {1, 0}})),
                                           AtomicEvent(es({{1, 0}, {2, 0}}))};
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(events));
        inst.family = std::move(fam);
        inst.hitting.push_back(std::make_shared<TrivialHittingSet>(events));

        ChargeReport rep = charges(inst);
        REQUIRE(check_lambda_criterion(inst, CriterionVariant::A, rep).satisfied);
        WeightingFunction mu;
        for (const auto& ev : events)
            mu.values[{ev.elems, 0}] =
                inst.lambda->power(ev.elems) * 1.0 / (1.0 - rep.labels[0].S);
        CHECK(check_main_a(inst, mu));
    }
}

TEST_CASE("ch values") {
    CHECK(ch(2.0, 2.0) == 1.0);
    CHECK(ch(2.0, 1.0) == 1.0); // t < mu
    CHECK(ch(1.0, 2.0) == doctest::Approx(std::exp(1.0) / 4.0).epsilon(1e-13));
    CHECK_THROWS_AS(ch(0.0, 1.0), ArgumentError);
    CHECK_THROWS_AS(ch(-1.0, 1.0), ArgumentError);
}

TEST_CASE("ch is nonincreasing in t beyond mu") {
    for (double mu : {0.5, 1.0, 3.0, 10.0}) {
        double prev = 1.0;
        for (int i = 0; i <= 100; ++i) {
            double t = mu + (9.0 * mu) * i / 100.0;
            double v = ch(mu, t);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("width_bound") {
    CHECK(width_bound(1.0, 2.0, 1) == doctest::Approx(0.5));
    CHECK(width_bound(1.0, 2.0, 1) <= ch(1.0, 2.0));
    CHECK(width_bound(5.0, 5.0, 0) == 1.0);
    CHECK(width_bound(3.0, 6.0, 3) == doctest::Approx(0.225));
    CHECK(ch(3.0, 6.0) == doctest::Approx(std::exp(3.0) / 64.0).epsilon(1e-12));
    CHECK(width_bound(3.0, 6.0, 3) <= ch(3.0, 6.0));
    CHECK_THROWS_AS(width_bound(1.0, 2.0, 3), ArgumentError);
    CHECK(default_width(1.0, 2.0) == 1);
    CHECK(default_width(3.0, 6.0) == 3);
    CHECK(default_width(2.5, 2.5) == 0);
}

TEST_CASE("width_bound at the default width stays below ch on a grid") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        double mu = 0.1 + 20.0 * rng.uniform();
        double t = mu * (1.0 + 9.0 * rng.uniform());
        int d = default_width(mu, t);
        if (double(d) > t) continue;
        CHECK(width_bound(mu, t, d) <= ch(mu, t) * (1.0 + 1e-9));
    }
}

TEST_CASE("chern_sq_r") {
    CHECK(chern_sq_r(1.0) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-12));
    CHECK(chern_sq_r(17.4) >= 0.1); // backs the e^{-mu lambda^2 / 10} step
    CHECK_THROWS_AS(chern_sq_r(0.0), ArgumentError);

    SUBCASE("grid bound at mu = 5, y = 2") {
        double y = 2.0, mu = 5.0;
        double r = chern_sq_r(y);
        for (int i = 1; i <= 50; ++i) {
            double l = y * i / 50.0;
            CHECK(ch(mu, (1.0 + l) * mu) <= std::exp(-mu * r * l * l) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("csp_rhs") {
    SUBCASE("middle case literal") {
        auto b = csp_rhs({1.0}, 1.0, 0.5);
        CHECK(b[0] == doctest::Approx(1.5 + 10.0 * std::sqrt(std::log(8.0))).epsilon(1e-12));
        CHECK(b[0] == doctest::Approx(15.9202686).epsilon(1e-6));
        auto rep = csp_check_conditions({1.0}, b, 1.0, 0.5);
        CHECK(rep.ok);
    }
    SUBCASE("large-c case formula") {
        double eps = 0.25, D = 3.0, c = 20.0; // c >= eps^-2 = 16
        auto b = csp_rhs({c}, D, eps);
        CHECK(b[0] == doctest::Approx(c * (1 + eps) + 10.0 * std::sqrt(c * std::log(D + 1.0))));
    }
    SUBCASE("conditions pass across random parameters") {
        Rng rng(13);
        for (int i = 0; i < 200; ++i) {
            double D = 1.0 + rng.uniform() * 9.0;
            double eps = (0.1 + 0.9 * rng.uniform()) / (D + 1.0);
            std::vector<double> c = {1.0 + rng.uniform() * 99.0};
            auto b = csp_rhs(c, D, eps);
            auto rep = csp_check_conditions(c, b, D, eps);
            CHECK(rep.ok);
        }
    }
    SUBCASE("parameter range violations") {
        CHECK_THROWS_AS(csp_rhs({1.0}, 0.5, 0.1), ArgumentError);
        CHECK_THROWS_AS(csp_rhs({1.0}, 1.0, 0.6), ArgumentError); // eps > 1/(D+1)
        CHECK_THROWS_AS(csp_rhs({0.5}, 1.0, 0.25), ArgumentError);
    }
}

TEST_CASE("event_prob_upper") {
    LambdaVector lam({{0.4, 0.6}, {0.2, 0.8}});
    CHECK(event_prob_upper(AtomicEvent{}, lam) == 1.0);
    CHECK(event_prob_upper(AtomicEvent(es({{0, 0}})), lam) == doctest::Approx(0.4));
    CHECK(event_prob_upper(AtomicEvent(es({{0, 0}, {1, 1}})), lam) == doctest::Approx(0.32));
}

TEST_CASE("event ever-true frequency respects the lambda bound") {
    Instance inst = pair_event_instance(0.5);
    inst.lambda = LambdaVector({{0.5, 1.2}, {0.5, 1.2}});
    inst.probabilities = inst.lambda->derive_probabilities();
    REQUIRE(check_lambda_criterion(inst, CriterionVariant::C).satisfied);
    AtomicEvent target(es({{0, 0}}));
    double bound = event_prob_upper(target, *inst.lambda);
    const int trials = 10000;
    int ever = 0;
    for (int t = 0; t < trials; ++t) {
        EngineConfig cfg;
        cfg.seed = derive_seed(5150, uint64_t(t));
        bool seen = false;
        cfg.on_state = [&](const std::vector<int>& x) { seen = seen || target.true_under(x); };
        run(inst, cfg);
        ever += seen ? 1 : 0;
    }
    double freq = double(ever) / trials;
    double capped = std::min(bound, 1.0);
    CHECK(freq <= capped + 3.0 * std::sqrt(capped * (1 - capped) / trials) + 1e-9);
}

TEST_CASE("event probability bound from the weighting function") {
    // Two events; the lambda-form weighting makes the bound evaluable.
    Instance inst;
    inst.domain_sizes = {2, 2, 2};
    inst.lambda = LambdaVector({{0.5, 1.5}, {0.5, 1.5}, {0.5, 1.5}});
    inst.probabilities = inst.lambda->derive_probabilities();
    std::vector<AtomicEvent> events = {AtomicEvent(es({{0, 0}, {1, 0}})),
                                       AtomicEvent(es({{1, 0}, {2, 0}}))};
    BadEventFamily fam;
    fam.add_label(std::make_unique<EnumeratedLabel>(events));
    inst.family = std::move(fam);
    inst.hitting.push_back(std::make_shared<TrivialHittingSet>(events));
    ChargeReport rep = charges(inst);
    REQUIRE(check_lambda_criterion(inst, CriterionVariant::A, rep).satisfied);

    WeightingFunction mu;
    for (const auto& ev : events)
        mu.values[{ev.elems, 0}] = inst.lambda->power(ev.elems) / (1.0 - rep.labels[0].S);
    REQUIRE(check_main_a(inst, mu));

    AtomicEvent target(es({{1, 0}}));
    double tight = event_prob_bound_mu(target, inst, mu);
    double product = event_prob_bound_mu(target, inst, mu, 0); // force product form
    CHECK(tight <= product * (1.0 + 1e-12));

    // The tight sum skips variable-sharing pairs: both events involve
    // variable 1, so only singleton neighbor-sets contribute.
    double p = inst.probabilities.prob(1, 0);
    double expect = p * (1.0 + mu.set_sum(events[0].elems) + mu.set_sum(events[1].elems));
    CHECK(tight == doctest::Approx(expect).epsilon(1e-12));

    // Monte Carlo: terminal frequency of the event stays within the bound.
    const int trials = 20000;
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        EngineConfig cfg;
        cfg.seed = derive_seed(909090, uint64_t(t));
        RunResult res = run(inst, cfg);
        if (target.true_under(res.assignment)) ++hits;
    }
    double freq = double(hits) / trials;
    double capped = std::min(tight, 1.0);
    CHECK(freq <= capped + 3.0 * std::sqrt(capped * (1 - capped) / trials) + 1e-9);
}

TEST_CASE("singleton_bounds") {
    SUBCASE("degenerate charges collapse both bounds to lambda ratios") {
        Instance inst;
        inst.domain_sizes = {3};
        inst.lambda = LambdaVector({{1.0, 2.0, 1.0}});
        inst.probabilities = inst.lambda->derive_probabilities();
        BadEventFamily fam;
        fam.add_label(std::make_unique<EnumeratedLabel>(std::vector<AtomicEvent>{}));
        inst.family = std::move(fam);
        inst.hitting.push_back(std::make_shared<TrivialHittingSet>(std::vector<AtomicEvent>{}));
        ChargeReport rep = charges(inst);
        auto sb = singleton_bounds(0, {1}, rep);
        REQUIRE(sb.ok);
        CHECK(sb.upper == doctest::Approx(0.5));
        CHECK(sb.lower == doctest::Approx(0.5));

        auto full = singleton_bounds(0, {0, 1, 2}, rep);
        CHECK(full.upper >= 1.0);
        CHECK(full.lower == doctest::Approx(1.0));
    }
    SUBCASE("upper dominates lower on a live instance") {
        Instance inst = pair_event_instance(1.2);
        ChargeReport rep = charges(inst);
        auto sb = singleton_bounds(0, {0}, rep);
        REQUIRE(sb.ok);
        CHECK(sb.lower <= sb.upper);
    }
}

} // TEST_SUITE
