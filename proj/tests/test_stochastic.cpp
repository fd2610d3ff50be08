#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "wcopt/stochastic.hpp"

using namespace wcopt;

namespace {

// exact-draw problem with one constraint, for step-level arithmetic checks
ConstrainedProblem step_probe(Vector zeta0, double theta1, Vector zeta1,
                              Domain domain = L2Ball{10.0}) {
    ConstrainedProblem p;
    p.domain = std::move(domain);
    p.dim = zeta0.size();
    p.M = 10.0;
    p.objective.value = [](const Vector&) { return 0.0; };
    p.objective.subgrad = [zeta0](const Vector&, Vector& g) { g = zeta0; };
    StochasticOracle so;
    so.sample = [zeta0](const Vector&, Rng&) {
        return StochasticSample{0.0, zeta0};
    };
    so.gradient_bound = 10.0;
    p.objective_stochastic = std::move(so);

    FunctionOracle con;
    con.value = [theta1](const Vector&) { return theta1; };
    con.subgrad = [zeta1](const Vector&, Vector& g) { g = zeta1; };
    p.constraints.push_back(std::move(con));
    StochasticOracle sc;
    sc.sample = [theta1, zeta1](const Vector&, Rng&) {
        return StochasticSample{theta1, zeta1};
    };
    sc.value_bound = std::fabs(theta1) + 1.0;
    sc.gradient_bound = 10.0;
    p.constraint_stochastic.push_back(std::move(sc));
    return p;
}

}  // namespace

TEST_CASE("step moves to the interior closed-form minimizer") {
    auto p = step_probe({1.0, 0.0}, 0.0, {0.0, 0.0});
    QueueState q;
    q.Q = {0.0};
    q.V = 10.0;
    q.alpha = 100.0;
    Rng rng(0);
    const auto out = stochastic_step(p, ProxCenter{{0.0, 0.0}, 0.0}, {0.0, 0.0}, q, rng);
    CHECK(out.z_next[0] == Catch::Approx(-0.05));
    CHECK(out.z_next[1] == 0.0);
}

TEST_CASE("queue drift arithmetic and the clamp at zero") {
    Rng rng(0);
    {
        // theta = 0.5, zeta^T dz = -0.2 -> queue grows to 0.3
        auto p = step_probe({1.0, 0.0}, 0.5, {4.0, 0.0});
        QueueState q;
        q.Q = {0.0};
        q.V = 10.0;
        q.alpha = 100.0;
        const auto out =
            stochastic_step(p, ProxCenter{{0.0, 0.0}, 0.0}, {0.0, 0.0}, q, rng);
        CHECK(out.z_next[0] == Catch::Approx(-0.05));
        CHECK(out.queues.Q[0] == Catch::Approx(0.3));
    }
    {
        // theta = -1 with zero drift wipes the queue
        auto p = step_probe({1.0, 0.0}, -1.0, {0.0, 3.0});
        QueueState q;
        q.Q = {0.1};
        q.V = 10.0;
        q.alpha = 100.0;
        const auto out =
            stochastic_step(p, ProxCenter{{0.0, 0.0}, 0.0}, {0.0, 0.0}, q, rng);
        CHECK(out.queues.Q[0] == 0.0);
    }
}

TEST_CASE("queue state initialization") {
    const auto q = make_queue_state(3, 400);
    CHECK(q.Q == Vector{0.0, 0.0, 0.0});
    CHECK(q.V == 20.0);
    CHECK(q.alpha == 400.0);
    CHECK_THROWS_AS(make_queue_state(1, 0), std::invalid_argument);
}

TEST_CASE("K = 1 returns the start point") {
    auto toy = testkit::make_stochastic_toy(20, 3, 5);
    Rng rng(9);
    StochasticConfig cfg;
    cfg.K = 1;
    const Vector start(3, 0.25);
    const auto rep = run_stochastic_baseline(toy.problem, start, cfg, rng);
    CHECK(rep.x == start);
}

TEST_CASE("degenerate draws reduce to projected gradient with step 1/(2 sqrt K)") {
    // one-datum finite sum, no constraints
    auto inst = testkit::make_ball_qcqp({1.0, -0.5}, {0.0, 0.0}, 2.0, 2.0, 1.0);
    ConstrainedProblem p = inst.problem;
    p.constraints.clear();
    p.constraint_stochastic.clear();

    const long long K = 64;
    StochasticConfig cfg;
    cfg.K = K;
    Rng rng(1);
    const Vector start{0.0, 0.0};
    const auto rep = run_stochastic_baseline(p, start, cfg, rng);

    // replay by hand
    const double step = 1.0 / (2.0 * std::sqrt(static_cast<double>(K)));
    Vector z = start, avg(2, 0.0), g(2);
    for (long long k = 0; k < K; ++k) {
        axpy(1.0, z, avg);
        p.objective.subgrad(z, g);
        axpy(-step, g, z);
        project_in_place(p.domain, z);
    }
    scale(1.0 / static_cast<double>(K), avg);
    CHECK(dist(rep.x, avg) <= 1e-12);
}

TEST_CASE("seeded replay is exact") {
    auto toy = testkit::make_stochastic_toy(30, 4, 17);
    StochasticConfig cfg;
    cfg.K = 500;
    Rng r1(123), r2(123);
    const auto a = run_stochastic_baseline(toy.problem, Vector(4, 0.0), cfg, r1);
    const auto b = run_stochastic_baseline(toy.problem, Vector(4, 0.0), cfg, r2);
    CHECK(a.x == b.x);
    CHECK(a.final_queues == b.final_queues);
}

TEST_CASE("the projected step minimizes its proximal linearization model") {
    // exact oracles make the direction reproducible, so the first-order
    // optimality of  dir^T (z - z_k) + alpha ||z - z_k||^2  is checkable
    Rng rng(5150);
    const std::vector<Domain> domains = {L1Ball{1.0}, L2Ball{1.5},
                                         Box{{-1.0, 0.0}, {1.0, 2.0}}};
    for (const auto& dom : domains) {
        auto p = step_probe({0.7, -0.4}, 0.2, {-0.3, 0.9}, dom);
        QueueState q;
        q.Q = {rng.uniform(0.0, 2.0)};
        q.V = 3.0;
        q.alpha = 2.0;
        const Vector z = random_point(dom, 2, rng);
        Rng step_rng(0);
        const auto out = stochastic_step(p, ProxCenter{{0.0, 0.0}, 0.0}, z, q, step_rng);

        Vector dir{0.7 * q.V + q.Q[0] * -0.3, -0.4 * q.V + q.Q[0] * 0.9};
        auto model = [&](const Vector& w) {
            Vector delta(2);
            for (int i = 0; i < 2; ++i) delta[i] = w[i] - z[i];
            return dot(dir, delta) + q.alpha * norm2_sq(delta);
        };
        const double at_step = model(out.z_next);
        for (int trial = 0; trial < 2000; ++trial) {
            const Vector w = random_point(dom, 2, rng);
            CHECK(at_step <= model(w) + 1e-8);
        }
    }
}

TEST_CASE("queues stay nonnegative and scale like sqrt(K) on the toy") {
    auto toy = testkit::make_stochastic_toy(40, 5, 3);
    double prev_ratio = 0.0;
    for (long long K : {100LL, 1000LL, 10000LL}) {
        StochasticConfig cfg;
        cfg.K = K;
        Rng rng(71);
        const auto rep =
            run_stochastic_baseline(toy.problem, Vector(5, 0.0), cfg, rng);
        for (double qv : rep.final_queues) CHECK(qv >= 0.0);
        const double ratio = rep.max_queue_norm / std::sqrt(static_cast<double>(K));
        CAPTURE(K, ratio);
        CHECK(ratio < 50.0);  // loose absolute cap; the theory constant is huge
        if (prev_ratio > 0.0) CHECK(ratio <= 3.0 * prev_ratio + 1.0);
        prev_ratio = ratio;
    }
}

TEST_CASE("constraint violation of the averaged output decays on the toy") {
    auto toy = testkit::make_stochastic_toy(40, 5, 3);
    std::vector<double> medians;
    for (long long K : {400LL, 1600LL}) {
        std::vector<double> v;
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            StochasticConfig cfg;
            cfg.K = K;
            Rng rng(seed);
            const auto rep =
                run_stochastic_baseline(toy.problem, Vector(5, 0.0), cfg, rng);
            v.push_back(toy.violation_at(rep.x));
        }
        std::sort(v.begin(), v.end());
        medians.push_back(v[1]);
    }
    CAPTURE(medians);
    CHECK(medians[0] > 0.0);
    CHECK(medians[1] > 0.0);
    CHECK(medians[1] < medians[0]);
}

TEST_CASE("bound functions decay and the certified K satisfies them") {
    // log/sqrt decay: quadrupling K at least halves the bounds for K >= 16
    for (double K : {16.0, 64.0, 256.0, 4096.0}) {
        CHECK(stochastic_objective_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, 4.0 * K, 0.1) <=
              stochastic_objective_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, K, 0.1));
        CHECK(stochastic_feasibility_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, 4.0 * K, 0.1) <=
              stochastic_feasibility_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, K, 0.1));
    }

    const auto fine = theoretical_K(1.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.1);
    CHECK(fine.B1 <= 0.01);
    CHECK(fine.B2 <= 0.01);
    CHECK(stochastic_objective_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0,
                                         static_cast<double>(fine.K), 0.1) <= 0.01);

    // doubling eps_hat never increases the certified K
    const auto coarse = theoretical_K(1.0, 1.0, 1.0, 1.0, 1.0, 0.2, 0.1);
    CHECK(coarse.K <= fine.K);

    // absurd constants exhaust the 2^60 cap
    CHECK_THROWS_AS(theoretical_K(1e6, 1e6, 1e6, 10.0, 1e-6, 1e-6, 0.01),
                    std::overflow_error);
}

TEST_CASE("stochastic run validates its inputs") {
    auto toy = testkit::make_stochastic_toy(10, 2, 1);
    StochasticConfig cfg;
    cfg.K = 0;
    Rng rng(0);
    CHECK_THROWS_AS(run_stochastic_baseline(toy.problem, Vector(2, 0.0), cfg, rng),
                    std::invalid_argument);

    ConstrainedProblem no_oracle = toy.problem;
    no_oracle.constraint_stochastic.clear();
    cfg.K = 10;
    CHECK_THROWS_AS(run_stochastic_baseline(no_oracle, Vector(2, 0.0), cfg, rng),
                    std::invalid_argument);
}
