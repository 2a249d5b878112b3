#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mobgame/equilibrium.hpp"
#include "mobgame/rng.hpp"

using namespace mobgame;

namespace {

ProjectorFn box_projector(double lo, double hi) {
    return [lo, hi](const std::vector<double>& x) {
        std::vector<double> out(x.size());
        for (size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], lo, hi);
        return out;
    };
}

// Independent oracle for the two-player quadratic duopoly: iterate the
// analytic best responses to a fixed point.
std::pair<double, double> duopoly_oracle() {
    double x1 = 2.5, x2 = 2.5;
    for (int i = 0; i < 200; ++i) {
        x1 = std::clamp(1.0 - 0.05 * x2, 0.0, 5.0);
        x2 = std::clamp(2.0 - 0.05 * x1, 0.0, 5.0);
    }
    return {x1, x2};
}

}  // namespace

TEST_CASE("two_point_gradient: symmetry, exactness, and unbiasedness") {
    SUBCASE("equal evaluations give the zero vector") {
        auto g = two_point_gradient(4.2, 4.2, {1.0, -2.0, 0.5}, 0.1);
        for (double c : g) CHECK(c == 0.0);
    }
    SUBCASE("quadratic: even terms cancel exactly") {
        const double x = 1.0, delta = 0.1;
        auto f = [](double v) { return v * v; };
        auto g = two_point_gradient(f(x + delta), f(x - delta), {1.0}, delta);
        CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("linear functions are recovered for any radius") {
        auto f = [](double v) { return 3.0 * v; };
        for (double delta : {1e-3, 0.1, 0.37, 2.0}) {
            auto g = two_point_gradient(f(2.0 + delta), f(2.0 - delta), {1.0}, delta);
            CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-12));
        }
    }
    SUBCASE("Gaussian-direction sample mean approximates a quadratic gradient") {
        // f(x) = x^T A x + b^T x with symmetric positive definite A.
        const double A[3][3] = {{2.0, 0.3, 0.1}, {0.3, 1.5, 0.2}, {0.1, 0.2, 1.0}};
        const double b[3] = {1.0, -2.0, 0.5};
        const double x0[3] = {0.4, -0.3, 0.8};
        auto f = [&](const double* x) {
            double v = 0.0;
            for (int i = 0; i < 3; ++i) {
                v += b[i] * x[i];
                for (int j = 0; j < 3; ++j) v += x[i] * A[i][j] * x[j];
            }
            return v;
        };
        double grad[3];
        for (int i = 0; i < 3; ++i) {
            grad[i] = b[i];
            for (int j = 0; j < 3; ++j) grad[i] += 2.0 * A[i][j] * x0[j];
        }
        const double delta = 0.01;
        std::mt19937_64 rng(99);
        double mean[3] = {0, 0, 0};
        const int draws = 10000;
        for (int k = 0; k < draws; ++k) {
            std::vector<double> v{normal01(rng), normal01(rng), normal01(rng)};
            double xp[3], xm[3];
            for (int i = 0; i < 3; ++i) {
                xp[i] = x0[i] + delta * v[i];
                xm[i] = x0[i] - delta * v[i];
            }
            auto g = two_point_gradient(f(xp), f(xm), v, delta);
            for (int i = 0; i < 3; ++i) mean[i] += g[i] / draws;
        }
        double err = 0.0, norm = 0.0;
        for (int i = 0; i < 3; ++i) {
            err += (mean[i] - grad[i]) * (mean[i] - grad[i]);
            norm += grad[i] * grad[i];
        }
        CHECK(std::sqrt(err / norm) < 0.05);
    }
}

TEST_CASE("zo_step: projected descent behavior") {
    SUBCASE("constant objective leaves the iterate in place") {
        std::mt19937_64 rng(1);
        auto out = zo_step({2.0}, [](const std::vector<double>&) { return 7.0; }, 0.5, 0.1,
                           box_projector(0, 10), rng);
        CHECK(out.ok);
        CHECK(out.x[0] == doctest::Approx(2.0));
    }
    SUBCASE("1-D quadratic reaches the interior optimum") {
        auto f = [](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0); };
        double total_err = 0.0;
        for (uint64_t seed = 0; seed < 10; ++seed) {
            std::mt19937_64 rng(seed);
            std::vector<double> x{0.0};
            for (int t = 0; t < 200; ++t)
                x = zo_step(x, f, 0.25, 0.01, box_projector(0, 10), rng).x;
            total_err += std::abs(x[0] - 3.0);
        }
        CHECK(total_err / 10.0 < 0.1);
    }
    SUBCASE("optimum outside the box pins the iterate to the boundary") {
        auto f = [](const std::vector<double>& x) { return (x[0] - 3.0) * (x[0] - 3.0); };
        std::mt19937_64 rng(5);
        std::vector<double> x{0.0};
        for (int t = 0; t < 100; ++t) x = zo_step(x, f, 0.25, 0.01, box_projector(0, 2), rng).x;
        CHECK(x[0] == doctest::Approx(2.0));
    }
    SUBCASE("evaluations happen at projected (feasible) points only") {
        double worst = 0.0;
        auto f = [&](const std::vector<double>& x) {
            worst = std::max({worst, -x[0], x[0] - 2.0});
            return x[0] * x[0];
        };
        std::mt19937_64 rng(3);
        std::vector<double> x{1.9};
        for (int t = 0; t < 50; ++t) x = zo_step(x, f, 0.3, 0.5, box_projector(0, 2), rng).x;
        CHECK(worst <= 0.0);
    }
    SUBCASE("non-finite evaluation is flagged and skipped") {
        std::mt19937_64 rng(4);
        auto bad = [](const std::vector<double>&) {
            return std::numeric_limits<double>::quiet_NaN();
        };
        auto out = zo_step({1.0}, bad, 0.25, 0.01, box_projector(0, 10), rng);
        CHECK(!out.ok);
        CHECK(out.x[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("seek_nash: analytic duopoly converges to the fixed-point oracle") {
    // f1 = (x1-1)^2 + 0.1 x1 x2, f2 = (x2-2)^2 + 0.1 x1 x2 on [0,5]^2.
    NashProblem prob;
    prob.objectives = {
        [](const std::vector<double>& own, const std::vector<double>& other) {
            return (own[0] - 1.0) * (own[0] - 1.0) + 0.1 * own[0] * other[0];
        },
        [](const std::vector<double>& own, const std::vector<double>& other) {
            return (own[0] - 2.0) * (own[0] - 2.0) + 0.1 * other[0] * own[0];
        }};
    prob.projectors = {box_projector(0, 5), box_projector(0, 5)};
    prob.x0 = {{2.5}, {2.5}};

    const auto [x1_star, x2_star] = duopoly_oracle();
    CHECK(x1_star == doctest::Approx(0.90225563909).epsilon(1e-9));
    CHECK(x2_star == doctest::Approx(1.95488721805).epsilon(1e-9));

    ZOParams zo;  // library defaults must solve this game
    zo.seed = 42;
    NashResult r = seek_nash(prob, zo);
    CHECK(std::abs(r.x[0][0] - x1_star) < 0.05);
    CHECK(std::abs(r.x[1][0] - x2_star) < 0.05);
    CHECK(r.failed_evaluations == 0);

    SUBCASE("identical seeds give identical traces") {
        NashResult a = seek_nash(prob, zo);
        REQUIRE(a.trace.size() == r.trace.size());
        for (size_t i = 0; i < a.trace.size(); ++i) {
            CHECK(a.trace[i].x == r.trace[i].x);
            CHECK(a.trace[i].f_plus == r.trace[i].f_plus);
            CHECK(a.trace[i].f_minus == r.trace[i].f_minus);
        }
        ZOParams other = zo;
        other.seed = 43;
        NashResult c = seek_nash(prob, other);
        CHECK(c.trace.back().x != r.trace.back().x);
    }
    SUBCASE("every trace iterate is feasible") {
        for (const auto& row : r.trace) {
            REQUIRE(row.x.size() == 1);
            CHECK(row.x[0] >= 0.0);
            CHECK(row.x[0] <= 5.0);
        }
    }
}

TEST_CASE("seek_nash rejects malformed problems") {
    NashProblem p;
    p.objectives = {[](const std::vector<double>&, const std::vector<double>&) { return 0.0; }};
    p.projectors = {box_projector(0, 1)};
    p.x0 = {{0.5}};
    CHECK_THROWS_AS(seek_nash(p, ZOParams{}), std::invalid_argument);

    ZOParams bad;
    bad.eta = 0.0;
    CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("seek_mne: zero demand drives both supplies toward zero") {
    MultimodalGraph g = build_grid_scenario(1, 2, GridParams{}, 0);
    Policy z;
    z.lambda = 100.0;
    PtStrategy x0_pt{8.0, 2.0, 1.0, 1.0};
    TxStrategy x0_tx{50.0, 3.0, 2.0, 20.0, 2.0};
    UESolverParams ue;
    ue.epsilon = 1e-3;
    ue.max_iterations = 50;
    ZOParams zo;
    zo.iterations = 10;
    zo.rounds = 3;
    zo.seed = 7;

    EquilibriumResult r = seek_mne(g, Demand{}, z, x0_pt, x0_tx, ue, zo);
    // With no riders the objectives reduce to operating costs, monotone in q and w.
    CHECK(r.x_pt.q < 1.0);
    CHECK(r.x_tx.w < 5.0);
    CHECK(r.ue_failures == 0);
    CHECK(tx_feasible(r.x_tx, StrategyBounds{}, z.lambda));
    CHECK(pt_feasible(r.x_pt, StrategyBounds{}));
    for (int e = 0; e < g.num_edges(); ++e) CHECK(r.flows.total(e) == 0.0);

    SUBCASE("identical runs are identical") {
        EquilibriumResult b = seek_mne(g, Demand{}, z, x0_pt, x0_tx, ue, zo);
        REQUIRE(b.trace.size() == r.trace.size());
        for (size_t i = 0; i < b.trace.size(); ++i) CHECK(b.trace[i].x == r.trace[i].x);
    }
}

TEST_CASE("seek_mne: trace iterates respect the strategy boxes and the license cap") {
    MultimodalGraph g = build_grid_scenario(1, 2, GridParams{}, 0);
    Demand d;
    d.requests.push_back(Request{UserClassId::Commuting, 0, 1, 20.0});
    d.requests.push_back(Request{UserClassId::Leisure, 1, 0, 10.0});
    Policy z;
    z.lambda = 40.0;
    z.sigma_tx = 5.0;
    PtStrategy x0_pt{8.0, 2.0, 1.0, 1.0};
    TxStrategy x0_tx{20.0, 3.0, 2.0, 20.0, 2.0};
    UESolverParams ue;
    ue.epsilon = 1e-3;
    ue.max_iterations = 80;
    ZOParams zo;
    zo.iterations = 5;
    zo.rounds = 2;
    zo.seed = 1;

    EquilibriumResult r = seek_mne(g, d, z, x0_pt, x0_tx, ue, zo);
    StrategyBounds bounds;
    for (const auto& row : r.trace) {
        if (row.player == 0) {
            REQUIRE(row.x.size() == 4);
            CHECK(pt_feasible(PtStrategy::from_vector({row.x[0], row.x[1], row.x[2], row.x[3]}),
                              bounds, 1e-9));
        } else {
            REQUIRE(row.x.size() == 5);
            CHECK(tx_feasible(
                TxStrategy::from_vector({row.x[0], row.x[1], row.x[2], row.x[3], row.x[4]}),
                bounds, z.lambda, 1e-9));
        }
    }
    // The returned flow state is the traveler response to the final strategies.
    MultimodalGraph labeled = apply_strategies(g, r.x_pt, r.x_tx);
    UEResult check = solve_ue(labeled, d, ue);
    CHECK(mobgame::testing::max_flow_gap(check.flows, r.flows) < 1e-9);
}

TEST_CASE("sample_mne_dataset: deterministic, worker-invariant, feasible") {
    MultimodalGraph g = build_grid_scenario(1, 2, GridParams{}, 0);
    Demand d;
    d.requests.push_back(Request{UserClassId::Commuting, 0, 1, 15.0});
    d.requests.push_back(Request{UserClassId::Business, 1, 0, 5.0});

    MneSamplerConfig cfg;
    cfg.policy_bounds.lambda_max = 50.0;
    cfg.ue.epsilon = 1e-3;
    cfg.ue.max_iterations = 40;
    cfg.zo.iterations = 2;
    cfg.zo.rounds = 1;

    SUBCASE("single sample is recorded and feasible") {
        MneDataset ds = sample_mne_dataset(g, d, 1, cfg, 5);
        REQUIRE(ds.samples.size() == 1);
        const MneSample& s = ds.samples[0];
        CHECK(policy_feasible(s.z, cfg.policy_bounds));
        CHECK(pt_feasible(s.x_pt, cfg.setup.bounds));
        CHECK(tx_feasible(s.x_tx, cfg.setup.bounds, s.z.lambda));
        CHECK(std::isfinite(s.j_total));
    }
    SUBCASE("worker count does not change the dataset bytes") {
        MneSamplerConfig c1 = cfg;
        c1.workers = 1;
        MneSamplerConfig c3 = cfg;
        c3.workers = 3;
        MneDataset a = sample_mne_dataset(g, d, 6, c1, 11);
        MneDataset b = sample_mne_dataset(g, d, 6, c3, 11);
        CHECK(dataset_to_csv(a) == dataset_to_csv(b));
        MneDataset c = sample_mne_dataset(g, d, 6, c1, 12);
        CHECK(dataset_to_csv(a) != dataset_to_csv(c));
    }
    SUBCASE("collapsed sampling boxes give identical records") {
        MneSamplerConfig cc = cfg;
        cc.policy_bounds = PolicyBounds{0.2, 0.2, 0.1, 0.1, 0.0, 0.0, 0.0};
        cc.setup.bounds = StrategyBounds{0, 0, 0, 0, 0, 0, 0, 0};
        MneDataset ds = sample_mne_dataset(g, d, 3, cc, 9);
        REQUIRE(ds.samples.size() == 3);
        for (const auto& s : ds.samples) {
            CHECK(s.z.tau_pt == 0.2);
            CHECK(s.x_pt.to_vector() == ds.samples[0].x_pt.to_vector());
            CHECK(s.x_tx.to_vector() == ds.samples[0].x_tx.to_vector());
            CHECK(s.j_total == ds.samples[0].j_total);
        }
    }
    SUBCASE("csv round-trip preserves every value") {
        MneDataset ds = sample_mne_dataset(g, d, 4, cfg, 3);
        MneDataset back = dataset_from_csv(dataset_to_csv(ds));
        REQUIRE(back.samples.size() == ds.samples.size());
        for (size_t i = 0; i < ds.samples.size(); ++i) {
            CHECK(back.samples[i].id == ds.samples[i].id);
            CHECK(back.samples[i].z.to_vector() == ds.samples[i].z.to_vector());
            CHECK(back.samples[i].x_tx.to_vector() == ds.samples[i].x_tx.to_vector());
            CHECK(back.samples[i].j_total == ds.samples[i].j_total);
            CHECK(back.samples[i].converged == ds.samples[i].converged);
        }
    }
}
