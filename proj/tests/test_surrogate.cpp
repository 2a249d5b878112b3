#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "helpers.hpp"
#include "mobgame/rng.hpp"
#include "mobgame/surrogate.hpp"

using namespace mobgame;

namespace {

// Synthetic ground truth: every output is an affine map of the policy with
// ranges chosen to sit strictly inside the default strategy boxes, so the
// feasibility projection in surrogate_predict is the identity on clean data.
MneSample affine_sample(int id, const Policy& z) {
    const double u0 = (z.tau_pt + 1.0) / 1.5;  // normalized policy coordinates in [0,1]
    const double u1 = z.tau_tx / 0.5;
    const double u2 = z.lambda / 1000.0;
    const double u3 = z.sigma_pt / 20.0;
    const double u4 = z.sigma_tx / 20.0;

    MneSample s;
    s.id = id;
    s.z = z;
    s.x_pt.q = 4.0 + 6.0 * u0 + 2.0 * u3;
    s.x_pt.p_base = 4.0 + 2.0 * u1 + 1.0 * u4;
    s.x_pt.p_d = 1.0 + 1.5 * u2;
    s.x_pt.p_trans = 1.0 + 1.5 * u3 + 0.5 * u0;
    s.x_tx.w = 0.2 * z.lambda + 20.0 * u1;
    s.x_tx.p_base = 5.0 + 3.0 * u4 + 1.0 * u0;
    s.x_tx.p_d = 2.0 + 2.0 * u1 + 1.0 * u2;
    s.x_tx.p_t = 30.0 + 40.0 * u3;
    s.x_tx.p_trans = 1.0 + 2.0 * u2 + 1.0 * u4;
    s.j_sw = 200.0 + 100.0 * u0 - 50.0 * u4;
    s.em_base = 40.0 + 30.0 * u1;
    s.rev_pt = 80.0 + 60.0 * u3 + 20.0 * u2;
    s.rev_tx = 50.0 + 40.0 * u4;
    s.tr21 = 5.0 + 10.0 * u0 + 5.0 * u1;
    s.tr12 = 3.0 + 8.0 * u2;
    return s;
}

MneDataset affine_dataset(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    MneDataset ds;
    for (int i = 0; i < n; ++i) {
        Policy z;
        z.tau_pt = uniform(rng, -1.0, 0.5);
        z.tau_tx = uniform(rng, 0.0, 0.5);
        z.lambda = uniform(rng, 100.0, 1000.0);  // floor keeps w <= lambda everywhere
        z.sigma_pt = uniform(rng, 0.0, 20.0);
        z.sigma_tx = uniform(rng, 0.0, 20.0);
        ds.samples.push_back(affine_sample(i, z));
    }
    return ds;
}

MneSample constant_record(int id) {
    MneSample s;
    s.id = id;
    s.z = Policy{0.1, 0.2, 300.0, 5.0, 5.0};
    s.x_pt = PtStrategy{8.0, 2.0, 1.0, 10.0};  // p_trans > p_base: infeasible on purpose
    s.x_tx = TxStrategy{50.0, 6.0, 3.0, 40.0, 2.0};
    s.j_sw = -4.0;  // negative aggregate: must be clamped at prediction time
    s.em_base = 12.0;
    s.rev_pt = 30.0;
    s.rev_tx = 20.0;
    s.tr21 = 1.0;
    s.tr12 = 2.0;
    s.j_em = 2.4;
    s.j_rev = 9.0;
    s.j_total = 1.0;
    return s;
}

}  // namespace

TEST_CASE("sample_targets follows the documented output layout") {
    MneSample s;
    s.x_pt = PtStrategy{1, 2, 3, 4};
    s.x_tx = TxStrategy{5, 6, 7, 8, 9};
    s.j_sw = 10;
    s.em_base = 11;
    s.rev_pt = 12;
    s.rev_tx = 13;
    s.tr21 = 14;
    s.tr12 = 15;
    auto t = sample_targets(s);
    for (int d = 0; d < kSurrogateOutputDim; ++d) CHECK(t[static_cast<size_t>(d)] == d + 1);
}

TEST_CASE("fit_surrogate learns an affine equilibrium map") {
    MneDataset train = affine_dataset(160, 21);
    MneDataset test = affine_dataset(40, 22);

    TrainParams tp;
    tp.epochs = 600;
    tp.seed = 0;
    SurrogateModel m = fit_surrogate(train, MlpArchitecture{}, tp);
    CHECK(!m.constant_predictor);
    CHECK(m.final_loss < 0.005);

    // Held-out policies: mean normalized strategy error well under 2%.
    CHECK(strategy_nrmse(m, test) < 0.02);
    CHECK(strategy_nrmse(m, train) < 0.02);

    SUBCASE("flow aggregates generalize too") {
        double worst_rel = 0.0;
        for (const MneSample& s : test.samples) {
            auto truth = sample_targets(s);
            auto pred = m.predict_raw(s.z.to_vector());
            for (int d = kSurrogateStrategyDims; d < kSurrogateOutputDim; ++d) {
                double rel = std::abs(pred[static_cast<size_t>(d)] - truth[static_cast<size_t>(d)]) /
                             std::max(1.0, std::abs(truth[static_cast<size_t>(d)]));
                worst_rel = std::max(worst_rel, rel);
            }
        }
        CHECK(worst_rel < 0.10);
    }
}

TEST_CASE("fit_surrogate is deterministic per seed") {
    MneDataset data = affine_dataset(40, 7);
    TrainParams tp;
    tp.epochs = 50;
    tp.seed = 3;
    SurrogateModel a = fit_surrogate(data, MlpArchitecture{}, tp);
    SurrogateModel b = fit_surrogate(data, MlpArchitecture{}, tp);
    REQUIRE(a.layers.size() == b.layers.size());
    for (size_t li = 0; li < a.layers.size(); ++li) {
        CHECK(a.layers[li].w == b.layers[li].w);
        CHECK(a.layers[li].b == b.layers[li].b);
    }
    CHECK(a.final_loss == b.final_loss);

    TrainParams other = tp;
    other.seed = 4;
    SurrogateModel c = fit_surrogate(data, MlpArchitecture{}, other);
    Policy probe{0.0, 0.25, 500.0, 10.0, 10.0};
    CHECK(a.predict_raw(probe.to_vector()) != c.predict_raw(probe.to_vector()));
}

TEST_CASE("degenerate training sets produce a flagged constant predictor") {
    MneDataset ds;
    for (int i = 0; i < 12; ++i) ds.samples.push_back(constant_record(i));
    SurrogateModel m = fit_surrogate(ds);
    CHECK(m.constant_predictor);
    CHECK(m.final_loss == 0.0);

    auto a = m.predict_raw({-1.0, 0.0, 0.0, 0.0, 0.0});
    auto b = m.predict_raw({0.5, 0.5, 1000.0, 20.0, 20.0});
    CHECK(a == b);
    CHECK(a[0] == doctest::Approx(8.0));

    SUBCASE("prediction projects the raw strategy block onto the feasible sets") {
        Policy z;
        z.lambda = 5.0;  // tighter than the learned fleet mean of 50
        SurrogatePrediction p = surrogate_predict(m, z);
        CHECK(p.x_pt.p_base == doctest::Approx(2.0));
        CHECK(p.x_pt.p_trans == doctest::Approx(2.0));  // pulled down to the base fare
        CHECK(p.x_tx.w == doctest::Approx(5.0));        // clamped to the license cap
        CHECK(p.j_sw == 0.0);                           // negative mean clamped at zero
        CHECK(p.em_base == doctest::Approx(12.0));
        CHECK(pt_feasible(p.x_pt, StrategyBounds{}));
        CHECK(tx_feasible(p.x_tx, StrategyBounds{}, z.lambda));
    }
    SUBCASE("constant reference dimensions contribute zero error") {
        CHECK(strategy_nrmse(m, ds) == 0.0);
    }
}

TEST_CASE("fit_surrogate validates its inputs") {
    MneDataset tiny = affine_dataset(9, 1);
    CHECK_THROWS_AS(fit_surrogate(tiny), std::invalid_argument);

    MneDataset ok = affine_dataset(12, 1);
    TrainParams bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(fit_surrogate(ok, MlpArchitecture{}, bad), std::invalid_argument);

    MlpArchitecture zero_width;
    zero_width.hidden = {0};
    CHECK_THROWS_AS(fit_surrogate(ok, zero_width), std::invalid_argument);

    MneDataset poisoned = affine_dataset(12, 2);
    poisoned.samples[3].j_sw = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_surrogate(poisoned), std::invalid_argument);

    CHECK_THROWS_AS(strategy_nrmse(SurrogateModel{}, MneDataset{}), std::invalid_argument);
}

TEST_CASE("surrogate serialization round-trips exactly") {
    MneDataset data = affine_dataset(40, 5);
    TrainParams tp;
    tp.epochs = 60;
    SurrogateModel m = fit_surrogate(data, MlpArchitecture{}, tp);

    SurrogateModel back = surrogate_from_json(surrogate_to_json(m));
    Policy probes[] = {{-0.5, 0.1, 200.0, 3.0, 17.0}, {0.4, 0.45, 900.0, 19.0, 1.0}};
    for (const Policy& z : probes) CHECK(back.predict_raw(z.to_vector()) == m.predict_raw(z.to_vector()));
    CHECK(back.arch.hidden == m.arch.hidden);
    CHECK(back.final_loss == m.final_loss);

    SUBCASE("file round trip preserves predictions") {
        std::string path = "surrogate_roundtrip_test.json";
        save_surrogate_file(m, path);
        SurrogateModel loaded = load_surrogate_file(path);
        std::remove(path.c_str());
        for (const Policy& z : probes)
            CHECK(loaded.predict_raw(z.to_vector()) == m.predict_raw(z.to_vector()));
    }
    SUBCASE("dimension mismatches are rejected") {
        nlohmann::json j = surrogate_to_json(m);
        j["architecture"]["input"] = 4;
        CHECK_THROWS_AS(surrogate_from_json(j), std::invalid_argument);
    }
}
