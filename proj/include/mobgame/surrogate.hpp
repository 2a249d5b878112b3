#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mobgame/equilibrium.hpp"

namespace mobgame {

// Input is the 5-dim policy vector; output is the 9 equilibrium strategy
// components followed by the 6 flow aggregates, in this fixed order:
// [q, pt_base, pt_dist, pt_trans, w, tx_base, tx_dist, tx_time, tx_trans,
//  j_sw, em_base, rev_pt, rev_tx, tr21, tr12].
inline constexpr int kSurrogateInputDim = 5;
inline constexpr int kSurrogateOutputDim = 15;
inline constexpr int kSurrogateStrategyDims = 9;

struct MlpArchitecture {
    std::vector<int> hidden{32};  // widths of tanh hidden layers
};

struct TrainParams {
    int epochs = 400;
    int batch_size = 16;
    double learning_rate = 0.01;
    double momentum = 0.9;
    uint64_t seed = 0;
};

struct MlpLayer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;  // out
};

struct SurrogateModel {
    MlpArchitecture arch;
    std::vector<MlpLayer> layers;
    std::array<double, kSurrogateInputDim> in_mean{}, in_std{};
    std::array<double, kSurrogateOutputDim> out_mean{}, out_std{};
    bool constant_predictor = false;  // degenerate training set: predicts output means
    double final_loss = 0.0;          // mean squared error on standardized outputs, last epoch

    // Denormalized raw prediction (no feasibility projection).
    std::array<double, kSurrogateOutputDim> predict_raw(
        const std::array<double, kSurrogateInputDim>& z) const;
};

struct SurrogatePrediction {
    PtStrategy x_pt;
    TxStrategy x_tx;
    double j_sw = 0.0;
    double em_base = 0.0;
    double rev_pt = 0.0;
    double rev_tx = 0.0;
    double tr21 = 0.0;
    double tr12 = 0.0;
};

// Target vector of one dataset record, in the model's output layout.
std::array<double, kSurrogateOutputDim> sample_targets(const MneSample& s);

// Trains the regressor with mini-batch SGD (momentum) on standardized inputs
// and outputs. Deterministic per seed. A dataset with zero variance in every
// output dimension yields a flagged constant predictor.
SurrogateModel fit_surrogate(const MneDataset& dataset, const MlpArchitecture& arch = {},
                             const TrainParams& params = {});

// Prediction with the strategy block projected onto the feasible sets implied
// by (bounds, z.lambda); flow aggregates are clamped to be non-negative.
SurrogatePrediction surrogate_predict(const SurrogateModel& model, const Policy& z,
                                      const StrategyBounds& bounds = {});

// Mean over the 9 strategy output dimensions of RMSE normalized by that
// dimension's value range in ref; zero-range dimensions contribute 0.
double strategy_nrmse(const SurrogateModel& model, const MneDataset& ref,
                      const StrategyBounds& bounds = {});

nlohmann::json surrogate_to_json(const SurrogateModel& m);
SurrogateModel surrogate_from_json(const nlohmann::json& j);
void save_surrogate_file(const SurrogateModel& m, const std::string& path);
SurrogateModel load_surrogate_file(const std::string& path);

}  // namespace mobgame
