#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mobgame/assignment.hpp"
#include "mobgame/operators.hpp"
#include "mobgame/policy.hpp"

namespace mobgame {

// Hyper-parameters of the projected two-point zeroth-order scheme. Step size
// and smoothing radius are in the coordinates of the decision box handed to
// the update (the operator/policy drivers normalize their boxes to [0,1]
// per dimension first).
struct ZOParams {
    double eta = 0.02;    // step size
    double delta = 0.02;  // smoothing radius
    int iterations = 20;  // T: steps per player per round
    int rounds = 10;      // R: round-robin passes over the players
    uint64_t seed = 0;
    double convergence_tol = 1e-3;  // max coordinate change over the last round

    void check() const;
};

// Objective evaluation for a single player; the opponent's strategy is fixed
// inside the closure. Must be deterministic for fixed inputs.
using ObjectiveFn = std::function<double(const std::vector<double>&)>;
// Feasible-point map onto the player's strategy set.
using ProjectorFn = std::function<std::vector<double>(const std::vector<double>&)>;

// g = v * (f_plus - f_minus) / (2 delta).
std::vector<double> two_point_gradient(double f_plus, double f_minus,
                                       const std::vector<double>& v, double delta);

struct ZoStepOutcome {
    std::vector<double> x;  // next iterate, feasible
    double f_plus = 0.0;
    double f_minus = 0.0;
    bool ok = true;  // both evaluations returned finite values
};

// One projected two-point update: draw v ~ N(0, I), evaluate the objective at
// the projections of x +- delta*v, step against the estimated gradient,
// project. A non-finite evaluation leaves x unchanged (flagged in outcome).
ZoStepOutcome zo_step(const std::vector<double>& x_k, const ObjectiveFn& objective, double eta,
                      double delta, const ProjectorFn& project, std::mt19937_64& rng);

struct NashTraceRow {
    int round = 0;
    int iteration = 0;
    int player = 0;  // 0-based player index (0 = PT, 1 = taxi in seek_mne)
    std::vector<double> x;  // that player's iterate after the step
    double f_plus = 0.0;
    double f_minus = 0.0;
    bool ok = true;
};

struct NashProblem {
    // objectives[k](own, other) -> value to minimize for player k.
    std::vector<std::function<double(const std::vector<double>&, const std::vector<double>&)>>
        objectives;
    std::vector<ProjectorFn> projectors;
    std::vector<std::vector<double>> x0;  // feasible starting points
};

struct NashResult {
    std::vector<std::vector<double>> x;
    std::vector<NashTraceRow> trace;
    bool converged = false;
    int failed_evaluations = 0;
};

// Round-robin two-point descent over the players (fixed order, R rounds of T
// steps each); stops early once a full round moves no coordinate by more than
// convergence_tol. The returned strategies are the projected tail averages of
// each player's iterates (second half of the run), which sit at the center of
// the stochastic-step noise ball instead of sampling it at a random phase;
// the trace still records the raw per-step iterates.
NashResult seek_nash(const NashProblem& problem, const ZOParams& params);

// Everything the operator game needs besides the policy: strategy boxes,
// unit costs, and the access (waiting-time) model.
struct OperatorSetup {
    StrategyBounds bounds{};
    OperatorCostParams costs{};
    AccessModelParams access{};
};

struct EquilibriumResult {
    PtStrategy x_pt;
    TxStrategy x_tx;
    FlowState flows;     // traveler equilibrium response to the final strategies
    GapStats flow_stats;
    std::vector<NashTraceRow> trace;  // strategies in natural (denormalized) units
    bool converged = false;
    int ue_failures = 0;  // objective evaluations whose inner UE solve did not converge
};

// Middle-level Nash seeking: alternating projected two-point updates for the
// PT and taxi operators under policy z. Each objective evaluation applies the
// candidate strategies to the template, solves the traveler equilibrium
// (warm-started along the run), and scores the operator objective. The
// returned flow state is a cold re-solve at the final strategies.
EquilibriumResult seek_mne(const MultimodalGraph& tmpl, const Demand& demand, const Policy& z,
                           const PtStrategy& x0_pt, const TxStrategy& x0_tx,
                           const UESolverParams& ue_params, const ZOParams& zo_params,
                           const OperatorSetup& setup = {});

// One record of the offline equilibrium map dataset: policy, equilibrium
// strategies, and the flow aggregates the municipal objective consumes.
struct MneSample {
    int id = 0;
    Policy z{};
    PtStrategy x_pt{};
    TxStrategy x_tx{};
    double j_sw = 0.0;     // social welfare cost [CHF/h]
    double em_base = 0.0;  // taxi veh-km base of the emission term [km/h]
    double rev_pt = 0.0;
    double rev_tx = 0.0;
    double tr21 = 0.0;  // taxi->PT transfer flow
    double tr12 = 0.0;  // PT->taxi transfer flow
    double j_em = 0.0;
    double j_rev = 0.0;
    double j_total = 0.0;
    bool converged = true;
};

struct MneDataset {
    std::vector<MneSample> samples;
};

struct MneSamplerConfig {
    PolicyBounds policy_bounds{};
    OperatorSetup setup{};
    MunicipalParams municipal{};
    UESolverParams ue{};
    ZOParams zo{};
    int workers = 1;
};

// Draws (z, x0) uniformly over the policy and strategy boxes, runs seek_mne
// per draw, and records the results. Per-sample failures are skipped (the
// sample id sequence then has gaps); identical seeds give identical datasets
// at any worker count.
MneDataset sample_mne_dataset(const MultimodalGraph& tmpl, const Demand& demand, int n_samples,
                              const MneSamplerConfig& config, uint64_t seed);

std::string dataset_to_csv(const MneDataset& ds);
MneDataset dataset_from_csv(const std::string& text);
void save_dataset_file(const MneDataset& ds, const std::string& path);
MneDataset load_dataset_file(const std::string& path);

}  // namespace mobgame
