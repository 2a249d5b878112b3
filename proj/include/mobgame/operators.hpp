#pragma once

#include <array>

#include "mobgame/assignment.hpp"
#include "mobgame/network.hpp"
#include "mobgame/policy.hpp"

namespace mobgame {

// Public-transport operator strategy x_pt = (q, p_base, p_d, p_trans).
struct PtStrategy {
    double q = 0.0;        // service frequency [veh/h]
    double p_base = 0.0;   // boarding fare from walk [CHF]
    double p_d = 0.0;      // distance fare [CHF/km]
    double p_trans = 0.0;  // fare for taxi->PT transfers [CHF]

    std::array<double, 4> to_vector() const { return {q, p_base, p_d, p_trans}; }
    static PtStrategy from_vector(const std::array<double, 4>& v) {
        return PtStrategy{v[0], v[1], v[2], v[3]};
    }
};

// Taxi operator strategy x_tx = (w, p_base, p_d, p_t, p_trans).
struct TxStrategy {
    double w = 0.0;        // fleet size [veh]
    double p_base = 0.0;   // hailing fare from walk [CHF]
    double p_d = 0.0;      // distance fare [CHF/km]
    double p_t = 0.0;      // time fare [CHF/h]
    double p_trans = 0.0;  // fare for PT->taxi transfers [CHF]

    std::array<double, 5> to_vector() const { return {w, p_base, p_d, p_t, p_trans}; }
    static TxStrategy from_vector(const std::array<double, 5>& v) {
        return TxStrategy{v[0], v[1], v[2], v[3], v[4]};
    }
};

// Upper bounds of the strategy boxes (lower bounds are all zero). The taxi
// fleet cap is the policy's license value lambda, not a static bound.
struct StrategyBounds {
    double q_max = 16.0;
    double pt_base_max = 9.2;
    double pt_dist_max = 5.0;
    double pt_trans_max = 20.0;
    double tx_base_max = 12.0;
    double tx_dist_max = 7.6;
    double tx_time_max = 138.0;
    double tx_trans_max = 20.0;
};

struct UnitCosts {
    double per_km = 0.0;      // c^E [CHF/km]
    double per_hour = 0.0;    // c^L [CHF/h]
    double per_vehicle = 0.0; // c^V [CHF/veh/h]
};

struct OperatorCostParams {
    UnitCosts pt{1.3, 26.0, 115.0};
    UnitCosts tx{0.12, 24.0, 9.0};
};

// How operator supply levels translate into traveler waiting times on
// transfer edges: half-headway 1/(2q) into PT, kappa/w into taxi.
struct AccessModelParams {
    double kappa = 2.0;  // taxi access constant [veh*h]
};

// Copy of the template with fares and access waiting times realized from the
// strategies: PT service price l*p_d; taxi service price l*p_d + t0*p_t;
// boarding/transfer fares on the four cross-mode transfer classes; transfers
// into walk remain free. q = 0 or w = 0 closes the mode via an infinite
// waiting-time sentinel.
MultimodalGraph apply_strategies(const MultimodalGraph& tmpl, const PtStrategy& x_pt,
                                 const TxStrategy& x_tx, const AccessModelParams& access = {});

// Total flow over transfer edges from one mode layer into another.
double transfer_flow(const MultimodalGraph& g, const FlowState& flows, Mode from, Mode to);

double revenue_pt(const PtStrategy& x_pt, const FlowState& flows, const MultimodalGraph& g);
double revenue_tx(const TxStrategy& x_tx, const FlowState& flows, const MultimodalGraph& g);

double cost_pt(const PtStrategy& x_pt, const MultimodalGraph& g, const OperatorCostParams& costs = {});
double cost_tx(const TxStrategy& x_tx, const FlowState& flows, const MultimodalGraph& g,
               const OperatorCostParams& costs = {});

// Operator objectives (lower is better): (tau_k - 1)*revenue + cost minus the
// per-transfer integration subsidy.
double objective_pt(const PtStrategy& x_pt, const FlowState& flows, const MultimodalGraph& g,
                    const Policy& z, const OperatorCostParams& costs = {});
double objective_tx(const TxStrategy& x_tx, const FlowState& flows, const MultimodalGraph& g,
                    const Policy& z, const OperatorCostParams& costs = {});

// Feasible-point maps: componentwise clamp into the box, then enforce the
// transfer-fare cap p_trans <= p_base. Idempotent.
PtStrategy project_pt(const PtStrategy& x, const StrategyBounds& bounds);
TxStrategy project_tx(const TxStrategy& x, const StrategyBounds& bounds, double lambda);

bool pt_feasible(const PtStrategy& x, const StrategyBounds& bounds, double tol = 1e-9);
bool tx_feasible(const TxStrategy& x, const StrategyBounds& bounds, double lambda,
                 double tol = 1e-9);

}  // namespace mobgame
