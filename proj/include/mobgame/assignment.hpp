#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mobgame/demand.hpp"
#include "mobgame/network.hpp"

namespace mobgame {

// Per-class edge flows. by_class[n][e] is the flow of traveler class n on
// edge e; totals aggregate over classes.
struct FlowState {
    std::vector<std::vector<double>> by_class;

    static FlowState zeros(int n_classes, int n_edges);
    int num_classes() const { return static_cast<int>(by_class.size()); }
    int num_edges() const {
        return by_class.empty() ? 0 : static_cast<int>(by_class.front().size());
    }
    double total(int e) const;
    std::vector<double> totals() const;
};

struct GapStats {
    double tstc = 0.0;  // total system travel cost at current flows [h]
    double sptc = 0.0;  // total cost if everyone took a current shortest path [h]
    double rel_gap = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

struct TraceRow {
    int iteration = 0;
    double beckmann = 0.0;
    double tstc = 0.0;
    double sptc = 0.0;
    double rel_gap = 0.0;
    double alpha = 0.0;
};

// One traveler path with its assigned flow; edges are graph edge ids in
// traversal order.
struct PathFlow {
    UserClassId cls = UserClassId::Commuting;
    int origin = -1;
    int destination = -1;
    std::vector<int> edges;
    double flow = 0.0;
};

struct UESolverParams {
    double epsilon = 1e-4;       // relative-gap convergence threshold
    int max_iterations = 500;
    double line_search_tol = 1e-6;
    int workers = 1;             // shortest-path workers; result is worker-count invariant
    bool track_paths = false;    // keep per-path flows (slower; for diagnostics/tests)
    ValueOfTime vot{};
};

struct UEResult {
    FlowState flows;
    GapStats stats;
    std::vector<TraceRow> trace;
    std::vector<PathFlow> path_flows;  // populated only when track_paths
};

// Travel time [h] on one edge carrying total flow y. Taxi service edges are
// congestible (BPR on top of the fixed part); every other edge is
// flow-independent.
double edge_travel_time(const EdgeLabel& label, const EdgeKind& kind, double y);

// Travel times for all edges given total flows (totals[e]).
std::vector<double> edge_travel_times(const MultimodalGraph& g, const std::vector<double>& totals);

// Generalized cost [h] experienced by a traveler class: time plus fare scaled
// by the class value of time.
double generalized_cost(const EdgeLabel& label, double t, UserClassId cls,
                        const ValueOfTime& vot = {});

// All-or-nothing assignment: route every request along a generalized-cost
// shortest path at the given (fixed) travel times. If total_cost is non-null
// it receives the demand-weighted sum of shortest-path costs.
FlowState shortest_path_assignment(const MultimodalGraph& g, const std::vector<double>& times,
                                   const Demand& d, const ValueOfTime& vot = {},
                                   double* total_cost = nullptr, int workers = 1);

// Beckmann potential: sum over edges of the integral of travel time from 0 to
// the edge total, plus the per-class monetary term scaled by value of time.
double beckmann_objective(const MultimodalGraph& g, const FlowState& flows,
                          const ValueOfTime& vot = {});

// Exact step size for moving from `current` toward `target`: minimizes the
// Beckmann potential along the segment via bisection on its derivative.
double find_alpha(const MultimodalGraph& g, const FlowState& current, const FlowState& target,
                  const ValueOfTime& vot = {}, double tol = 1e-6);

// Multi-class user equilibrium via Frank-Wolfe with exact line search.
// warm_start, when given, must be feasible for the same demand.
UEResult solve_ue(const MultimodalGraph& g, const Demand& d, const UESolverParams& params = {},
                  const FlowState* warm_start = nullptr);

// All simple paths (edge-id sequences) from origin to destination, in
// lexicographic edge-id order. Throws if more than max_paths exist.
std::vector<std::vector<int>> enumerate_simple_paths(const MultimodalGraph& g, int origin,
                                                     int destination, int max_paths = 50);

// Reference equilibrium by projected path-flow descent over the full simple-
// path set. Only viable on small instances; throws if any request has more
// than max_paths simple paths.
UEResult brute_force_ue(const MultimodalGraph& g, const Demand& d, double grid = 0.01,
                        int max_paths = 50, const ValueOfTime& vot = {});

}  // namespace mobgame
