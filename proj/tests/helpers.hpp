#pragma once

// Shared builders for the test suites: tiny networks with known equilibria
// and a couple of convenience wrappers.

#include <cmath>
#include <string>
#include <vector>

#include "mobgame/assignment.hpp"
#include "mobgame/demand.hpp"
#include "mobgame/network.hpp"

namespace mobgame::testing {

// Two-route bottleneck network. Route A is a constant-time walk edge
// (edge 0, t_fc = 1 h). Route B runs through the taxi layer with a linear
// congestion law t_B(y) = 1e-4 + 0.01*y, so for a single class with demand
// 150 the equilibrium is y_B = 99.99, y_A = 50.01 (both routes cost ~1 h),
// and for demand 50 route B carries everything.
//
// Vertices: 0 walk origin, 1 walk destination, 2/3 taxi.
// Edges: 0 walk 0->1 (route A), 1 walk 1->0 (return, keeps the walk layer
// strongly connected), 2 transfer walk->taxi, 3 taxi service (congestible),
// 4 transfer taxi->walk.
inline MultimodalGraph make_bottleneck() {
    MultimodalGraph g;
    const int w0 = g.add_vertex(Mode::Walk, 0, 0);
    const int w1 = g.add_vertex(Mode::Walk, 1, 0);
    const int t0 = g.add_vertex(Mode::Taxi, 0, 0);
    const int t1 = g.add_vertex(Mode::Taxi, 1, 0);

    EdgeLabel walk;
    walk.fixed_time = 1.0;
    g.add_edge(w0, w1, EdgeKind::service(Mode::Walk), walk);
    g.add_edge(w1, w0, EdgeKind::service(Mode::Walk), walk);

    EdgeLabel free;  // all zero
    g.add_edge(w0, t0, EdgeKind::make_transfer(Mode::Walk, Mode::Taxi), free);

    EdgeLabel taxi;
    taxi.freeflow_time = 1e-4;
    taxi.capacity = 0.01;
    taxi.bpr_a = 1.0;
    taxi.bpr_b = 1.0;  // t(y) = 1e-4 * (1 + y/0.01) = 1e-4 + 0.01*y
    g.add_edge(t0, t1, EdgeKind::service(Mode::Taxi), taxi);

    g.add_edge(t1, w1, EdgeKind::make_transfer(Mode::Taxi, Mode::Walk), free);
    return g;
}

inline Demand single_request(double volume, UserClassId cls = UserClassId::Commuting,
                             int origin = 0, int destination = 1) {
    Demand d;
    d.requests.push_back(Request{cls, origin, destination, volume});
    return d;
}

// Largest absolute difference of total edge flows between two states.
inline double max_flow_gap(const FlowState& a, const FlowState& b) {
    double worst = 0.0;
    for (int e = 0; e < a.num_edges(); ++e) worst = std::max(worst, std::abs(a.total(e) - b.total(e)));
    return worst;
}

}  // namespace mobgame::testing
