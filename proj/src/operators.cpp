#include "mobgame/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mobgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v, double hi) { return std::clamp(v, 0.0, hi); }

double wait_into_pt(double q) { return q > 0.0 ? 1.0 / (2.0 * q) : kInf; }
double wait_into_tx(double w, double kappa) { return w > 0.0 ? kappa / w : kInf; }

}  // namespace

Policy project_policy(const Policy& z, const PolicyBounds& bounds) {
    bounds.check();
    Policy out = z;
    out.tau_pt = std::clamp(z.tau_pt, bounds.tau_pt_min, bounds.tau_pt_max);
    out.tau_tx = std::clamp(z.tau_tx, bounds.tau_tx_min, bounds.tau_tx_max);
    out.lambda = clamp01(z.lambda, bounds.lambda_max);
    out.sigma_pt = clamp01(z.sigma_pt, bounds.sigma_pt_max);
    out.sigma_tx = clamp01(z.sigma_tx, bounds.sigma_tx_max);
    return out;
}

bool policy_feasible(const Policy& z, const PolicyBounds& bounds, double tol) {
    Policy p = project_policy(z, bounds);
    auto a = z.to_vector(), b = p.to_vector();
    for (size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

MultimodalGraph apply_strategies(const MultimodalGraph& tmpl, const PtStrategy& x_pt,
                                 const TxStrategy& x_tx, const AccessModelParams& access) {
    MultimodalGraph g = tmpl;
    for (int e = 0; e < g.num_edges(); ++e) {
        Edge& ed = g.edge(e);
        EdgeLabel& lb = ed.label;
        if (ed.kind.is_service(Mode::PT)) {
            lb.price = lb.distance * x_pt.p_d;
        } else if (ed.kind.is_service(Mode::Taxi)) {
            lb.price = lb.distance * x_tx.p_d + lb.freeflow_time * x_tx.p_t;
        } else if (ed.kind.is_transfer(Mode::Walk, Mode::PT)) {
            lb.price = x_pt.p_base;
            lb.fixed_time = wait_into_pt(x_pt.q);
        } else if (ed.kind.is_transfer(Mode::Taxi, Mode::PT)) {
            lb.price = x_pt.p_trans;
            lb.fixed_time = wait_into_pt(x_pt.q);
        } else if (ed.kind.is_transfer(Mode::Walk, Mode::Taxi)) {
            lb.price = x_tx.p_base;
            lb.fixed_time = wait_into_tx(x_tx.w, access.kappa);
        } else if (ed.kind.is_transfer(Mode::PT, Mode::Taxi)) {
            lb.price = x_tx.p_trans;
            lb.fixed_time = wait_into_tx(x_tx.w, access.kappa);
        }
        // Walk service edges and transfers into walk keep their template labels.
    }
    return g;
}

double transfer_flow(const MultimodalGraph& g, const FlowState& flows, Mode from, Mode to) {
    double total = 0.0;
    for (int e = 0; e < g.num_edges(); ++e)
        if (g.edge(e).kind.is_transfer(from, to)) total += flows.total(e);
    return total;
}

double revenue_pt(const PtStrategy& x_pt, const FlowState& flows, const MultimodalGraph& g) {
    double rev = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        double y = flows.total(e);
        if (y <= 0.0) continue;
        if (ed.kind.is_service(Mode::PT)) rev += y * ed.label.distance * x_pt.p_d;
    }
    rev += x_pt.p_base * transfer_flow(g, flows, Mode::Walk, Mode::PT);
    rev += x_pt.p_trans * transfer_flow(g, flows, Mode::Taxi, Mode::PT);
    return rev;
}

double revenue_tx(const TxStrategy& x_tx, const FlowState& flows, const MultimodalGraph& g) {
    double rev = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        double y = flows.total(e);
        if (y <= 0.0) continue;
        if (ed.kind.is_service(Mode::Taxi)) {
            double t = edge_travel_time(ed.label, ed.kind, y);
            rev += y * (ed.label.distance * x_tx.p_d + t * x_tx.p_t);
        }
    }
    rev += x_tx.p_base * transfer_flow(g, flows, Mode::Walk, Mode::Taxi);
    rev += x_tx.p_trans * transfer_flow(g, flows, Mode::PT, Mode::Taxi);
    return rev;
}

double cost_pt(const PtStrategy& x_pt, const MultimodalGraph& g, const OperatorCostParams& costs) {
    if (x_pt.q <= 0.0) return 0.0;
    double per_run = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (!ed.kind.is_service(Mode::PT)) continue;
        double t = ed.label.fixed_time + ed.label.freeflow_time;  // scheduled time
        per_run += ed.label.distance * costs.pt.per_km + t * costs.pt.per_hour;
    }
    return x_pt.q * per_run + costs.pt.per_vehicle * x_pt.q;
}

double cost_tx(const TxStrategy& x_tx, const FlowState& flows, const MultimodalGraph& g,
               const OperatorCostParams& costs) {
    double c = costs.tx.per_vehicle * x_tx.w;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (!ed.kind.is_service(Mode::Taxi)) continue;
        double y = flows.total(e);
        if (y <= 0.0) continue;
        double t = edge_travel_time(ed.label, ed.kind, y);
        c += y * (ed.label.distance * costs.tx.per_km + t * costs.tx.per_hour);
    }
    return c;
}

double objective_pt(const PtStrategy& x_pt, const FlowState& flows, const MultimodalGraph& g,
                    const Policy& z, const OperatorCostParams& costs) {
    return (z.tau_pt - 1.0) * revenue_pt(x_pt, flows, g) + cost_pt(x_pt, g, costs) -
           z.sigma_pt * transfer_flow(g, flows, Mode::Taxi, Mode::PT);
}

double objective_tx(const TxStrategy& x_tx, const FlowState& flows, const MultimodalGraph& g,
                    const Policy& z, const OperatorCostParams& costs) {
    return (z.tau_tx - 1.0) * revenue_tx(x_tx, flows, g) +
           cost_tx(x_tx, flows, g, costs) -
           z.sigma_tx * transfer_flow(g, flows, Mode::PT, Mode::Taxi);
}

PtStrategy project_pt(const PtStrategy& x, const StrategyBounds& bounds) {
    PtStrategy out;
    out.q = clamp01(x.q, bounds.q_max);
    out.p_base = clamp01(x.p_base, bounds.pt_base_max);
    out.p_d = clamp01(x.p_d, bounds.pt_dist_max);
    out.p_trans = std::min(clamp01(x.p_trans, bounds.pt_trans_max), out.p_base);
    return out;
}

TxStrategy project_tx(const TxStrategy& x, const StrategyBounds& bounds, double lambda) {
    TxStrategy out;
    out.w = clamp01(x.w, std::max(0.0, lambda));
    out.p_base = clamp01(x.p_base, bounds.tx_base_max);
    out.p_d = clamp01(x.p_d, bounds.tx_dist_max);
    out.p_t = clamp01(x.p_t, bounds.tx_time_max);
    out.p_trans = std::min(clamp01(x.p_trans, bounds.tx_trans_max), out.p_base);
    return out;
}

bool pt_feasible(const PtStrategy& x, const StrategyBounds& bounds, double tol) {
    PtStrategy p = project_pt(x, bounds);
    auto a = x.to_vector(), b = p.to_vector();
    for (size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

bool tx_feasible(const TxStrategy& x, const StrategyBounds& bounds, double lambda, double tol) {
    TxStrategy p = project_tx(x, bounds, lambda);
    auto a = x.to_vector(), b = p.to_vector();
    for (size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

}  // namespace mobgame
