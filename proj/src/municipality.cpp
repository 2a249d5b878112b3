#include "mobgame/municipality.hpp"

#include <algorithm>
#include <cmath>

#include "mobgame/rng.hpp"

namespace mobgame {

double social_welfare_cost(const FlowState& flows, const MultimodalGraph& g,
                           const ValueOfTime& vot) {
    double sw = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        double y = flows.total(e);
        if (y <= 0.0) continue;
        double t = edge_travel_time(ed.label, ed.kind, y);
        for (int n = 0; n < flows.num_classes(); ++n) {
            double yn = flows.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)];
            if (yn <= 0.0) continue;
            sw += yn * (ed.label.price + t * vot.of(static_cast<UserClassId>(n)));
        }
    }
    return sw;
}

double taxi_distance_flow(const FlowState& flows, const MultimodalGraph& g) {
    double base = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (!ed.kind.is_service(Mode::Taxi)) continue;
        base += flows.total(e) * ed.label.distance;
    }
    return base;
}

double emissions(const FlowState& flows, const MultimodalGraph& g, double factor) {
    return factor * taxi_distance_flow(flows, g);
}

double municipal_revenue(const Policy& z, double rev_pt, double rev_tx, double tr21,
                         double tr12) {
    return z.tau_pt * rev_pt + z.tau_tx * rev_tx - z.sigma_pt * tr21 - z.sigma_tx * tr12;
}

JBreakdown evaluate_J_from_aggregates(const Policy& z, double j_sw, double em_base, double rev_pt,
                                      double rev_tx, double tr21, double tr12,
                                      const MunicipalParams& params) {
    JBreakdown b;
    b.j_sw = j_sw;
    b.j_em = params.emission_factor * em_base;
    b.j_rev = municipal_revenue(z, rev_pt, rev_tx, tr21, tr12);
    b.J = -params.omega1 * b.j_sw + params.omega2 * b.j_em - params.omega3 * b.j_rev;
    return b;
}

JBreakdown evaluate_J_parts(const Policy& z, const PtStrategy& x_pt, const TxStrategy& x_tx,
                            const FlowState& flows, const MultimodalGraph& g,
                            const MunicipalParams& params, const ValueOfTime& vot) {
    return evaluate_J_from_aggregates(
        z, social_welfare_cost(flows, g, vot), taxi_distance_flow(flows, g),
        revenue_pt(x_pt, flows, g), revenue_tx(x_tx, flows, g),
        transfer_flow(g, flows, Mode::Taxi, Mode::PT), transfer_flow(g, flows, Mode::PT, Mode::Taxi),
        params);
}

double evaluate_J(const Policy& z, const PtStrategy& x_pt, const TxStrategy& x_tx,
                  const FlowState& flows, const MultimodalGraph& g, const MunicipalParams& params,
                  const ValueOfTime& vot) {
    return evaluate_J_parts(z, x_pt, x_tx, flows, g, params, vot).J;
}

ExactPolicyEvaluator::ExactPolicyEvaluator(MultimodalGraph tmpl, Demand demand, PtStrategy x0_pt,
                                           TxStrategy x0_tx, UESolverParams ue, ZOParams zo,
                                           OperatorSetup setup, MunicipalParams municipal)
    : tmpl_(std::move(tmpl)),
      demand_(std::move(demand)),
      x0_pt_(x0_pt),
      x0_tx_(x0_tx),
      ue_(ue),
      zo_(zo),
      setup_(setup),
      municipal_(municipal) {}

PolicyEvalResult ExactPolicyEvaluator::evaluate(const Policy& z) {
    PolicyEvalResult r;
    try {
        EquilibriumResult eq = seek_mne(tmpl_, demand_, z, x0_pt_, x0_tx_, ue_, zo_, setup_);
        MultimodalGraph g = apply_strategies(tmpl_, eq.x_pt, eq.x_tx, setup_.access);
        r.parts = evaluate_J_parts(z, eq.x_pt, eq.x_tx, eq.flows, g, municipal_, ue_.vot);
        r.J = r.parts.J;
        r.ok = std::isfinite(r.J);
    } catch (const std::exception&) {
        r.ok = false;
    }
    return r;
}

SurrogatePolicyEvaluator::SurrogatePolicyEvaluator(SurrogateModel model, StrategyBounds bounds,
                                                   MunicipalParams municipal)
    : model_(std::move(model)), bounds_(bounds), municipal_(municipal) {}

PolicyEvalResult SurrogatePolicyEvaluator::evaluate(const Policy& z) {
    PolicyEvalResult r;
    SurrogatePrediction p = surrogate_predict(model_, z, bounds_);
    r.parts = evaluate_J_from_aggregates(z, p.j_sw, p.em_base, p.rev_pt, p.rev_tx, p.tr21, p.tr12,
                                         municipal_);
    r.J = r.parts.J;
    r.ok = std::isfinite(r.J);
    return r;
}

PolicyOptResult optimize_policy(const Policy& z0, PolicyEvaluator& evaluator, const ZOParams& zo,
                                const PolicyBounds& bounds) {
    zo.check();
    bounds.check();
    if (!policy_feasible(z0, bounds)) throw std::invalid_argument("z0 is not feasible");

    const std::array<double, 5> lo = bounds.lower();
    const std::array<double, 5> hi = bounds.upper();
    std::array<double, 5> range{};
    for (size_t i = 0; i < 5; ++i) range[i] = std::max(hi[i] - lo[i], 1e-12);
    auto to_unit = [&](const Policy& z) {
        auto v = z.to_vector();
        std::array<double, 5> u{};
        for (size_t i = 0; i < 5; ++i) u[i] = (v[i] - lo[i]) / range[i];
        return u;
    };
    auto from_unit = [&](const std::array<double, 5>& u) {
        std::array<double, 5> v{};
        for (size_t i = 0; i < 5; ++i) v[i] = lo[i] + u[i] * range[i];
        return project_policy(Policy::from_vector(v), bounds);
    };

    PolicyOptResult res;
    res.best = z0;
    res.final = z0;
    res.trace.method = "feedback";
    res.trace.evaluator = evaluator.name();

    std::array<double, 5> u = to_unit(project_policy(z0, bounds));
    std::mt19937_64 rng(zo.seed);
    const int steps = zo.iterations;
    for (int iter = 0; iter < steps; ++iter) {
        std::array<double, 5> v{};
        for (auto& c : v) c = normal01(rng);
        std::array<double, 5> up{}, um{};
        for (size_t i = 0; i < 5; ++i) {
            up[i] = u[i] + zo.delta * v[i];
            um[i] = u[i] - zo.delta * v[i];
        }
        Policy zp = from_unit(up), zm = from_unit(um);
        PolicyEvalResult rp = evaluator.evaluate(zp);
        PolicyEvalResult rm = evaluator.evaluate(zm);
        res.trace.evaluations += 2;
        if (rp.ok && rp.J < res.best_J) {
            res.best_J = rp.J;
            res.best = zp;
        }
        if (rm.ok && rm.J < res.best_J) {
            res.best_J = rm.J;
            res.best = zm;
        }
        bool ok = rp.ok && rm.ok;
        if (ok) {
            // Fixed-length sign step: the derivative estimate only contributes
            // its sign, so eta really is a step length in box-width units and
            // the walk is insensitive to the scale of J. A zero difference
            // leaves the iterate in place.
            double diff = rp.J - rm.J;
            double sgn = (diff > 0.0) - (diff < 0.0);
            std::array<double, 5> next{};
            for (size_t i = 0; i < 5; ++i) next[i] = u[i] - zo.eta * sgn * v[i];
            u = to_unit(from_unit(next));
        }
        res.trace.rows.push_back({iter, from_unit(u), rp.J, rm.J, res.best_J, ok});
    }
    res.final = from_unit(u);
    return res;
}

}  // namespace mobgame
