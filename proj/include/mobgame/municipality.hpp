#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mobgame/equilibrium.hpp"
#include "mobgame/surrogate.hpp"

namespace mobgame {

// J_sw: total generalized travel cost in money units at congested times,
// summed over classes and edges.
double social_welfare_cost(const FlowState& flows, const MultimodalGraph& g,
                           const ValueOfTime& vot = {});

// Taxi vehicle-kilometre base of the emission term: sum of y_e * l_e over
// taxi service edges.
double taxi_distance_flow(const FlowState& flows, const MultimodalGraph& g);

// J_em = factor * taxi_distance_flow.
double emissions(const FlowState& flows, const MultimodalGraph& g, double factor);

// J_rev = tau_pt*rev_pt + tau_tx*rev_tx - sigma_pt*tr21 - sigma_tx*tr12.
double municipal_revenue(const Policy& z, double rev_pt, double rev_tx, double tr21, double tr12);

struct JBreakdown {
    double j_sw = 0.0;
    double j_em = 0.0;
    double j_rev = 0.0;
    double J = 0.0;  // -w1*j_sw + w2*j_em - w3*j_rev
};

JBreakdown evaluate_J_parts(const Policy& z, const PtStrategy& x_pt, const TxStrategy& x_tx,
                            const FlowState& flows, const MultimodalGraph& g,
                            const MunicipalParams& params, const ValueOfTime& vot = {});

// Same combination evaluated from precomputed aggregates (the surrogate path).
JBreakdown evaluate_J_from_aggregates(const Policy& z, double j_sw, double em_base, double rev_pt,
                                      double rev_tx, double tr21, double tr12,
                                      const MunicipalParams& params);

double evaluate_J(const Policy& z, const PtStrategy& x_pt, const TxStrategy& x_tx,
                  const FlowState& flows, const MultimodalGraph& g, const MunicipalParams& params,
                  const ValueOfTime& vot = {});

struct PolicyEvalResult {
    double J = std::numeric_limits<double>::quiet_NaN();
    JBreakdown parts{};
    bool ok = false;
};

// Deterministic map z -> J. Implementations must return the same result for
// the same policy regardless of call order.
class PolicyEvaluator {
  public:
    virtual ~PolicyEvaluator() = default;
    virtual PolicyEvalResult evaluate(const Policy& z) = 0;
    virtual std::string name() const = 0;
};

// Nested evaluation: operator Nash seeking plus a traveler equilibrium solve
// per policy query, always from the same initial strategies and inner seed.
class ExactPolicyEvaluator : public PolicyEvaluator {
  public:
    ExactPolicyEvaluator(MultimodalGraph tmpl, Demand demand, PtStrategy x0_pt, TxStrategy x0_tx,
                         UESolverParams ue, ZOParams zo, OperatorSetup setup,
                         MunicipalParams municipal);
    PolicyEvalResult evaluate(const Policy& z) override;
    std::string name() const override { return "exact"; }

  private:
    MultimodalGraph tmpl_;
    Demand demand_;
    PtStrategy x0_pt_;
    TxStrategy x0_tx_;
    UESolverParams ue_;
    ZOParams zo_;
    OperatorSetup setup_;
    MunicipalParams municipal_;
};

// Evaluates J from the learned equilibrium map; no network solves.
class SurrogatePolicyEvaluator : public PolicyEvaluator {
  public:
    SurrogatePolicyEvaluator(SurrogateModel model, StrategyBounds bounds,
                             MunicipalParams municipal);
    PolicyEvalResult evaluate(const Policy& z) override;
    std::string name() const override { return "surrogate"; }

  private:
    SurrogateModel model_;
    StrategyBounds bounds_;
    MunicipalParams municipal_;
};

// Analytic stand-in for tests and calibration.
class FunctionPolicyEvaluator : public PolicyEvaluator {
  public:
    explicit FunctionPolicyEvaluator(std::function<double(const Policy&)> f,
                                     std::string name = "stub")
        : f_(std::move(f)), name_(std::move(name)) {}
    PolicyEvalResult evaluate(const Policy& z) override {
        PolicyEvalResult r;
        r.J = f_(z);
        r.ok = std::isfinite(r.J);
        return r;
    }
    std::string name() const override { return name_; }

  private:
    std::function<double(const Policy&)> f_;
    std::string name_;
};

struct PolicyTraceRow {
    int iteration = 0;
    Policy z{};  // feedback: accepted policy after the step; baselines: the candidate
    double j_plus = std::numeric_limits<double>::quiet_NaN();
    double j_minus = std::numeric_limits<double>::quiet_NaN();
    double j_best = std::numeric_limits<double>::quiet_NaN();
    bool ok = true;
};

struct PolicyTrace {
    std::string method;     // feedback | random | ga
    std::string evaluator;  // exact | surrogate | stub
    std::vector<PolicyTraceRow> rows;
    int evaluations = 0;  // actual evaluator invocations
};

struct PolicyOptResult {
    Policy best{};
    double best_J = std::numeric_limits<double>::infinity();
    Policy final{};
    PolicyTrace trace;
};

// Projected two-point descent on the policy box (normalized per dimension to
// [0,1], so eta/delta are in box-width units). Each step probes z +/- delta*v
// along a Gaussian direction v and moves eta*v against the sign of the
// difference, which keeps the step length independent of the magnitude of J;
// a zero difference leaves the iterate in place. Runs zo.iterations steps of
// two evaluations each; a failed evaluation skips the step. Best-so-far
// tracks the evaluated perturbed candidates.
PolicyOptResult optimize_policy(const Policy& z0, PolicyEvaluator& evaluator, const ZOParams& zo,
                                const PolicyBounds& bounds);

}  // namespace mobgame
