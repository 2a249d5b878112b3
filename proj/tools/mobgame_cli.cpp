#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mobgame/baselines.hpp"
#include "mobgame/equilibrium.hpp"
#include "mobgame/municipality.hpp"
#include "mobgame/rng.hpp"
#include "mobgame/scenario.hpp"
#include "mobgame/surrogate.hpp"
#include "mobgame/util.hpp"

namespace {

using namespace mobgame;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<uint64_t> seed;
    int workers = 1;
    std::optional<double> epsilon;
    std::optional<int> max_iter;
};

struct ZoOpts {
    std::optional<double> eta, delta;
    std::optional<int> iters, rounds;
};

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool scenario_required = true) {
    auto* s = cmd->add_option("--scenario", c.scenario_path, "Scenario JSON file");
    if (scenario_required) s->required();
    cmd->add_option("--out", c.out_dir, "Output directory");
    cmd->add_option("--seed", c.seed, "Run seed (defaults to the scenario seed)");
    cmd->add_option("--workers", c.workers, "Worker threads (outputs are invariant)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--epsilon", c.epsilon, "Traveler equilibrium relative-gap tolerance");
    cmd->add_option("--max-iter", c.max_iter, "Traveler equilibrium iteration cap");
}

void add_zo(CLI::App* cmd, ZoOpts& z) {
    cmd->add_option("--eta", z.eta, "Two-point step size (box-width units)");
    cmd->add_option("--delta", z.delta, "Two-point smoothing radius (box-width units)");
    cmd->add_option("--iters", z.iters, "Two-point iterations");
    cmd->add_option("--rounds", z.rounds, "Round-robin rounds (operator game)");
}

Scenario load(const CommonOpts& c, uint64_t& run_seed) {
    Scenario s = load_scenario_file(c.scenario_path);
    run_seed = c.seed.value_or(s.seed);
    if (c.epsilon) s.ue.epsilon = *c.epsilon;
    if (c.max_iter) s.ue.max_iterations = *c.max_iter;
    s.ue.workers = c.workers;
    return s;
}

void apply_zo(const ZoOpts& o, ZOParams& zo) {
    if (o.eta) zo.eta = *o.eta;
    if (o.delta) zo.delta = *o.delta;
    if (o.iters) zo.iterations = *o.iters;
    if (o.rounds) zo.rounds = *o.rounds;
    zo.check();
}

json meta_json(const Scenario& s, uint64_t run_seed, const std::string& command) {
    return json{{"artifact_version", kArtifactVersion},
                {"command", command},
                {"scenario", s.name},
                {"scenario_hash", hex64(scenario_hash(s))},
                {"seed", run_seed},
                {"wallclock_ms", 0}};
}

int cmd_assign(const CommonOpts& c) {
    Timer timer;
    uint64_t run_seed = 0;
    Scenario s = load(c, run_seed);

    PtStrategy x_pt = project_pt(s.x0_pt, s.setup.bounds);
    TxStrategy x_tx = project_tx(s.x0_tx, s.setup.bounds, s.z0.lambda);
    MultimodalGraph g = apply_strategies(s.network, x_pt, x_tx, s.setup.access);
    UEResult res = solve_ue(g, s.demand, s.ue);

    std::string meta = meta_header(s, run_seed);
    write_text_file(c.out_dir + "/assign_flows.csv", meta + flows_csv(g, res.flows));
    write_text_file(c.out_dir + "/assign_trace.csv", meta + ue_trace_csv(res.trace));
    json summary = meta_json(s, run_seed, "assign");
    summary["stats"] = gap_stats_to_json(res.stats);
    summary["beckmann"] = beckmann_objective(g, res.flows, s.ue.vot);
    summary["total_demand"] = s.demand.total_volume();
    write_text_file(c.out_dir + "/assign_summary.json", summary.dump(2) + "\n");

    std::cout << "assign: " << (res.stats.converged ? "converged" : "NOT converged")
              << " rel_gap=" << fmt_double(res.stats.rel_gap)
              << " iterations=" << res.stats.iterations << "\n"
              << "outputs in " << c.out_dir << "\n";
    std::cerr << "wallclock_ms=" << timer.ms() << "\n";
    return res.stats.converged ? kExitOk : kExitNotConverged;
}

int cmd_mne(const CommonOpts& c, const ZoOpts& zopts) {
    Timer timer;
    uint64_t run_seed = 0;
    Scenario s = load(c, run_seed);
    ZOParams zo = s.zo_mne;
    apply_zo(zopts, zo);
    zo.seed = derive_seed(run_seed, kStreamMne);

    EquilibriumResult eq =
        seek_mne(s.network, s.demand, s.z0, s.x0_pt, s.x0_tx, s.ue, zo, s.setup);
    MultimodalGraph g = apply_strategies(s.network, eq.x_pt, eq.x_tx, s.setup.access);
    JBreakdown parts = evaluate_J_parts(s.z0, eq.x_pt, eq.x_tx, eq.flows, g, s.municipal, s.ue.vot);

    std::string meta = meta_header(s, run_seed);
    write_text_file(c.out_dir + "/mne_trace.csv", meta + nash_trace_csv(eq.trace));
    write_text_file(c.out_dir + "/mne_flows.csv", meta + flows_csv(g, eq.flows));
    json summary = meta_json(s, run_seed, "mne");
    summary["converged"] = eq.converged;
    summary["ue_failures"] = eq.ue_failures;
    summary["x_pt"] = pt_strategy_to_json(eq.x_pt);
    summary["x_tx"] = tx_strategy_to_json(eq.x_tx);
    summary["flow_stats"] = gap_stats_to_json(eq.flow_stats);
    summary["objective_pt"] = objective_pt(eq.x_pt, eq.flows, g, s.z0, s.setup.costs);
    summary["objective_tx"] = objective_tx(eq.x_tx, eq.flows, g, s.z0, s.setup.costs);
    summary["J"] = parts.J;
    summary["j_sw"] = parts.j_sw;
    summary["j_em"] = parts.j_em;
    summary["j_rev"] = parts.j_rev;
    write_text_file(c.out_dir + "/mne_summary.json", summary.dump(2) + "\n");

    std::cout << "mne: " << (eq.converged ? "converged" : "round budget exhausted")
              << " ue_failures=" << eq.ue_failures << "\n"
              << "outputs in " << c.out_dir << "\n";
    std::cerr << "wallclock_ms=" << timer.ms() << "\n";
    return (eq.converged && eq.flow_stats.converged) ? kExitOk : kExitNotConverged;
}

int cmd_dataset(const CommonOpts& c, std::optional<int> samples) {
    Timer timer;
    uint64_t run_seed = 0;
    Scenario s = load(c, run_seed);
    int n = samples.value_or(s.dataset_samples);
    if (n < 1) throw std::invalid_argument("dataset: sample count must be >= 1");

    MneSamplerConfig cfg;
    cfg.policy_bounds = s.policy_bounds;
    cfg.setup = s.setup;
    cfg.municipal = s.municipal;
    cfg.ue = s.ue;
    cfg.zo = s.zo_mne;
    cfg.workers = c.workers;
    MneDataset ds =
        sample_mne_dataset(s.network, s.demand, n, cfg, derive_seed(run_seed, kStreamDataset));

    std::string meta = meta_header(s, run_seed);
    write_text_file(c.out_dir + "/dataset.csv", meta + dataset_to_csv(ds));
    int converged = 0;
    for (const auto& r : ds.samples) converged += r.converged ? 1 : 0;
    json summary = meta_json(s, run_seed, "dataset");
    summary["samples_requested"] = n;
    summary["samples_recorded"] = static_cast<int>(ds.samples.size());
    summary["samples_converged"] = converged;
    write_text_file(c.out_dir + "/dataset_summary.json", summary.dump(2) + "\n");

    std::cout << "dataset: recorded " << ds.samples.size() << "/" << n << " samples ("
              << converged << " converged)\n"
              << "outputs in " << c.out_dir << "\n";
    std::cerr << "wallclock_ms=" << timer.ms() << "\n";
    return ds.samples.empty() ? kExitNotConverged : kExitOk;
}

int cmd_train(const CommonOpts& c, const std::string& dataset_path, int epochs, int hidden) {
    Timer timer;
    uint64_t run_seed = 0;
    Scenario s = load(c, run_seed);
    MneDataset ds = load_dataset_file(dataset_path);

    MlpArchitecture arch;
    if (hidden > 0) arch.hidden = {hidden};
    TrainParams tp;
    if (epochs > 0) tp.epochs = epochs;
    tp.seed = derive_seed(run_seed, kStreamTrain);
    SurrogateModel model = fit_surrogate(ds, arch, tp);

    write_text_file(c.out_dir + "/surrogate.json", surrogate_to_json(model).dump(2) + "\n");
    json summary = meta_json(s, run_seed, "train");
    summary["dataset"] = dataset_path;
    summary["records"] = static_cast<int>(ds.samples.size());
    summary["final_loss"] = model.final_loss;
    summary["constant_predictor"] = model.constant_predictor;
    summary["nrmse_train"] = strategy_nrmse(model, ds, s.setup.bounds);
    write_text_file(c.out_dir + "/train_summary.json", summary.dump(2) + "\n");

    std::cout << "train: " << ds.samples.size() << " records, final_loss="
              << fmt_double(model.final_loss) << "\n"
              << "outputs in " << c.out_dir << "\n";
    std::cerr << "wallclock_ms=" << timer.ms() << "\n";
    return kExitOk;
}

int cmd_optimize(const CommonOpts& c, const ZoOpts& zopts, const std::string& method,
                 const std::string& evaluator_kind, const std::string& surrogate_path,
                 std::optional<int> budget_opt) {
    Timer timer;
    uint64_t run_seed = 0;
    Scenario s = load(c, run_seed);
    int budget = budget_opt.value_or(s.budget);
    if (budget < 1) throw std::invalid_argument("optimize: budget must be >= 1");

    std::unique_ptr<PolicyEvaluator> evaluator;
    if (evaluator_kind == "exact") {
        ZOParams inner = s.zo_mne;
        inner.seed = derive_seed(run_seed, kStreamMne);
        evaluator = std::make_unique<ExactPolicyEvaluator>(s.network, s.demand, s.x0_pt, s.x0_tx,
                                                           s.ue, inner, s.setup, s.municipal);
    } else if (evaluator_kind == "surrogate") {
        std::string path = surrogate_path.empty() ? c.out_dir + "/surrogate.json" : surrogate_path;
        evaluator = std::make_unique<SurrogatePolicyEvaluator>(load_surrogate_file(path),
                                                               s.setup.bounds, s.municipal);
    } else {
        throw std::invalid_argument("optimize: unknown evaluator '" + evaluator_kind + "'");
    }

    PolicyOptResult res;
    if (method == "feedback") {
        ZOParams zo = s.zo_policy;
        apply_zo(zopts, zo);
        if (!zopts.iters) zo.iterations = std::max(1, budget / 2);
        zo.seed = derive_seed(run_seed, kStreamPolicy);
        res = optimize_policy(s.z0, *evaluator, zo, s.policy_bounds);
    } else if (method == "random") {
        BaselineBudget bb{budget, derive_seed(run_seed, kStreamBaseline)};
        res = random_search(*evaluator, s.policy_bounds, bb);
    } else if (method == "ga") {
        GAParams ga = s.ga;
        ga.generations = std::max(1, budget / ga.population);
        BaselineBudget bb{budget, derive_seed(run_seed, kStreamBaseline)};
        res = genetic_algorithm(*evaluator, s.policy_bounds, ga, bb);
    } else {
        throw std::invalid_argument("optimize: unknown method '" + method + "'");
    }

    std::string meta = meta_header(s, run_seed);
    write_text_file(c.out_dir + "/optimize_" + method + "_trace.csv",
                    meta + policy_trace_csv(res.trace));
    json summary = meta_json(s, run_seed, "optimize");
    summary["method"] = method;
    summary["evaluator"] = res.trace.evaluator;
    summary["budget"] = budget;
    summary["evaluations"] = res.trace.evaluations;
    summary["best_policy"] = policy_to_json(res.best);
    summary["best_J"] = res.best_J;
    summary["final_policy"] = policy_to_json(res.final);
    write_text_file(c.out_dir + "/optimize_" + method + "_summary.json", summary.dump(2) + "\n");

    bool any_success = std::isfinite(res.best_J);
    std::cout << "optimize(" << method << "/" << res.trace.evaluator
              << "): best_J=" << fmt_double(res.best_J)
              << " evaluations=" << res.trace.evaluations << "\n"
              << "outputs in " << c.out_dir << "\n";
    std::cerr << "wallclock_ms=" << timer.ms() << "\n";
    return any_success ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical mobility game: traveler equilibrium, operator Nash seeking, and "
                 "municipal policy optimization"};
    app.require_subcommand(1);

    CommonOpts c_assign, c_mne, c_dataset, c_train, c_optimize;
    ZoOpts z_mne, z_optimize;
    std::optional<int> dataset_samples;
    std::string train_dataset;
    int train_epochs = 0;
    int train_hidden = 0;
    std::string opt_method = "feedback";
    std::string opt_evaluator = "exact";
    std::string opt_surrogate;
    std::optional<int> opt_budget;

    CLI::App* assign = app.add_subcommand("assign", "Solve the traveler equilibrium");
    add_common(assign, c_assign);

    CLI::App* mne = app.add_subcommand("mne", "Seek the operator Nash equilibrium");
    add_common(mne, c_mne);
    add_zo(mne, z_mne);

    CLI::App* dataset = app.add_subcommand("dataset", "Sample the equilibrium-map dataset");
    add_common(dataset, c_dataset);
    dataset->add_option("--samples", dataset_samples, "Number of samples");

    CLI::App* train = app.add_subcommand("train", "Fit the equilibrium-map surrogate");
    add_common(train, c_train);
    train->add_option("--dataset", train_dataset, "Dataset CSV produced by 'dataset'")->required();
    train->add_option("--epochs", train_epochs, "Training epochs");
    train->add_option("--hidden", train_hidden, "Hidden layer width");

    CLI::App* optimize = app.add_subcommand("optimize", "Optimize the municipal policy");
    add_common(optimize, c_optimize);
    add_zo(optimize, z_optimize);
    optimize->add_option("--method", opt_method, "feedback | ga | random")
        ->check(CLI::IsMember({"feedback", "ga", "random"}));
    optimize->add_option("--evaluator", opt_evaluator, "exact | surrogate")
        ->check(CLI::IsMember({"exact", "surrogate"}));
    optimize->add_option("--surrogate", opt_surrogate, "Surrogate model file");
    optimize->add_option("--budget", opt_budget, "Objective evaluation budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (assign->parsed()) return cmd_assign(c_assign);
        if (mne->parsed()) return cmd_mne(c_mne, z_mne);
        if (dataset->parsed()) return cmd_dataset(c_dataset, dataset_samples);
        if (train->parsed()) return cmd_train(c_train, train_dataset, train_epochs, train_hidden);
        if (optimize->parsed())
            return cmd_optimize(c_optimize, z_optimize, opt_method, opt_evaluator, opt_surrogate,
                                opt_budget);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}
