#include "mobgame/equilibrium.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mobgame/municipality.hpp"
#include "mobgame/rng.hpp"
#include "mobgame/util.hpp"

namespace mobgame {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::vector<double> draw_normal(std::mt19937_64& rng, size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal01(rng);
    return v;
}

}  // namespace

void ZOParams::check() const {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (!(convergence_tol >= 0.0)) throw std::invalid_argument("convergence_tol must be >= 0");
}

std::vector<double> two_point_gradient(double f_plus, double f_minus,
                                       const std::vector<double>& v, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    double scale = (f_plus - f_minus) / (2.0 * delta);
    std::vector<double> g(v.size());
    for (size_t i = 0; i < v.size(); ++i) g[i] = v[i] * scale;
    return g;
}

ZoStepOutcome zo_step(const std::vector<double>& x_k, const ObjectiveFn& objective, double eta,
                      double delta, const ProjectorFn& project, std::mt19937_64& rng) {
    if (!(eta > 0.0) || !(delta > 0.0)) throw std::invalid_argument("eta and delta must be > 0");
    std::vector<double> v = draw_normal(rng, x_k.size());
    std::vector<double> xp(x_k.size()), xm(x_k.size());
    for (size_t i = 0; i < x_k.size(); ++i) {
        xp[i] = x_k[i] + delta * v[i];
        xm[i] = x_k[i] - delta * v[i];
    }
    ZoStepOutcome out;
    out.f_plus = objective(project(xp));
    out.f_minus = objective(project(xm));
    if (!finite(out.f_plus) || !finite(out.f_minus)) {
        out.x = x_k;
        out.ok = false;
        return out;
    }
    std::vector<double> g = two_point_gradient(out.f_plus, out.f_minus, v, delta);
    std::vector<double> next(x_k.size());
    for (size_t i = 0; i < x_k.size(); ++i) next[i] = x_k[i] - eta * g[i];
    out.x = project(next);
    return out;
}

NashResult seek_nash(const NashProblem& problem, const ZOParams& params) {
    params.check();
    const size_t players = problem.objectives.size();
    if (players != 2)
        throw std::invalid_argument("seek_nash expects exactly 2 players");
    if (problem.projectors.size() != players || problem.x0.size() != players)
        throw std::invalid_argument("problem arrays must have one entry per player");

    NashResult res;
    res.x.resize(players);
    for (size_t k = 0; k < players; ++k) res.x[k] = problem.projectors[k](problem.x0[k]);

    std::vector<std::vector<std::vector<double>>> history(players);
    std::mt19937_64 rng(params.seed);
    for (int round = 0; round < params.rounds; ++round) {
        std::vector<std::vector<double>> before = res.x;
        for (size_t k = 0; k < players; ++k) {
            size_t opp = 1 - k;
            ObjectiveFn own = [&](const std::vector<double>& x) {
                return problem.objectives[k](x, res.x[opp]);
            };
            for (int t = 0; t < params.iterations; ++t) {
                ZoStepOutcome step =
                    zo_step(res.x[k], own, params.eta, params.delta, problem.projectors[k], rng);
                if (!step.ok) ++res.failed_evaluations;
                res.x[k] = step.x;
                history[k].push_back(res.x[k]);
                res.trace.push_back(
                    {round, t, static_cast<int>(k), res.x[k], step.f_plus, step.f_minus, step.ok});
            }
        }
        double max_change = 0.0;
        for (size_t k = 0; k < players; ++k)
            for (size_t i = 0; i < res.x[k].size(); ++i)
                max_change = std::max(max_change, std::abs(res.x[k][i] - before[k][i]));
        if (max_change < params.convergence_tol) {
            res.converged = true;
            break;
        }
    }
    // Return the tail average of each player's iterates (projected) rather
    // than the last point: the mean over the second half of the run sits at
    // the center of the zeroth-order noise ball and of any slow
    // best-response orbit, both of which the raw endpoint samples at a
    // random phase.
    for (size_t k = 0; k < players; ++k) {
        const auto& h = history[k];
        size_t window = std::max<size_t>(1, h.size() / 2);
        std::vector<double> mean(res.x[k].size(), 0.0);
        for (size_t s = h.size() - window; s < h.size(); ++s)
            for (size_t i = 0; i < mean.size(); ++i) mean[i] += h[s][i];
        for (double& m : mean) m /= static_cast<double>(window);
        res.x[k] = problem.projectors[k](mean);
    }
    return res;
}

namespace {

struct NormalizedBox {
    std::vector<double> scale;  // per-dimension positive scale

    std::vector<double> to_unit(const std::vector<double>& x) const {
        std::vector<double> u(x.size());
        for (size_t i = 0; i < x.size(); ++i) u[i] = x[i] / scale[i];
        return u;
    }
    std::vector<double> from_unit(const std::vector<double>& u) const {
        std::vector<double> x(u.size());
        for (size_t i = 0; i < u.size(); ++i) x[i] = u[i] * scale[i];
        return x;
    }
};

NormalizedBox pt_box(const StrategyBounds& b) {
    auto safe = [](double v) { return std::max(v, 1e-9); };
    return {{safe(b.q_max), safe(b.pt_base_max), safe(b.pt_dist_max), safe(b.pt_trans_max)}};
}

NormalizedBox tx_box(const StrategyBounds& b, double lambda) {
    auto safe = [](double v) { return std::max(v, 1e-9); };
    return {{safe(lambda), safe(b.tx_base_max), safe(b.tx_dist_max), safe(b.tx_time_max),
             safe(b.tx_trans_max)}};
}

std::vector<double> to_std(const std::array<double, 4>& a) { return {a.begin(), a.end()}; }
std::vector<double> to_std(const std::array<double, 5>& a) { return {a.begin(), a.end()}; }

PtStrategy pt_from_std(const std::vector<double>& v) {
    return PtStrategy::from_vector({v[0], v[1], v[2], v[3]});
}
TxStrategy tx_from_std(const std::vector<double>& v) {
    return TxStrategy::from_vector({v[0], v[1], v[2], v[3], v[4]});
}

}  // namespace

EquilibriumResult seek_mne(const MultimodalGraph& tmpl, const Demand& demand, const Policy& z,
                           const PtStrategy& x0_pt, const TxStrategy& x0_tx,
                           const UESolverParams& ue_params, const ZOParams& zo_params,
                           const OperatorSetup& setup) {
    zo_params.check();
    UESolverParams ue = ue_params;
    ue.track_paths = false;

    const NormalizedBox bpt = pt_box(setup.bounds);
    const NormalizedBox btx = tx_box(setup.bounds, z.lambda);

    // Shared across objective evaluations: the previous equilibrium seeds the
    // next solve. Evaluations run sequentially, so this is deterministic.
    std::optional<FlowState> warm;
    int ue_failures = 0;

    auto solve_for = [&](const PtStrategy& xp, const TxStrategy& xt, bool use_warm) {
        MultimodalGraph g = apply_strategies(tmpl, xp, xt, setup.access);
        UEResult r = solve_ue(g, demand, ue, use_warm && warm ? &*warm : nullptr);
        if (!r.stats.converged) ++ue_failures;
        warm = r.flows;
        return std::make_pair(std::move(g), std::move(r));
    };

    NashProblem prob;
    prob.objectives = {
        [&](const std::vector<double>& u_own, const std::vector<double>& u_opp) {
            PtStrategy xp = project_pt(pt_from_std(bpt.from_unit(u_own)), setup.bounds);
            TxStrategy xt = project_tx(tx_from_std(btx.from_unit(u_opp)), setup.bounds, z.lambda);
            auto [g, r] = solve_for(xp, xt, true);
            return objective_pt(xp, r.flows, g, z, setup.costs);
        },
        [&](const std::vector<double>& u_own, const std::vector<double>& u_opp) {
            TxStrategy xt = project_tx(tx_from_std(btx.from_unit(u_own)), setup.bounds, z.lambda);
            PtStrategy xp = project_pt(pt_from_std(bpt.from_unit(u_opp)), setup.bounds);
            auto [g, r] = solve_for(xp, xt, true);
            return objective_tx(xt, r.flows, g, z, setup.costs);
        }};
    prob.projectors = {
        [&](const std::vector<double>& u) {
            PtStrategy xp = project_pt(pt_from_std(bpt.from_unit(u)), setup.bounds);
            return bpt.to_unit(to_std(xp.to_vector()));
        },
        [&](const std::vector<double>& u) {
            TxStrategy xt = project_tx(tx_from_std(btx.from_unit(u)), setup.bounds, z.lambda);
            return btx.to_unit(to_std(xt.to_vector()));
        }};
    prob.x0 = {bpt.to_unit(to_std(project_pt(x0_pt, setup.bounds).to_vector())),
               btx.to_unit(to_std(project_tx(x0_tx, setup.bounds, z.lambda).to_vector()))};

    NashResult nash = seek_nash(prob, zo_params);

    EquilibriumResult res;
    res.x_pt = project_pt(pt_from_std(bpt.from_unit(nash.x[0])), setup.bounds);
    res.x_tx = project_tx(tx_from_std(btx.from_unit(nash.x[1])), setup.bounds, z.lambda);
    res.converged = nash.converged;
    res.trace = std::move(nash.trace);
    for (auto& row : res.trace) {
        // Report strategies in natural units.
        row.x = row.player == 0 ? to_std(project_pt(pt_from_std(bpt.from_unit(row.x)),
                                                    setup.bounds)
                                             .to_vector())
                                : to_std(project_tx(tx_from_std(btx.from_unit(row.x)),
                                                    setup.bounds, z.lambda)
                                             .to_vector());
    }

    MultimodalGraph g_final = apply_strategies(tmpl, res.x_pt, res.x_tx, setup.access);
    UEResult final_ue = solve_ue(g_final, demand, ue, nullptr);
    if (!final_ue.stats.converged) ++ue_failures;
    res.flows = std::move(final_ue.flows);
    res.flow_stats = final_ue.stats;
    res.ue_failures = ue_failures;
    return res;
}

MneDataset sample_mne_dataset(const MultimodalGraph& tmpl, const Demand& demand, int n_samples,
                              const MneSamplerConfig& config, uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    config.policy_bounds.check();

    std::vector<std::optional<MneSample>> slots(static_cast<size_t>(n_samples));
    parallel_for(n_samples, config.workers, [&](int i) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(2 * i)));
        const PolicyBounds& pb = config.policy_bounds;
        const StrategyBounds& sb = config.setup.bounds;
        Policy z;
        z.tau_pt = uniform(rng, pb.tau_pt_min, pb.tau_pt_max);
        z.tau_tx = uniform(rng, pb.tau_tx_min, pb.tau_tx_max);
        z.lambda = uniform(rng, 0.0, pb.lambda_max);
        z.sigma_pt = uniform(rng, 0.0, pb.sigma_pt_max);
        z.sigma_tx = uniform(rng, 0.0, pb.sigma_tx_max);
        PtStrategy x0_pt;
        x0_pt.q = uniform(rng, 0.0, sb.q_max);
        x0_pt.p_base = uniform(rng, 0.0, sb.pt_base_max);
        x0_pt.p_d = uniform(rng, 0.0, sb.pt_dist_max);
        x0_pt.p_trans = uniform(rng, 0.0, sb.pt_trans_max);
        x0_pt = project_pt(x0_pt, sb);
        TxStrategy x0_tx;
        x0_tx.w = uniform(rng, 0.0, z.lambda);
        x0_tx.p_base = uniform(rng, 0.0, sb.tx_base_max);
        x0_tx.p_d = uniform(rng, 0.0, sb.tx_dist_max);
        x0_tx.p_t = uniform(rng, 0.0, sb.tx_time_max);
        x0_tx.p_trans = uniform(rng, 0.0, sb.tx_trans_max);
        x0_tx = project_tx(x0_tx, sb, z.lambda);

        ZOParams zo = config.zo;
        zo.seed = derive_seed(seed, static_cast<uint64_t>(2 * i + 1));
        try {
            EquilibriumResult eq =
                seek_mne(tmpl, demand, z, x0_pt, x0_tx, config.ue, zo, config.setup);
            MultimodalGraph g = apply_strategies(tmpl, eq.x_pt, eq.x_tx, config.setup.access);
            MneSample s;
            s.id = i;
            s.z = z;
            s.x_pt = eq.x_pt;
            s.x_tx = eq.x_tx;
            s.j_sw = social_welfare_cost(eq.flows, g);
            s.em_base = taxi_distance_flow(eq.flows, g);
            s.rev_pt = revenue_pt(eq.x_pt, eq.flows, g);
            s.rev_tx = revenue_tx(eq.x_tx, eq.flows, g);
            s.tr21 = transfer_flow(g, eq.flows, Mode::Taxi, Mode::PT);
            s.tr12 = transfer_flow(g, eq.flows, Mode::PT, Mode::Taxi);
            s.j_em = config.municipal.emission_factor * s.em_base;
            s.j_rev = municipal_revenue(z, s.rev_pt, s.rev_tx, s.tr21, s.tr12);
            s.j_total = -config.municipal.omega1 * s.j_sw + config.municipal.omega2 * s.j_em -
                        config.municipal.omega3 * s.j_rev;
            s.converged = eq.flow_stats.converged && eq.ue_failures == 0;
            slots[static_cast<size_t>(i)] = std::move(s);
        } catch (const std::exception&) {
            // Sample skipped; the id sequence in the dataset then has a gap.
        }
    });

    MneDataset ds;
    for (auto& s : slots)
        if (s) ds.samples.push_back(std::move(*s));
    return ds;
}

namespace {

const char* kDatasetHeader =
    "sample_id,tau_pt,tau_tx,lambda,sigma_pt,sigma_tx,"
    "q,pt_base,pt_dist,pt_trans,w,tx_base,tx_dist,tx_time,tx_trans,"
    "j_sw,em_base,rev_pt,rev_tx,tr21,tr12,j_em,j_rev,j_total,converged";

}  // namespace

std::string dataset_to_csv(const MneDataset& ds) {
    std::string out = kDatasetHeader;
    out += "\n";
    for (const MneSample& s : ds.samples) {
        std::vector<double> vals = {s.z.tau_pt,     s.z.tau_tx,   s.z.lambda, s.z.sigma_pt,
                                    s.z.sigma_tx,   s.x_pt.q,     s.x_pt.p_base, s.x_pt.p_d,
                                    s.x_pt.p_trans, s.x_tx.w,     s.x_tx.p_base, s.x_tx.p_d,
                                    s.x_tx.p_t,     s.x_tx.p_trans, s.j_sw,      s.em_base,
                                    s.rev_pt,       s.rev_tx,     s.tr21,     s.tr12,
                                    s.j_em,         s.j_rev,      s.j_total};
        out += std::to_string(s.id);
        for (double v : vals) {
            out += ",";
            out += fmt_double(v);
        }
        out += s.converged ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

MneDataset dataset_from_csv(const std::string& text) {
    MneDataset ds;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("sample_id", 0) == 0) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 25) throw std::invalid_argument("dataset csv: bad row: " + line);
        MneSample s;
        s.id = std::stoi(cells[0]);
        auto d = [&](size_t i) { return std::stod(cells[i]); };
        s.z = Policy{d(1), d(2), d(3), d(4), d(5)};
        s.x_pt = PtStrategy::from_vector({d(6), d(7), d(8), d(9)});
        s.x_tx = TxStrategy::from_vector({d(10), d(11), d(12), d(13), d(14)});
        s.j_sw = d(15);
        s.em_base = d(16);
        s.rev_pt = d(17);
        s.rev_tx = d(18);
        s.tr21 = d(19);
        s.tr12 = d(20);
        s.j_em = d(21);
        s.j_rev = d(22);
        s.j_total = d(23);
        s.converged = cells[24] == "1";
        ds.samples.push_back(s);
    }
    return ds;
}

void save_dataset_file(const MneDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << dataset_to_csv(ds);
}

MneDataset load_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return dataset_from_csv(buf.str());
}

}  // namespace mobgame
