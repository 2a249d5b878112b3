#include "mobgame/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mobgame/rng.hpp"
#include "mobgame/util.hpp"

namespace mobgame {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("scenario: " + what);
}

double num(const json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number()) fail(std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

int integer(const json& j, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number_integer()) fail(std::string(key) + " must be an integer");
    return j.at(key).get<int>();
}

MultimodalGraph parse_network(const json& j, uint64_t seed, const std::string& base_dir) {
    if (!j.is_object()) fail("'network' must be an object");
    if (j.contains("file")) {
        std::filesystem::path p = j.at("file").get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        return load_graph_file(p.string());
    }
    if (j.contains("inline")) return graph_from_json(j.at("inline"));
    std::string gen = j.value("generator", std::string("grid"));
    if (gen != "grid") fail("unknown network generator '" + gen + "'");
    GridParams p;
    const json& pj = j.contains("params") ? j.at("params") : json::object();
    p.block_km = num(pj, "block_km", p.block_km);
    p.walk_kmh = num(pj, "walk_kmh", p.walk_kmh);
    p.taxi_kmh = num(pj, "taxi_kmh", p.taxi_kmh);
    p.pt_kmh = num(pj, "pt_kmh", p.pt_kmh);
    p.pt_dwell_h = num(pj, "pt_dwell_h", p.pt_dwell_h);
    p.taxi_capacity = num(pj, "taxi_capacity", p.taxi_capacity);
    p.pt_row_stride = integer(pj, "pt_row_stride", p.pt_row_stride);
    p.jitter = num(pj, "jitter", p.jitter);
    p.bpr_a = num(pj, "bpr_a", p.bpr_a);
    p.bpr_b = num(pj, "bpr_b", p.bpr_b);
    int rows = integer(j, "rows", 3);
    int cols = integer(j, "cols", 3);
    return build_grid_scenario(rows, cols, p, derive_seed(seed, kStreamNetwork));
}

Demand parse_demand(const json& j, const MultimodalGraph& g, uint64_t seed,
                    const std::string& base_dir) {
    if (!j.is_object()) fail("'demand' must be an object");
    if (j.contains("file")) {
        std::filesystem::path p = j.at("file").get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        return load_demand_file(p.string());
    }
    if (j.contains("inline")) return demand_from_json(j.at("inline"));
    const json& gj = j.contains("generator") ? j.at("generator") : json::object();
    DemandGenParams p;
    if (gj.contains("class_mix")) {
        auto mix = gj.at("class_mix").get<std::vector<double>>();
        if (mix.size() != kNumClasses) fail("class_mix needs 3 entries");
        std::copy(mix.begin(), mix.end(), p.class_mix.begin());
    }
    p.volume_min = num(gj, "volume_min", p.volume_min);
    p.volume_max = num(gj, "volume_max", p.volume_max);
    int n = integer(gj, "n_requests", 10);
    return generate_demand(g, n, p, derive_seed(seed, kStreamDemand));
}

void parse_zo(const json& j, ZOParams& zo) {
    zo.eta = num(j, "eta", zo.eta);
    zo.delta = num(j, "delta", zo.delta);
    zo.iterations = integer(j, "iterations", zo.iterations);
    zo.rounds = integer(j, "rounds", zo.rounds);
    zo.convergence_tol = num(j, "convergence_tol", zo.convergence_tol);
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& base_dir,
                            const std::string& source_text) {
    if (!j.is_object()) fail("top level must be an object");
    Scenario s;
    s.source_text = source_text;
    s.name = j.value("name", std::string("unnamed"));
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
            fail("'seed' must be an integer");
        s.seed = j.at("seed").get<uint64_t>();
    }

    s.network = parse_network(j.contains("network") ? j.at("network") : json::object(), s.seed,
                              base_dir);
    ValidationReport net_rep = validate(s.network);
    if (!net_rep.ok()) fail("network invalid:\n" + net_rep.to_string());

    s.demand = parse_demand(j.contains("demand") ? j.at("demand") : json::object(), s.network,
                            s.seed, base_dir);
    ValidationReport dem_rep = validate_demand(s.demand, s.network);
    if (!dem_rep.ok()) fail("demand invalid:\n" + dem_rep.to_string());
    if (j.contains("demand") && j.at("demand").contains("vot")) {
        auto vot = j.at("demand").at("vot").get<std::vector<double>>();
        if (vot.size() != kNumClasses) fail("vot needs 3 entries");
        for (double v : vot)
            if (!(v > 0.0)) fail("vot entries must be > 0");
        std::copy(vot.begin(), vot.end(), s.ue.vot.gamma.begin());
    }

    const json& oj = j.contains("operators") ? j.at("operators") : json::object();
    if (oj.contains("bounds")) {
        const json& b = oj.at("bounds");
        s.setup.bounds.q_max = num(b, "q_max", s.setup.bounds.q_max);
        s.setup.bounds.pt_base_max = num(b, "pt_base_max", s.setup.bounds.pt_base_max);
        s.setup.bounds.pt_dist_max = num(b, "pt_dist_max", s.setup.bounds.pt_dist_max);
        s.setup.bounds.pt_trans_max = num(b, "pt_trans_max", s.setup.bounds.pt_trans_max);
        s.setup.bounds.tx_base_max = num(b, "tx_base_max", s.setup.bounds.tx_base_max);
        s.setup.bounds.tx_dist_max = num(b, "tx_dist_max", s.setup.bounds.tx_dist_max);
        s.setup.bounds.tx_time_max = num(b, "tx_time_max", s.setup.bounds.tx_time_max);
        s.setup.bounds.tx_trans_max = num(b, "tx_trans_max", s.setup.bounds.tx_trans_max);
    }
    if (oj.contains("costs")) {
        const json& c = oj.at("costs");
        auto parse_unit = [&](const char* key, UnitCosts& u) {
            if (!c.contains(key)) return;
            const json& uj = c.at(key);
            u.per_km = num(uj, "per_km", u.per_km);
            u.per_hour = num(uj, "per_hour", u.per_hour);
            u.per_vehicle = num(uj, "per_vehicle", u.per_vehicle);
        };
        parse_unit("pt", s.setup.costs.pt);
        parse_unit("tx", s.setup.costs.tx);
    }
    if (oj.contains("access")) s.setup.access.kappa = num(oj.at("access"), "kappa", 2.0);
    if (s.setup.access.kappa < 0.0) fail("kappa must be >= 0");

    // Mid-box defaults for the initial strategies.
    const StrategyBounds& sb = s.setup.bounds;
    s.x0_pt = PtStrategy{sb.q_max / 2, sb.pt_base_max / 2, sb.pt_dist_max / 2,
                         std::min(sb.pt_trans_max, sb.pt_base_max) / 2};
    s.x0_tx = TxStrategy{0.0, sb.tx_base_max / 2, sb.tx_dist_max / 2, sb.tx_time_max / 2,
                         std::min(sb.tx_trans_max, sb.tx_base_max) / 2};

    const json& pj = j.contains("policy") ? j.at("policy") : json::object();
    if (pj.contains("bounds")) {
        const json& b = pj.at("bounds");
        s.policy_bounds.tau_pt_min = num(b, "tau_pt_min", s.policy_bounds.tau_pt_min);
        s.policy_bounds.tau_pt_max = num(b, "tau_pt_max", s.policy_bounds.tau_pt_max);
        s.policy_bounds.tau_tx_min = num(b, "tau_tx_min", s.policy_bounds.tau_tx_min);
        s.policy_bounds.tau_tx_max = num(b, "tau_tx_max", s.policy_bounds.tau_tx_max);
        s.policy_bounds.lambda_max = num(b, "lambda_max", s.policy_bounds.lambda_max);
        s.policy_bounds.sigma_pt_max = num(b, "sigma_pt_max", s.policy_bounds.sigma_pt_max);
        s.policy_bounds.sigma_tx_max = num(b, "sigma_tx_max", s.policy_bounds.sigma_tx_max);
    }
    s.policy_bounds.check();
    if (pj.contains("municipal")) {
        const json& m = pj.at("municipal");
        s.municipal.omega1 = num(m, "omega1", s.municipal.omega1);
        s.municipal.omega2 = num(m, "omega2", s.municipal.omega2);
        s.municipal.omega3 = num(m, "omega3", s.municipal.omega3);
        s.municipal.emission_factor = num(m, "emission_factor", s.municipal.emission_factor);
        if (s.municipal.emission_factor < 0.0) fail("emission_factor must be >= 0");
    }
    s.z0 = Policy{0.0, 0.0, s.policy_bounds.lambda_max, 0.0, 0.0};
    if (pj.contains("initial")) {
        const json& b = pj.at("initial");
        s.z0.tau_pt = num(b, "tau_pt", s.z0.tau_pt);
        s.z0.tau_tx = num(b, "tau_tx", s.z0.tau_tx);
        s.z0.lambda = num(b, "lambda", s.z0.lambda);
        s.z0.sigma_pt = num(b, "sigma_pt", s.z0.sigma_pt);
        s.z0.sigma_tx = num(b, "sigma_tx", s.z0.sigma_tx);
    }
    if (!policy_feasible(s.z0, s.policy_bounds)) fail("initial policy violates the policy bounds");

    // Default taxi fleet: half the initial license cap.
    s.x0_tx.w = s.z0.lambda / 2;
    if (oj.contains("initial")) {
        const json& ij = oj.at("initial");
        if (ij.contains("pt")) {
            const json& b = ij.at("pt");
            s.x0_pt.q = num(b, "q", s.x0_pt.q);
            s.x0_pt.p_base = num(b, "p_base", s.x0_pt.p_base);
            s.x0_pt.p_d = num(b, "p_d", s.x0_pt.p_d);
            s.x0_pt.p_trans = num(b, "p_trans", s.x0_pt.p_trans);
        }
        if (ij.contains("tx")) {
            const json& b = ij.at("tx");
            s.x0_tx.w = num(b, "w", s.x0_tx.w);
            s.x0_tx.p_base = num(b, "p_base", s.x0_tx.p_base);
            s.x0_tx.p_d = num(b, "p_d", s.x0_tx.p_d);
            s.x0_tx.p_t = num(b, "p_t", s.x0_tx.p_t);
            s.x0_tx.p_trans = num(b, "p_trans", s.x0_tx.p_trans);
        }
    }
    if (!pt_feasible(s.x0_pt, sb)) fail("initial PT strategy violates its bounds");
    if (!tx_feasible(s.x0_tx, sb, s.z0.lambda))
        fail("initial taxi strategy violates its bounds (check the license cap)");

    const json& sj = j.contains("solver") ? j.at("solver") : json::object();
    if (sj.contains("ue")) {
        const json& u = sj.at("ue");
        s.ue.epsilon = num(u, "epsilon", s.ue.epsilon);
        s.ue.max_iterations = integer(u, "max_iterations", s.ue.max_iterations);
        s.ue.line_search_tol = num(u, "line_search_tol", s.ue.line_search_tol);
        if (!(s.ue.epsilon >= 0.0)) fail("ue.epsilon must be >= 0");
        if (s.ue.max_iterations < 1) fail("ue.max_iterations must be >= 1");
    }
    s.zo_policy.iterations = 300;
    s.zo_policy.eta = 0.1;
    s.zo_policy.delta = 0.05;
    if (sj.contains("zo_mne")) parse_zo(sj.at("zo_mne"), s.zo_mne);
    if (sj.contains("zo_policy")) parse_zo(sj.at("zo_policy"), s.zo_policy);
    s.zo_mne.check();
    s.zo_policy.check();
    if (sj.contains("ga")) {
        const json& g = sj.at("ga");
        s.ga.population = integer(g, "population", s.ga.population);
        s.ga.generations = integer(g, "generations", s.ga.generations);
        s.ga.crossover_rate = num(g, "crossover_rate", s.ga.crossover_rate);
        s.ga.mutation_rate = num(g, "mutation_rate", s.ga.mutation_rate);
        s.ga.mutation_scale = num(g, "mutation_scale", s.ga.mutation_scale);
        s.ga.check();
    }
    s.budget = integer(sj, "budget", s.budget);
    if (s.budget < 1) fail("budget must be >= 1");
    s.dataset_samples = integer(sj, "dataset_samples", s.dataset_samples);
    if (s.dataset_samples < 1) fail("dataset_samples must be >= 1");
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("scenario: " + path + " is not valid JSON: " + e.what());
    }
    std::string dir = std::filesystem::path(path).parent_path().string();
    if (dir.empty()) dir = ".";
    return scenario_from_json(j, dir, buf.str());
}

uint64_t scenario_hash(const Scenario& s) {
    if (!s.source_text.empty()) return fnv1a64(s.source_text);
    return fnv1a64(s.name);
}

std::string meta_header(const Scenario& s, uint64_t run_seed) {
    std::string out;
    out += "# artifact_version=";
    out += kArtifactVersion;
    out += "\n# scenario=" + s.name;
    out += "\n# scenario_hash=" + hex64(scenario_hash(s));
    out += "\n# seed=" + std::to_string(run_seed);
    out += "\n";
    return out;
}

std::string flows_csv(const MultimodalGraph& g, const FlowState& flows) {
    std::vector<double> times = edge_travel_times(g, flows.totals());
    std::string out = "edge_id,class,flow,time,price\n";
    for (int e = 0; e < g.num_edges(); ++e) {
        for (int n = 0; n < flows.num_classes(); ++n) {
            out += std::to_string(e);
            out += ",";
            out += to_string(static_cast<UserClassId>(n));
            out += ",";
            out += fmt_double(flows.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)]);
            out += ",";
            out += fmt_double(times[static_cast<size_t>(e)]);
            out += ",";
            out += fmt_double(g.edge(e).label.price);
            out += "\n";
        }
    }
    return out;
}

std::string ue_trace_csv(const std::vector<TraceRow>& trace) {
    std::string out = "iteration,beckmann,tstc,sptc,rel_gap,alpha\n";
    for (const TraceRow& r : trace) {
        out += std::to_string(r.iteration);
        out += "," + fmt_double(r.beckmann);
        out += "," + fmt_double(r.tstc);
        out += "," + fmt_double(r.sptc);
        out += "," + fmt_double(r.rel_gap);
        out += "," + fmt_double(r.alpha);
        out += "\n";
    }
    return out;
}

std::string nash_trace_csv(const std::vector<NashTraceRow>& trace) {
    std::string out = "round,iteration,operator,x0,x1,x2,x3,x4,f_plus,f_minus,ok\n";
    for (const NashTraceRow& r : trace) {
        out += std::to_string(r.round);
        out += "," + std::to_string(r.iteration);
        out += ",";
        out += (r.player == 0 ? "pt" : "tx");
        for (size_t i = 0; i < 5; ++i) {
            out += ",";
            if (i < r.x.size()) out += fmt_double(r.x[i]);
        }
        out += "," + fmt_double(r.f_plus);
        out += "," + fmt_double(r.f_minus);
        out += r.ok ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

std::string policy_trace_csv(const PolicyTrace& trace) {
    std::string out =
        "iteration,tau_pt,tau_tx,lambda,sigma_pt,sigma_tx,j_plus,j_minus,j_best,ok,evaluator,"
        "wallclock_ms,method\n";
    for (const PolicyTraceRow& r : trace.rows) {
        out += std::to_string(r.iteration);
        for (double v : r.z.to_vector()) out += "," + fmt_double(v);
        out += "," + fmt_double(r.j_plus);
        out += "," + fmt_double(r.j_minus);
        out += "," + fmt_double(r.j_best);
        out += r.ok ? ",1" : ",0";
        out += "," + trace.evaluator;
        out += ",0";  // wallclock is reported on stdout to keep files reproducible
        out += "," + trace.method;
        out += "\n";
    }
    return out;
}

nlohmann::json gap_stats_to_json(const GapStats& s) {
    return json{{"converged", s.converged},
                {"iterations", s.iterations},
                {"rel_gap", s.rel_gap},
                {"sptc", s.sptc},
                {"tstc", s.tstc}};
}

nlohmann::json policy_to_json(const Policy& z) {
    return json{{"lambda", z.lambda},
                {"sigma_pt", z.sigma_pt},
                {"sigma_tx", z.sigma_tx},
                {"tau_pt", z.tau_pt},
                {"tau_tx", z.tau_tx}};
}

Policy policy_from_json(const json& j) {
    Policy z;
    z.tau_pt = num(j, "tau_pt", z.tau_pt);
    z.tau_tx = num(j, "tau_tx", z.tau_tx);
    z.lambda = num(j, "lambda", z.lambda);
    z.sigma_pt = num(j, "sigma_pt", z.sigma_pt);
    z.sigma_tx = num(j, "sigma_tx", z.sigma_tx);
    return z;
}

nlohmann::json pt_strategy_to_json(const PtStrategy& x) {
    return json{{"p_base", x.p_base}, {"p_d", x.p_d}, {"p_trans", x.p_trans}, {"q", x.q}};
}

nlohmann::json tx_strategy_to_json(const TxStrategy& x) {
    return json{{"p_base", x.p_base},
                {"p_d", x.p_d},
                {"p_t", x.p_t},
                {"p_trans", x.p_trans},
                {"w", x.w}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << content;
}

}  // namespace mobgame
