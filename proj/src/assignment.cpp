#include "mobgame/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "mobgame/util.hpp"

namespace mobgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of the edge travel-time function from 0 to y.
double edge_time_integral(const EdgeLabel& lb, const EdgeKind& kind, double y) {
    if (y <= 0.0) return 0.0;
    double base = (lb.fixed_time + lb.freeflow_time) * y;
    if (kind.is_service(Mode::Taxi) && lb.freeflow_time > 0.0 && lb.bpr_a > 0.0) {
        if (lb.capacity <= 0.0) return kInf;
        base += lb.freeflow_time * lb.bpr_a * lb.capacity *
                std::pow(y / lb.capacity, lb.bpr_b + 1.0) / (lb.bpr_b + 1.0);
    }
    return base;
}

struct DijkstraResult {
    std::vector<double> dist;
    std::vector<int> pred_edge;  // incoming edge on the shortest path, -1 at origin
};

// Deterministic Dijkstra on generalized cost for one traveler class: strict
// improvement plus ascending-edge-id relaxation fixes tie-breaking.
DijkstraResult dijkstra(const MultimodalGraph& g, const std::vector<double>& times,
                        UserClassId cls, const ValueOfTime& vot, int origin) {
    const int n = g.num_vertices();
    DijkstraResult res;
    res.dist.assign(static_cast<size_t>(n), kInf);
    res.pred_edge.assign(static_cast<size_t>(n), -1);
    res.dist[static_cast<size_t>(origin)] = 0.0;

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, origin});
    while (!pq.empty()) {
        auto [du, u] = pq.top();
        pq.pop();
        if (du > res.dist[static_cast<size_t>(u)]) continue;
        for (int eid : g.out_edges(u)) {
            const Edge& e = g.edge(eid);
            double w = generalized_cost(e.label, times[static_cast<size_t>(eid)], cls, vot);
            if (!(w < kInf)) continue;
            double cand = du + w;
            if (cand < res.dist[static_cast<size_t>(e.head)]) {
                res.dist[static_cast<size_t>(e.head)] = cand;
                res.pred_edge[static_cast<size_t>(e.head)] = eid;
                pq.push({cand, e.head});
            }
        }
    }
    return res;
}

std::vector<int> reconstruct_path(const MultimodalGraph& g, const DijkstraResult& dj, int origin,
                                  int destination) {
    std::vector<int> edges;
    int v = destination;
    while (v != origin) {
        int eid = dj.pred_edge[static_cast<size_t>(v)];
        if (eid < 0) throw std::runtime_error("no path to reconstruct");
        edges.push_back(eid);
        v = g.edge(eid).tail;
    }
    std::reverse(edges.begin(), edges.end());
    return edges;
}

struct AonPaths {
    // One entry per request, in request order.
    std::vector<std::vector<int>> paths;
    std::vector<double> dists;
};

AonPaths aon_paths(const MultimodalGraph& g, const std::vector<double>& times, const Demand& d,
                   const ValueOfTime& vot, int workers) {
    AonPaths out;
    out.paths.resize(d.requests.size());
    out.dists.assign(d.requests.size(), 0.0);

    // Group requests sharing (class, origin) into one Dijkstra run each.
    std::map<std::pair<int, int>, std::vector<int>> group_map;
    for (size_t i = 0; i < d.requests.size(); ++i) {
        const Request& r = d.requests[i];
        group_map[{static_cast<int>(r.cls), r.origin}].push_back(static_cast<int>(i));
    }
    std::vector<std::pair<std::pair<int, int>, std::vector<int>>> groups(group_map.begin(),
                                                                         group_map.end());
    parallel_for(static_cast<int>(groups.size()), workers, [&](int gi) {
        const auto& [key, members] = groups[static_cast<size_t>(gi)];
        auto cls = static_cast<UserClassId>(key.first);
        DijkstraResult dj = dijkstra(g, times, cls, vot, key.second);
        for (int ri : members) {
            const Request& r = d.requests[static_cast<size_t>(ri)];
            double dist = dj.dist[static_cast<size_t>(r.destination)];
            if (!(dist < kInf))
                throw std::runtime_error("request " + std::to_string(ri) +
                                         ": destination unreachable at finite cost");
            out.dists[static_cast<size_t>(ri)] = dist;
            out.paths[static_cast<size_t>(ri)] = reconstruct_path(g, dj, key.second, r.destination);
        }
    });
    return out;
}

double total_system_cost(const MultimodalGraph& g, const FlowState& flows,
                         const std::vector<double>& times, const ValueOfTime& vot) {
    double cost = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        double y = flows.total(e);
        if (y <= 0.0) continue;
        cost += times[static_cast<size_t>(e)] * y;
        for (int n = 0; n < flows.num_classes(); ++n) {
            double yn = flows.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)];
            if (yn <= 0.0) continue;
            cost += yn * g.edge(e).label.price / vot.of(static_cast<UserClassId>(n));
        }
    }
    return cost;
}

double relative_gap(double tstc, double sptc) {
    if (sptc <= 0.0) return tstc <= 0.0 ? 0.0 : kInf;
    return tstc / sptc - 1.0;
}

using PathKey = std::tuple<int, int, int, std::vector<int>>;

std::vector<PathFlow> materialize_paths(const std::map<PathKey, double>& acc) {
    std::vector<PathFlow> out;
    for (const auto& [key, flow] : acc) {
        if (flow <= 1e-12) continue;
        PathFlow pf;
        pf.cls = static_cast<UserClassId>(std::get<0>(key));
        pf.origin = std::get<1>(key);
        pf.destination = std::get<2>(key);
        pf.edges = std::get<3>(key);
        pf.flow = flow;
        out.push_back(std::move(pf));
    }
    return out;
}

}  // namespace

FlowState FlowState::zeros(int n_classes, int n_edges) {
    FlowState fs;
    fs.by_class.assign(static_cast<size_t>(n_classes),
                       std::vector<double>(static_cast<size_t>(n_edges), 0.0));
    return fs;
}

double FlowState::total(int e) const {
    double t = 0.0;
    for (const auto& row : by_class) t += row[static_cast<size_t>(e)];
    return t;
}

std::vector<double> FlowState::totals() const {
    std::vector<double> t(static_cast<size_t>(num_edges()), 0.0);
    for (const auto& row : by_class)
        for (size_t e = 0; e < row.size(); ++e) t[e] += row[e];
    return t;
}

double edge_travel_time(const EdgeLabel& label, const EdgeKind& kind, double y) {
    if (!kind.is_service(Mode::Taxi)) return label.fixed_time + label.freeflow_time;
    if (label.freeflow_time <= 0.0 || label.bpr_a <= 0.0 || y <= 0.0)
        return label.fixed_time + label.freeflow_time;
    if (label.capacity <= 0.0) return kInf;
    return label.fixed_time +
           label.freeflow_time * (1.0 + label.bpr_a * std::pow(y / label.capacity, label.bpr_b));
}

std::vector<double> edge_travel_times(const MultimodalGraph& g,
                                      const std::vector<double>& totals) {
    std::vector<double> times(static_cast<size_t>(g.num_edges()), 0.0);
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        times[static_cast<size_t>(e)] =
            edge_travel_time(ed.label, ed.kind, totals[static_cast<size_t>(e)]);
    }
    return times;
}

double generalized_cost(const EdgeLabel& label, double t, UserClassId cls,
                        const ValueOfTime& vot) {
    return t + label.price / vot.of(cls);
}

FlowState shortest_path_assignment(const MultimodalGraph& g, const std::vector<double>& times,
                                   const Demand& d, const ValueOfTime& vot, double* total_cost,
                                   int workers) {
    if (static_cast<int>(times.size()) != g.num_edges())
        throw std::invalid_argument("times size does not match edge count");
    AonPaths ap = aon_paths(g, times, d, vot, workers);
    FlowState fs = FlowState::zeros(kNumClasses, g.num_edges());
    double cost = 0.0;
    for (size_t i = 0; i < d.requests.size(); ++i) {
        const Request& r = d.requests[i];
        auto& row = fs.by_class[static_cast<size_t>(r.cls)];
        for (int eid : ap.paths[i]) row[static_cast<size_t>(eid)] += r.volume;
        cost += r.volume * ap.dists[i];
    }
    if (total_cost) *total_cost = cost;
    return fs;
}

double beckmann_objective(const MultimodalGraph& g, const FlowState& flows,
                          const ValueOfTime& vot) {
    if (flows.num_edges() != g.num_edges())
        throw std::invalid_argument("flow state does not match edge count");
    double obj = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        obj += edge_time_integral(ed.label, ed.kind, flows.total(e));
        for (int n = 0; n < flows.num_classes(); ++n) {
            double yn = flows.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)];
            if (yn <= 0.0) continue;
            obj += yn * ed.label.price / vot.of(static_cast<UserClassId>(n));
        }
    }
    return obj;
}

double find_alpha(const MultimodalGraph& g, const FlowState& current, const FlowState& target,
                  const ValueOfTime& vot, double tol) {
    const int E = g.num_edges();
    std::vector<double> cur = current.totals();
    std::vector<double> tgt = target.totals();
    double money_slope = 0.0;
    for (int n = 0; n < current.num_classes(); ++n) {
        double gamma = vot.of(static_cast<UserClassId>(n));
        for (int e = 0; e < E; ++e) {
            double dn = target.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)] -
                        current.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)];
            if (dn != 0.0) money_slope += dn * g.edge(e).label.price / gamma;
        }
    }
    auto deriv = [&](double alpha) {
        double s = money_slope;
        for (int e = 0; e < E; ++e) {
            double dy = tgt[static_cast<size_t>(e)] - cur[static_cast<size_t>(e)];
            if (dy == 0.0) continue;
            const Edge& ed = g.edge(e);
            double y = cur[static_cast<size_t>(e)] + alpha * dy;
            s += dy * edge_travel_time(ed.label, ed.kind, y);
        }
        return s;
    };
    if (deriv(0.0) >= 0.0) return 0.0;
    if (deriv(1.0) <= 0.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (deriv(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

UEResult solve_ue(const MultimodalGraph& g, const Demand& d, const UESolverParams& params,
                  const FlowState* warm_start) {
    if (params.epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    if (params.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (params.track_paths && warm_start)
        throw std::invalid_argument("track_paths cannot reconstruct warm-start paths");

    UEResult res;
    std::map<PathKey, double> path_acc;

    if (warm_start) {
        if (warm_start->num_edges() != g.num_edges() || warm_start->num_classes() != kNumClasses)
            throw std::invalid_argument("warm start does not match graph/class shape");
        res.flows = *warm_start;
    } else {
        std::vector<double> t0 =
            edge_travel_times(g, std::vector<double>(static_cast<size_t>(g.num_edges()), 0.0));
        AonPaths ap = aon_paths(g, t0, d, params.vot, params.workers);
        res.flows = FlowState::zeros(kNumClasses, g.num_edges());
        for (size_t i = 0; i < d.requests.size(); ++i) {
            const Request& r = d.requests[i];
            auto& row = res.flows.by_class[static_cast<size_t>(r.cls)];
            for (int eid : ap.paths[i]) row[static_cast<size_t>(eid)] += r.volume;
            if (params.track_paths)
                path_acc[{static_cast<int>(r.cls), r.origin, r.destination, ap.paths[i]}] +=
                    r.volume;
        }
    }

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        std::vector<double> times = edge_travel_times(g, res.flows.totals());
        AonPaths ap = aon_paths(g, times, d, params.vot, params.workers);
        FlowState target = FlowState::zeros(kNumClasses, g.num_edges());
        double sptc = 0.0;
        for (size_t i = 0; i < d.requests.size(); ++i) {
            const Request& r = d.requests[i];
            auto& row = target.by_class[static_cast<size_t>(r.cls)];
            for (int eid : ap.paths[i]) row[static_cast<size_t>(eid)] += r.volume;
            sptc += r.volume * ap.dists[i];
        }
        double tstc = total_system_cost(g, res.flows, times, params.vot);
        double gap = relative_gap(tstc, sptc);
        double beck = beckmann_objective(g, res.flows, params.vot);

        if (gap <= params.epsilon) {
            res.trace.push_back({iter, beck, tstc, sptc, gap, 0.0});
            res.stats = {tstc, sptc, gap, iter + 1, true};
            break;
        }
        double alpha = find_alpha(g, res.flows, target, params.vot, params.line_search_tol);
        res.trace.push_back({iter, beck, tstc, sptc, gap, alpha});
        for (int n = 0; n < kNumClasses; ++n)
            for (int e = 0; e < g.num_edges(); ++e) {
                auto& cur = res.flows.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)];
                cur += alpha * (target.by_class[static_cast<size_t>(n)][static_cast<size_t>(e)] -
                                cur);
            }
        if (params.track_paths) {
            for (auto& [key, flow] : path_acc) flow *= (1.0 - alpha);
            for (size_t i = 0; i < d.requests.size(); ++i) {
                const Request& r = d.requests[i];
                path_acc[{static_cast<int>(r.cls), r.origin, r.destination, ap.paths[i]}] +=
                    alpha * r.volume;
            }
        }
        res.stats = {tstc, sptc, gap, iter + 1, false};
    }
    if (params.track_paths) res.path_flows = materialize_paths(path_acc);
    return res;
}

std::vector<std::vector<int>> enumerate_simple_paths(const MultimodalGraph& g, int origin,
                                                     int destination, int max_paths) {
    if (origin == destination) throw std::invalid_argument("origin equals destination");
    std::vector<std::vector<int>> paths;
    std::vector<char> visited(static_cast<size_t>(g.num_vertices()), 0);
    std::vector<int> stack;
    // Iterative DFS over out-edges in ascending id order yields lexicographic
    // path order.
    std::function<void(int)> dfs = [&](int v) {
        if (v == destination) {
            paths.push_back(stack);
            if (static_cast<int>(paths.size()) > max_paths)
                throw std::runtime_error("more than " + std::to_string(max_paths) +
                                         " simple paths; refusing to enumerate");
            return;
        }
        visited[static_cast<size_t>(v)] = 1;
        for (int eid : g.out_edges(v)) {
            int h = g.edge(eid).head;
            if (visited[static_cast<size_t>(h)]) continue;
            stack.push_back(eid);
            dfs(h);
            stack.pop_back();
        }
        visited[static_cast<size_t>(v)] = 0;
    };
    dfs(origin);
    return paths;
}

UEResult brute_force_ue(const MultimodalGraph& g, const Demand& d, double grid, int max_paths,
                        const ValueOfTime& vot) {
    if (grid <= 0.0 || grid > 1.0) throw std::invalid_argument("grid must be in (0, 1]");
    const int E = g.num_edges();

    struct ReqState {
        std::vector<std::vector<int>> paths;
        std::vector<double> h;  // flow per path
    };
    std::vector<ReqState> reqs(d.requests.size());
    FlowState flows = FlowState::zeros(kNumClasses, E);
    std::vector<double> totals(static_cast<size_t>(E), 0.0);

    for (size_t i = 0; i < d.requests.size(); ++i) {
        const Request& r = d.requests[i];
        reqs[i].paths = enumerate_simple_paths(g, r.origin, r.destination, max_paths);
        if (reqs[i].paths.empty())
            throw std::runtime_error("request " + std::to_string(i) + ": no path");
        reqs[i].h.assign(reqs[i].paths.size(), 0.0);
        reqs[i].h[0] = r.volume;
        auto& row = flows.by_class[static_cast<size_t>(r.cls)];
        for (int eid : reqs[i].paths[0]) {
            row[static_cast<size_t>(eid)] += r.volume;
            totals[static_cast<size_t>(eid)] += r.volume;
        }
    }

    auto path_cost = [&](const std::vector<int>& path, UserClassId cls) {
        double c = 0.0;
        for (int eid : path) {
            const Edge& ed = g.edge(eid);
            c += generalized_cost(ed.label, edge_travel_time(ed.label, ed.kind,
                                                             totals[static_cast<size_t>(eid)]),
                                  cls, vot);
        }
        return c;
    };
    auto path_price = [&](const std::vector<int>& path) {
        double c = 0.0;
        for (int eid : path) c += g.edge(eid).label.price;
        return c;
    };
    // Beckmann change for shifting delta>0 from path `from` to path `to`.
    auto beckmann_delta = [&](const std::vector<int>& from, const std::vector<int>& to,
                              double delta, UserClassId cls) {
        std::map<int, double> net;
        for (int eid : to) net[eid] += delta;
        for (int eid : from) net[eid] -= delta;
        double db = 0.0;
        for (const auto& [eid, dy] : net) {
            if (dy == 0.0) continue;
            const Edge& ed = g.edge(eid);
            double y = totals[static_cast<size_t>(eid)];
            db += edge_time_integral(ed.label, ed.kind, y + dy) -
                  edge_time_integral(ed.label, ed.kind, y);
        }
        db += delta * (path_price(to) - path_price(from)) / vot.of(cls);
        return db;
    };
    auto apply_shift = [&](size_t ri, size_t from, size_t to, double delta) {
        auto& rs = reqs[ri];
        const Request& r = d.requests[ri];
        auto& row = flows.by_class[static_cast<size_t>(r.cls)];
        rs.h[from] -= delta;
        rs.h[to] += delta;
        for (int eid : rs.paths[from]) {
            row[static_cast<size_t>(eid)] -= delta;
            totals[static_cast<size_t>(eid)] -= delta;
        }
        for (int eid : rs.paths[to]) {
            row[static_cast<size_t>(eid)] += delta;
            totals[static_cast<size_t>(eid)] += delta;
        }
    };

    const int max_sweeps = 20000;
    bool settled = false;
    for (int sweep = 0; sweep < max_sweeps && !settled; ++sweep) {
        bool moved = false;
        for (size_t ri = 0; ri < reqs.size(); ++ri) {
            auto& rs = reqs[ri];
            const Request& r = d.requests[ri];
            size_t p_min = 0, p_max = rs.paths.size();
            double c_min = kInf, c_max = -kInf;
            std::vector<double> costs(rs.paths.size());
            for (size_t p = 0; p < rs.paths.size(); ++p) {
                costs[p] = path_cost(rs.paths[p], r.cls);
                if (costs[p] < c_min) {
                    c_min = costs[p];
                    p_min = p;
                }
                if (rs.h[p] > 1e-12 && costs[p] > c_max) {
                    c_max = costs[p];
                    p_max = p;
                }
            }
            if (p_max >= rs.paths.size() || p_max == p_min) continue;
            if (c_max - c_min <= 1e-9 * std::max(1.0, c_min)) continue;
            double delta = std::min(grid * r.volume, rs.h[p_max]);
            for (int halve = 0; halve < 40 && delta > 0.0; ++halve) {
                if (beckmann_delta(rs.paths[p_max], rs.paths[p_min], delta, r.cls) < -1e-14) {
                    apply_shift(ri, p_max, p_min, delta);
                    moved = true;
                    break;
                }
                delta *= 0.5;
            }
        }
        if (!moved) settled = true;
    }

    UEResult res;
    res.flows = flows;
    std::vector<double> times = edge_travel_times(g, totals);
    double sptc = 0.0;
    shortest_path_assignment(g, times, d, vot, &sptc, 1);
    double tstc = total_system_cost(g, flows, times, vot);
    double gap = relative_gap(tstc, sptc);
    res.stats = {tstc, sptc, gap, 0, settled};
    res.trace.push_back({0, beckmann_objective(g, flows, vot), tstc, sptc, gap, 0.0});
    for (size_t ri = 0; ri < reqs.size(); ++ri) {
        const Request& r = d.requests[ri];
        for (size_t p = 0; p < reqs[ri].paths.size(); ++p) {
            if (reqs[ri].h[p] <= 1e-12) continue;
            res.path_flows.push_back(
                {r.cls, r.origin, r.destination, reqs[ri].paths[p], reqs[ri].h[p]});
        }
    }
    return res;
}

}  // namespace mobgame
