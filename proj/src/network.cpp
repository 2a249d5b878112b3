#include "mobgame/network.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mobgame/rng.hpp"

namespace mobgame {

const char* to_string(Mode m) {
    switch (m) {
        case Mode::PT: return "pt";
        case Mode::Taxi: return "taxi";
        case Mode::Walk: return "walk";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    if (s == "pt") return Mode::PT;
    if (s == "taxi") return Mode::Taxi;
    if (s == "walk") return Mode::Walk;
    throw std::invalid_argument("unknown mode: " + s);
}

std::string to_string(const EdgeKind& k) {
    if (!k.transfer) return std::string("service:") + to_string(k.from);
    return std::string("transfer:") + to_string(k.from) + ":" + to_string(k.to);
}

EdgeKind edge_kind_from_string(const std::string& s) {
    if (s.rfind("service:", 0) == 0) return EdgeKind::service(mode_from_string(s.substr(8)));
    if (s.rfind("transfer:", 0) == 0) {
        const auto rest = s.substr(9);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("bad edge kind: " + s);
        return EdgeKind::make_transfer(mode_from_string(rest.substr(0, colon)),
                                       mode_from_string(rest.substr(colon + 1)));
    }
    throw std::invalid_argument("bad edge kind: " + s);
}

int MultimodalGraph::add_vertex(Mode mode, double x, double y) {
    const int id = num_vertices();
    vertices_.push_back(Vertex{id, mode, x, y});
    out_.emplace_back();
    return id;
}

int MultimodalGraph::add_edge(int tail, int head, EdgeKind kind, EdgeLabel label) {
    if (tail < 0 || tail >= num_vertices() || head < 0 || head >= num_vertices())
        throw std::invalid_argument("add_edge: vertex id out of range");
    const int id = num_edges();
    edges_.push_back(Edge{id, tail, head, kind, label});
    out_[static_cast<size_t>(tail)].push_back(id);  // ids ascend, so lists stay sorted
    return id;
}

std::vector<int> MultimodalGraph::vertices_of(Mode m) const {
    std::vector<int> ids;
    for (const auto& v : vertices_)
        if (v.mode == m) ids.push_back(v.id);
    return ids;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.what;
        if (v.edge_id >= 0) os << " (edge " << v.edge_id << ")";
        if (v.vertex_id >= 0) os << " (vertex " << v.vertex_id << ")";
        os << "\n";
    }
    return os.str();
}

namespace {

void check_grid_params(const GridParams& p) {
    if (p.block_km <= 0) throw std::invalid_argument("grid params: block_km must be positive");
    if (p.walk_kmh <= 0 || p.taxi_kmh <= 0 || p.pt_kmh <= 0)
        throw std::invalid_argument("grid params: speeds must be positive");
    if (p.taxi_capacity <= 0) throw std::invalid_argument("grid params: taxi_capacity must be positive");
    if (p.pt_dwell_h < 0) throw std::invalid_argument("grid params: pt_dwell_h must be non-negative");
    if (p.jitter < 0 || p.jitter >= 1) throw std::invalid_argument("grid params: jitter must be in [0,1)");
    if (p.bpr_a < 0 || p.bpr_b < 0) throw std::invalid_argument("grid params: BPR parameters must be non-negative");
}

}  // namespace

MultimodalGraph build_grid_scenario(int rows, int cols, const GridParams& params, uint64_t seed) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid: rows and cols must be >= 1");
    check_grid_params(params);

    std::mt19937_64 rng(splitmix64(seed));
    auto jittered = [&](double v) {
        if (params.jitter == 0.0) return v;
        return v * (1.0 + params.jitter * (2.0 * uniform01(rng) - 1.0));
    };

    MultimodalGraph g;
    const int n = rows * cols;
    auto cell = [&](int r, int c) { return r * cols + c; };

    std::vector<int> walk_id(static_cast<size_t>(n));
    std::vector<int> taxi_id(static_cast<size_t>(n));
    std::vector<int> pt_id(static_cast<size_t>(n), -1);

    const bool pt_enabled = params.pt_row_stride > 0 && cols >= 2;
    auto pt_row = [&](int r) { return pt_enabled && (r % params.pt_row_stride == 0); };

    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            walk_id[static_cast<size_t>(cell(r, c))] =
                g.add_vertex(Mode::Walk, c * params.block_km, r * params.block_km);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            taxi_id[static_cast<size_t>(cell(r, c))] =
                g.add_vertex(Mode::Taxi, c * params.block_km, r * params.block_km);
    for (int r = 0; r < rows; ++r)
        if (pt_row(r))
            for (int c = 0; c < cols; ++c)
                pt_id[static_cast<size_t>(cell(r, c))] =
                    g.add_vertex(Mode::PT, c * params.block_km, r * params.block_km);

    auto service_label = [&](double dist, double kmh, double dwell, double cap) {
        EdgeLabel l;
        l.distance = dist;
        l.freeflow_time = dist / kmh;
        l.fixed_time = dwell;
        l.capacity = cap;
        l.bpr_a = params.bpr_a;
        l.bpr_b = params.bpr_b;
        return l;
    };

    // Walk and taxi layers mirror the same road grid (4-neighborhood).
    auto add_pair = [&](Mode m, int a, int b, const EdgeLabel& l) {
        g.add_edge(a, b, EdgeKind::service(m), l);
        g.add_edge(b, a, EdgeKind::service(m), l);
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                const double d = jittered(params.block_km);
                add_pair(Mode::Walk, walk_id[static_cast<size_t>(cell(r, c))],
                         walk_id[static_cast<size_t>(cell(r, c + 1))],
                         service_label(d, params.walk_kmh, 0.0, 0.0));
            }
            if (r + 1 < rows) {
                const double d = jittered(params.block_km);
                add_pair(Mode::Walk, walk_id[static_cast<size_t>(cell(r, c))],
                         walk_id[static_cast<size_t>(cell(r + 1, c))],
                         service_label(d, params.walk_kmh, 0.0, 0.0));
            }
        }
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                const double d = jittered(params.block_km);
                const double cap = jittered(params.taxi_capacity);
                add_pair(Mode::Taxi, taxi_id[static_cast<size_t>(cell(r, c))],
                         taxi_id[static_cast<size_t>(cell(r, c + 1))],
                         service_label(d, params.taxi_kmh, 0.0, cap));
            }
            if (r + 1 < rows) {
                const double d = jittered(params.block_km);
                const double cap = jittered(params.taxi_capacity);
                add_pair(Mode::Taxi, taxi_id[static_cast<size_t>(cell(r, c))],
                         taxi_id[static_cast<size_t>(cell(r + 1, c))],
                         service_label(d, params.taxi_kmh, 0.0, cap));
            }
        }
    }
    // PT corridors run along selected rows.
    for (int r = 0; r < rows; ++r) {
        if (!pt_row(r)) continue;
        for (int c = 0; c + 1 < cols; ++c) {
            const double d = jittered(params.block_km);
            add_pair(Mode::PT, pt_id[static_cast<size_t>(cell(r, c))],
                     pt_id[static_cast<size_t>(cell(r, c + 1))],
                     service_label(d, params.pt_kmh, params.pt_dwell_h, 0.0));
        }
    }

    // Co-located transfer stacks. Prices and waiting times are filled in
    // later when operator strategies are applied; transfers into the walk
    // layer stay at zero for good.
    EdgeLabel tr;  // distance 0, price 0, times 0
    for (int i = 0; i < n; ++i) {
        const int w = walk_id[static_cast<size_t>(i)];
        const int x = taxi_id[static_cast<size_t>(i)];
        const int p = pt_id[static_cast<size_t>(i)];
        g.add_edge(w, x, EdgeKind::make_transfer(Mode::Walk, Mode::Taxi), tr);
        g.add_edge(x, w, EdgeKind::make_transfer(Mode::Taxi, Mode::Walk), tr);
        if (p >= 0) {
            g.add_edge(w, p, EdgeKind::make_transfer(Mode::Walk, Mode::PT), tr);
            g.add_edge(p, w, EdgeKind::make_transfer(Mode::PT, Mode::Walk), tr);
            g.add_edge(x, p, EdgeKind::make_transfer(Mode::Taxi, Mode::PT), tr);
            g.add_edge(p, x, EdgeKind::make_transfer(Mode::PT, Mode::Taxi), tr);
        }
    }
    return g;
}

ValidationReport validate(const MultimodalGraph& g) {
    ValidationReport rep;
    auto flag_edge = [&](int id, std::string what) {
        rep.violations.push_back(Violation{std::move(what), id, -1});
    };

    for (const auto& e : g.edges()) {
        if (e.id != static_cast<int>(&e - g.edges().data()))
            flag_edge(e.id, "edge id does not match its index");
        if (e.tail == e.head) flag_edge(e.id, "self-loop");
        const Mode tm = g.vertex(e.tail).mode;
        const Mode hm = g.vertex(e.head).mode;
        if (e.kind.is_service()) {
            if (tm != e.kind.from || hm != e.kind.from)
                flag_edge(e.id, std::string("service edge of mode ") + to_string(e.kind.from) +
                                    " must join vertices of that layer");
        } else {
            if (e.kind.from == e.kind.to)
                flag_edge(e.id, "transfer edge must cross layers");
            else if (tm != e.kind.from || hm != e.kind.to)
                flag_edge(e.id, "transfer edge endpoints do not match its layers");
            if (e.kind.to == Mode::Walk &&
                (e.label.price != 0.0 || e.label.fixed_time != 0.0 || e.label.freeflow_time != 0.0))
                flag_edge(e.id, "transfer into walk layer must be free and instantaneous");
        }
        const auto& l = e.label;
        const double fields[] = {l.price, l.distance, l.fixed_time, l.freeflow_time,
                                 l.capacity, l.bpr_a, l.bpr_b};
        for (double f : fields) {
            if (std::isnan(f) || f < 0.0) {
                flag_edge(e.id, "label field negative or NaN");
                break;
            }
        }
        if (e.kind.is_service(Mode::Taxi) && !(l.capacity > 0.0))
            flag_edge(e.id, "taxi service edge needs positive capacity");
    }

    // Trip-layer connectivity: every walk vertex reaches every other walk
    // vertex through the full graph.
    const auto walk = g.vertices_of(Mode::Walk);
    if (walk.size() > 1) {
        std::vector<char> seen;
        for (int s : walk) {
            seen.assign(static_cast<size_t>(g.num_vertices()), 0);
            std::deque<int> q{s};
            seen[static_cast<size_t>(s)] = 1;
            while (!q.empty()) {
                const int u = q.front();
                q.pop_front();
                for (int eid : g.out_edges(u)) {
                    const int v = g.edge(eid).head;
                    if (!seen[static_cast<size_t>(v)]) {
                        seen[static_cast<size_t>(v)] = 1;
                        q.push_back(v);
                    }
                }
            }
            for (int t : walk) {
                if (!seen[static_cast<size_t>(t)]) {
                    rep.violations.push_back(
                        Violation{"walk layer not connected: no path between walk vertices", -1, s});
                    break;
                }
            }
            if (!rep.violations.empty() && rep.violations.back().vertex_id == s) break;
        }
    }
    return rep;
}

std::vector<int> transfer_edges(const MultimodalGraph& g, Mode from, Mode to) {
    if (from == to) throw std::invalid_argument("transfer_edges: from and to must differ");
    std::vector<int> ids;
    for (const auto& e : g.edges())
        if (e.kind.is_transfer(from, to)) ids.push_back(e.id);
    return ids;  // edge order is id order already
}

nlohmann::json graph_to_json(const MultimodalGraph& g) {
    nlohmann::json j;
    j["defaults"] = {{"bpr_a", 0.15}, {"bpr_b", 4.0}};
    auto& vs = j["vertices"] = nlohmann::json::array();
    for (const auto& v : g.vertices())
        vs.push_back({{"id", v.id}, {"mode", to_string(v.mode)}, {"x", v.x}, {"y", v.y}});
    auto& es = j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges()) {
        es.push_back({{"id", e.id},
                      {"tail", e.tail},
                      {"head", e.head},
                      {"kind", to_string(e.kind)},
                      {"c", e.label.price},
                      {"l", e.label.distance},
                      {"t_fc", e.label.fixed_time},
                      {"t0", e.label.freeflow_time},
                      {"V", e.label.capacity},
                      {"a", e.label.bpr_a},
                      {"b", e.label.bpr_b}});
    }
    return j;
}

MultimodalGraph graph_from_json(const nlohmann::json& j) {
    MultimodalGraph g;
    for (const auto& v : j.at("vertices")) {
        const int id = g.add_vertex(mode_from_string(v.at("mode").get<std::string>()),
                                    v.value("x", 0.0), v.value("y", 0.0));
        if (v.contains("id") && v.at("id").get<int>() != id)
            throw std::invalid_argument("graph json: vertex ids must be 0..n-1 in order");
    }
    double da = 0.15, db = 4.0;
    if (j.contains("defaults")) {
        da = j["defaults"].value("bpr_a", 0.15);
        db = j["defaults"].value("bpr_b", 4.0);
    }
    for (const auto& e : j.at("edges")) {
        EdgeLabel l;
        l.price = e.value("c", 0.0);
        l.distance = e.value("l", 0.0);
        l.fixed_time = e.value("t_fc", 0.0);
        l.freeflow_time = e.value("t0", 0.0);
        l.capacity = e.value("V", 0.0);
        l.bpr_a = e.value("a", da);
        l.bpr_b = e.value("b", db);
        const int id = g.add_edge(e.at("tail").get<int>(), e.at("head").get<int>(),
                                  edge_kind_from_string(e.at("kind").get<std::string>()), l);
        if (e.contains("id") && e.at("id").get<int>() != id)
            throw std::invalid_argument("graph json: edge ids must be 0..n-1 in order");
    }
    return g;
}

std::string save_graph(const MultimodalGraph& g) { return graph_to_json(g).dump(2) + "\n"; }

MultimodalGraph load_graph_text(const std::string& text) {
    return graph_from_json(nlohmann::json::parse(text));
}

void save_graph_file(const MultimodalGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << save_graph(g);
}

MultimodalGraph load_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_graph_text(ss.str());
}

}  // namespace mobgame
