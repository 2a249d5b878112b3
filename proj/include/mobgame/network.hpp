#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mobgame {

// Mode layers of the multimodal graph. Numeric values follow the convention
// PT=1, taxi=2, walk=3 used throughout the transfer-class names (e.g. the
// walk->PT transfers form class 31).
enum class Mode : int { PT = 1, Taxi = 2, Walk = 3 };

inline constexpr std::array<Mode, 3> kAllModes{Mode::PT, Mode::Taxi, Mode::Walk};

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct EdgeLabel {
    double price = 0.0;          // c_e  [CHF]
    double distance = 0.0;       // l_e  [km]
    double fixed_time = 0.0;     // t_fc [h]
    double freeflow_time = 0.0;  // t0   [h]
    double capacity = 0.0;       // V_e  [travelers/h]; meaningful on taxi service edges
    double bpr_a = 0.15;
    double bpr_b = 4.0;
};

// Service(m) connects two vertices of layer m; Transfer(a,b) crosses from
// layer a to layer b (a != b).
struct EdgeKind {
    bool transfer = false;
    Mode from = Mode::Walk;
    Mode to = Mode::Walk;

    static EdgeKind service(Mode m) { return EdgeKind{false, m, m}; }
    static EdgeKind make_transfer(Mode a, Mode b) { return EdgeKind{true, a, b}; }

    bool is_service() const { return !transfer; }
    bool is_service(Mode m) const { return !transfer && from == m; }
    bool is_transfer(Mode a, Mode b) const { return transfer && from == a && to == b; }
    bool operator==(const EdgeKind&) const = default;
};

std::string to_string(const EdgeKind& k);
EdgeKind edge_kind_from_string(const std::string& s);

struct Vertex {
    int id = -1;
    Mode mode = Mode::Walk;
    double x = 0.0;  // optional planar coordinates (km)
    double y = 0.0;
};

struct Edge {
    int id = -1;
    int tail = -1;
    int head = -1;
    EdgeKind kind;
    EdgeLabel label;
};

class MultimodalGraph {
public:
    int add_vertex(Mode mode, double x = 0.0, double y = 0.0);
    int add_edge(int tail, int head, EdgeKind kind, EdgeLabel label);

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Vertex& vertex(int id) const { return vertices_[static_cast<size_t>(id)]; }
    const Edge& edge(int id) const { return edges_[static_cast<size_t>(id)]; }
    Edge& edge(int id) { return edges_[static_cast<size_t>(id)]; }

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    // Outgoing edge ids in ascending order.
    std::span<const int> out_edges(int vertex) const {
        const auto& v = out_[static_cast<size_t>(vertex)];
        return {v.data(), v.size()};
    }

    std::vector<int> vertices_of(Mode m) const;

private:
    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_;
};

struct Violation {
    std::string what;
    int edge_id = -1;
    int vertex_id = -1;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Desk-scale synthetic scenario family: a walk grid, a mirrored taxi layer,
// PT corridors on a subset of rows, and co-located transfer stacks.
struct GridParams {
    double block_km = 2.0;       // spacing between neighboring grid cells
    double walk_kmh = 4.8;
    double taxi_kmh = 30.0;
    double pt_kmh = 20.0;
    double pt_dwell_h = 0.0;     // fixed time added to each PT service edge
    double taxi_capacity = 30.0; // V_e on taxi service edges [travelers/h]
    int pt_row_stride = 2;       // PT corridor on rows 0, s, 2s, ...; <= 0 disables PT
    double jitter = 0.0;         // relative +- jitter on distances/capacities
    double bpr_a = 0.15;
    double bpr_b = 4.0;
};

MultimodalGraph build_grid_scenario(int rows, int cols, const GridParams& params, uint64_t seed);

ValidationReport validate(const MultimodalGraph& g);

// Edge ids of all Transfer(from, to) edges, ascending. Throws if from == to.
std::vector<int> transfer_edges(const MultimodalGraph& g, Mode from, Mode to);

nlohmann::json graph_to_json(const MultimodalGraph& g);
MultimodalGraph graph_from_json(const nlohmann::json& j);
std::string save_graph(const MultimodalGraph& g);  // serialized text, sorted keys
MultimodalGraph load_graph_text(const std::string& text);
void save_graph_file(const MultimodalGraph& g, const std::string& path);
MultimodalGraph load_graph_file(const std::string& path);

}  // namespace mobgame
