#include "mobgame/demand.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mobgame/rng.hpp"
#include "mobgame/util.hpp"

namespace mobgame {

const char* to_string(UserClassId c) {
    switch (c) {
        case UserClassId::Commuting: return "commuting";
        case UserClassId::Business: return "business";
        case UserClassId::Leisure: return "leisure";
    }
    throw std::invalid_argument("unknown user class");
}

UserClassId user_class_from_string(const std::string& s) {
    if (s == "commuting") return UserClassId::Commuting;
    if (s == "business") return UserClassId::Business;
    if (s == "leisure") return UserClassId::Leisure;
    throw std::invalid_argument("unknown user class: " + s);
}

double Demand::total_volume() const {
    double v = 0.0;
    for (const auto& r : requests) v += r.volume;
    return v;
}

Demand generate_demand(const MultimodalGraph& g, int n_requests, const DemandGenParams& params,
                       uint64_t seed) {
    if (n_requests < 0) throw std::invalid_argument("n_requests must be >= 0");
    double mix_sum = 0.0;
    for (double m : params.class_mix) {
        if (m < 0.0) throw std::invalid_argument("class_mix entries must be >= 0");
        mix_sum += m;
    }
    if (std::abs(mix_sum - 1.0) > 1e-9)
        throw std::invalid_argument("class_mix must sum to 1 (within 1e-9)");
    if (params.volume_min < 0.0 || params.volume_max < params.volume_min)
        throw std::invalid_argument("bad volume range");

    std::vector<int> walk_nodes = g.vertices_of(Mode::Walk);
    if (static_cast<int>(walk_nodes.size()) < 2 && n_requests > 0)
        throw std::invalid_argument("need at least 2 walk vertices to generate demand");
    // n distinct (class, o, d) triples must exist.
    const long long max_triples =
        static_cast<long long>(kNumClasses) * static_cast<long long>(walk_nodes.size()) *
        (static_cast<long long>(walk_nodes.size()) - 1);
    if (n_requests > max_triples)
        throw std::invalid_argument("n_requests exceeds number of distinct (class,o,d) triples");

    std::mt19937_64 rng(seed);
    std::array<double, kNumClasses> cdf{};
    double acc = 0.0;
    for (int i = 0; i < kNumClasses; ++i) {
        acc += params.class_mix[static_cast<size_t>(i)] / mix_sum;
        cdf[static_cast<size_t>(i)] = acc;
    }
    cdf[kNumClasses - 1] = 1.0;

    Demand d;
    std::set<std::tuple<int, int, int>> seen;
    while (static_cast<int>(d.requests.size()) < n_requests) {
        double u = uniform01(rng);
        int cls = 0;
        while (cls < kNumClasses - 1 && u > cdf[static_cast<size_t>(cls)]) ++cls;
        int o = walk_nodes[static_cast<size_t>(uniform01(rng) * double(walk_nodes.size())) %
                           walk_nodes.size()];
        int dd = walk_nodes[static_cast<size_t>(uniform01(rng) * double(walk_nodes.size())) %
                            walk_nodes.size()];
        double vol = uniform(rng, params.volume_min, params.volume_max);
        if (o == dd) continue;  // rejected draws still consume RNG state deterministically
        if (!seen.insert({cls, o, dd}).second) continue;
        Request r;
        r.cls = static_cast<UserClassId>(cls);
        r.origin = o;
        r.destination = dd;
        r.volume = vol;
        d.requests.push_back(r);
    }
    return d;
}

ValidationReport validate_demand(const Demand& d, const MultimodalGraph& g) {
    ValidationReport rep;
    std::set<std::tuple<int, int, int>> seen;
    for (size_t i = 0; i < d.requests.size(); ++i) {
        const Request& r = d.requests[i];
        const std::string tag = "request " + std::to_string(i) + ": ";
        if (r.origin < 0 || r.origin >= g.num_vertices() || r.destination < 0 ||
            r.destination >= g.num_vertices()) {
            rep.violations.push_back({tag + "endpoint out of range", -1, -1});
            continue;
        }
        if (g.vertex(r.origin).mode != Mode::Walk)
            rep.violations.push_back({tag + "origin not on walk layer", -1, r.origin});
        if (g.vertex(r.destination).mode != Mode::Walk)
            rep.violations.push_back({tag + "destination not on walk layer", -1, r.destination});
        if (r.origin == r.destination)
            rep.violations.push_back({tag + "origin equals destination", -1, r.origin});
        if (!(r.volume > 0.0) || !std::isfinite(r.volume))
            rep.violations.push_back({tag + "volume must be finite and > 0", -1, -1});
        if (!seen.insert({static_cast<int>(r.cls), r.origin, r.destination}).second)
            rep.violations.push_back({tag + "duplicate (class, origin, destination)", -1, -1});
    }
    return rep;
}

nlohmann::json demand_to_json(const Demand& d) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : d.requests) {
        arr.push_back({{"class", to_string(r.cls)},
                       {"destination", r.destination},
                       {"origin", r.origin},
                       {"volume", r.volume}});
    }
    return nlohmann::json{{"requests", arr}};
}

Demand demand_from_json(const nlohmann::json& j) {
    Demand d;
    if (!j.contains("requests") || !j.at("requests").is_array())
        throw std::invalid_argument("demand json: missing 'requests' array");
    for (const auto& e : j.at("requests")) {
        Request r;
        r.cls = user_class_from_string(e.at("class").get<std::string>());
        r.origin = e.at("origin").get<int>();
        r.destination = e.at("destination").get<int>();
        r.volume = e.at("volume").get<double>();
        d.requests.push_back(r);
    }
    return d;
}

Demand demand_from_csv(const std::string& text) {
    Demand d;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (first) {
            first = false;
            if (line.find("class") != std::string::npos) continue;  // header row
        }
        std::istringstream ls(line);
        std::string cls, o, dd, vol;
        if (!std::getline(ls, cls, ',') || !std::getline(ls, o, ',') ||
            !std::getline(ls, dd, ',') || !std::getline(ls, vol, ','))
            throw std::invalid_argument("demand csv: bad row: " + line);
        Request r;
        r.cls = user_class_from_string(cls);
        r.origin = std::stoi(o);
        r.destination = std::stoi(dd);
        r.volume = std::stod(vol);
        d.requests.push_back(r);
    }
    return d;
}

void save_demand_file(const Demand& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << demand_to_json(d).dump(2) << "\n";
}

Demand load_demand_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        return demand_from_csv(buf.str());
    return demand_from_json(nlohmann::json::parse(buf.str()));
}

}  // namespace mobgame
