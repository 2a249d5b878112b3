#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mobgame/network.hpp"

namespace mobgame {

// Traveler classes and their values of time [CHF/h]. Order is (Commuting,
// Business, Leisure) everywhere an array of 3 appears.
enum class UserClassId : int { Commuting = 0, Business = 1, Leisure = 2 };

inline constexpr int kNumClasses = 3;

const char* to_string(UserClassId c);
UserClassId user_class_from_string(const std::string& s);

struct ValueOfTime {
    std::array<double, kNumClasses> gamma{19.0, 32.0, 12.0};
    double of(UserClassId c) const { return gamma[static_cast<size_t>(c)]; }
};

struct Request {
    UserClassId cls = UserClassId::Commuting;
    int origin = -1;       // walk-layer vertex id
    int destination = -1;  // walk-layer vertex id
    double volume = 0.0;   // travelers/h
};

struct Demand {
    std::vector<Request> requests;
    double total_volume() const;
    bool empty() const { return requests.empty(); }
    size_t size() const { return requests.size(); }
};

struct DemandGenParams {
    std::array<double, kNumClasses> class_mix{0.5, 0.2, 0.3};
    double volume_min = 5.0;
    double volume_max = 15.0;
};

// Samples n distinct (class, origin, destination) triples uniformly over the
// walk layer with o != d. Deterministic per seed.
Demand generate_demand(const MultimodalGraph& g, int n_requests, const DemandGenParams& params,
                       uint64_t seed);

ValidationReport validate_demand(const Demand& d, const MultimodalGraph& g);

nlohmann::json demand_to_json(const Demand& d);
Demand demand_from_json(const nlohmann::json& j);
Demand demand_from_csv(const std::string& text);  // columns: class,origin,destination,volume
void save_demand_file(const Demand& d, const std::string& path);
Demand load_demand_file(const std::string& path);  // .json or .csv by extension

}  // namespace mobgame
