#include "doctest.h"

#include <set>
#include <tuple>

#include "mobgame/demand.hpp"
#include "mobgame/network.hpp"

using namespace mobgame;

namespace {

bool demands_equal(const Demand& a, const Demand& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const auto& ra = a.requests[i];
        const auto& rb = b.requests[i];
        if (ra.cls != rb.cls || ra.origin != rb.origin || ra.destination != rb.destination ||
            ra.volume != rb.volume)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("generate_demand: zero requests gives an empty demand") {
    MultimodalGraph g = build_grid_scenario(3, 3, GridParams{}, 0);
    CHECK(generate_demand(g, 0, DemandGenParams{}, 0).empty());
}

TEST_CASE("generate_demand: degenerate class mix yields a single class") {
    MultimodalGraph g = build_grid_scenario(3, 3, GridParams{}, 0);
    DemandGenParams p;
    p.class_mix = {1.0, 0.0, 0.0};
    Demand d = generate_demand(g, 10, p, 1);
    REQUIRE(d.size() == 10);
    for (const auto& r : d.requests) CHECK(r.cls == UserClassId::Commuting);
}

TEST_CASE("generate_demand: deterministic per seed") {
    MultimodalGraph g = build_grid_scenario(3, 3, GridParams{}, 0);
    Demand a = generate_demand(g, 12, DemandGenParams{}, 5);
    Demand b = generate_demand(g, 12, DemandGenParams{}, 5);
    CHECK(demands_equal(a, b));
    Demand c = generate_demand(g, 12, DemandGenParams{}, 6);
    CHECK(!demands_equal(a, c));
}

TEST_CASE("generate_demand: requests live on the walk layer with o != d and positive volume") {
    MultimodalGraph g = build_grid_scenario(2, 3, GridParams{}, 3);
    DemandGenParams p;
    Demand d = generate_demand(g, 20, p, 9);
    CHECK(validate_demand(d, g).ok());
    std::set<std::tuple<int, int, int>> triples;
    for (const auto& r : d.requests) {
        CHECK(g.vertex(r.origin).mode == Mode::Walk);
        CHECK(g.vertex(r.destination).mode == Mode::Walk);
        CHECK(r.origin != r.destination);
        CHECK(r.volume >= p.volume_min);
        CHECK(r.volume <= p.volume_max);
        triples.insert({static_cast<int>(r.cls), r.origin, r.destination});
    }
    CHECK(triples.size() == d.size());  // volumes pre-aggregated: no duplicate triples
}

TEST_CASE("generate_demand rejects impossible inputs") {
    MultimodalGraph tiny = build_grid_scenario(1, 1, GridParams{}, 0);
    CHECK_THROWS_AS(generate_demand(tiny, 1, DemandGenParams{}, 0), std::invalid_argument);

    MultimodalGraph g = build_grid_scenario(1, 2, GridParams{}, 0);
    // Only 3 classes x 2 ordered pairs = 6 distinct triples exist.
    CHECK_THROWS_AS(generate_demand(g, 7, DemandGenParams{}, 0), std::invalid_argument);
    CHECK(generate_demand(g, 6, DemandGenParams{}, 0).size() == 6);

    DemandGenParams bad;
    bad.class_mix = {0.8, 0.1, 0.2};  // sums to 1.1
    CHECK_THROWS_AS(generate_demand(g, 2, bad, 0), std::invalid_argument);
}

TEST_CASE("validate_demand flags off-layer endpoints and o == d") {
    MultimodalGraph g = build_grid_scenario(2, 2, GridParams{}, 0);
    CHECK(validate_demand(Demand{}, g).ok());

    const int taxi_vertex = g.vertices_of(Mode::Taxi).front();
    Demand d;
    d.requests.push_back(Request{UserClassId::Business, 0, taxi_vertex, 5.0});
    CHECK(validate_demand(d, g).violations.size() == 1);

    Demand same;
    same.requests.push_back(Request{UserClassId::Leisure, 1, 1, 5.0});
    CHECK(validate_demand(same, g).violations.size() == 1);

    Demand neg;
    neg.requests.push_back(Request{UserClassId::Leisure, 0, 1, -2.0});
    CHECK(!validate_demand(neg, g).ok());
}

TEST_CASE("demand serialization round-trips through json and csv") {
    Demand d;
    d.requests.push_back(Request{UserClassId::Commuting, 0, 1, 12.5});
    d.requests.push_back(Request{UserClassId::Business, 1, 0, 3.25});
    d.requests.push_back(Request{UserClassId::Leisure, 0, 2, 7.0});

    Demand from_json = demand_from_json(demand_to_json(d));
    CHECK(demands_equal(d, from_json));

    std::string csv = "class,origin,destination,volume\ncommuting,0,1,12.5\nbusiness,1,0,3.25\n";
    Demand from_csv = demand_from_csv(csv);
    REQUIRE(from_csv.size() == 2);
    CHECK(from_csv.requests[0].cls == UserClassId::Commuting);
    CHECK(from_csv.requests[1].volume == 3.25);
}

TEST_CASE("total volume sums request volumes") {
    Demand d;
    d.requests.push_back(Request{UserClassId::Commuting, 0, 1, 10.0});
    d.requests.push_back(Request{UserClassId::Leisure, 1, 0, 2.5});
    CHECK(d.total_volume() == doctest::Approx(12.5));
}

TEST_CASE("value-of-time defaults") {
    ValueOfTime vot;
    CHECK(vot.of(UserClassId::Commuting) == 19.0);
    CHECK(vot.of(UserClassId::Business) == 32.0);
    CHECK(vot.of(UserClassId::Leisure) == 12.0);
}
