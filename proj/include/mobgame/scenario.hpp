#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "mobgame/baselines.hpp"
#include "mobgame/equilibrium.hpp"
#include "mobgame/municipality.hpp"

namespace mobgame {

// Deterministic sub-seed streams derived from a master seed.
inline constexpr uint64_t kStreamNetwork = 1;
inline constexpr uint64_t kStreamDemand = 2;
inline constexpr uint64_t kStreamMne = 3;
inline constexpr uint64_t kStreamDataset = 4;
inline constexpr uint64_t kStreamPolicy = 5;
inline constexpr uint64_t kStreamBaseline = 6;
inline constexpr uint64_t kStreamTrain = 7;

// A fully validated problem instance plus solver defaults. The network and
// demand are derived from the scenario seed alone, so the instance is pinned
// by the file; the CLI's --seed only reseeds solvers and optimizers.
struct Scenario {
    std::string name;
    uint64_t seed = 0;
    MultimodalGraph network;
    Demand demand;
    OperatorSetup setup{};
    PtStrategy x0_pt{};
    TxStrategy x0_tx{};
    PolicyBounds policy_bounds{};
    MunicipalParams municipal{};
    Policy z0{};
    UESolverParams ue{};
    ZOParams zo_mne{};
    ZOParams zo_policy{};
    GAParams ga{};
    int budget = 600;
    int dataset_samples = 200;
    std::string source_text;  // exact bytes the scenario was parsed from
};

// Parses and validates; base_dir resolves relative network/demand file
// references. Throws std::invalid_argument with a readable message on any
// validation failure.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir = ".",
                            const std::string& source_text = "");
Scenario load_scenario_file(const std::string& path);

// FNV-1a over the scenario source bytes (falls back to the name when the
// scenario was built in memory).
uint64_t scenario_hash(const Scenario& s);

// Comment header embedded at the top of every output file; contains the
// artifact version, scenario name and hash, and the run seed.
std::string meta_header(const Scenario& s, uint64_t run_seed);

// CSV writers. All floating-point values use shortest round-trip formatting.
std::string flows_csv(const MultimodalGraph& g, const FlowState& flows);
std::string ue_trace_csv(const std::vector<TraceRow>& trace);
std::string nash_trace_csv(const std::vector<NashTraceRow>& trace);
std::string policy_trace_csv(const PolicyTrace& trace);

nlohmann::json gap_stats_to_json(const GapStats& s);
nlohmann::json policy_to_json(const Policy& z);
Policy policy_from_json(const nlohmann::json& j);
nlohmann::json pt_strategy_to_json(const PtStrategy& x);
nlohmann::json tx_strategy_to_json(const TxStrategy& x);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mobgame
