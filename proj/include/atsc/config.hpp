#pragma once

#include "atsc/agent.hpp"
#include "atsc/emissions.hpp"
#include "atsc/encoding.hpp"
#include "atsc/rewards.hpp"
#include "atsc/signal.hpp"
#include "atsc/sim.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace atsc {

struct RunParams {
    int episode_length = 3600; // seconds
    int episodes = 200;        // training episodes
    std::uint64_t train_seed = 1;
    std::vector<std::uint64_t> eval_seeds{100001, 100002, 100003, 100004, 100005,
                                          100006, 100007, 100008, 100009, 100010};
    int entropy_reweight = 0; // episodes between entropy reweights; 0 keeps the initial weights
};

struct ScenarioConfig {
    DemandProfile demand = DemandProfile::asymmetric_default();
    double demand_scale = 1.0;
    SimParams sim;
    SignalTiming timing;
    ActuatedParams actuated;
    double saturation_flow = 1800.0; // veh/h/lane
    EmissionParams emissions;
    CepCurve cep = CepCurve::passenger_car_default();
    GridParams grid;
    RewardWeights weights;
    NormalizationParams normalization;
    Hyperparams agent;
    RunParams run;

    DemandProfile effective_demand() const { return demand.scaled(demand_scale); }
    void validate() const; // throws ConfigError naming the field
};

// Every key is optional; absent keys keep their defaults, unknown keys are rejected.
ScenarioConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const ScenarioConfig &config);
ScenarioConfig load_config(const std::string &path);

} // namespace atsc
