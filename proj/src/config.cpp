#include "atsc/config.hpp"

#include "atsc/errors.hpp"

#include <fstream>
#include <set>

namespace atsc {

namespace {

using nlohmann::json;

const json &empty_object() {
    static const json e = json::object();
    return e;
}

class Section {
public:
    Section(const json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    template <typename T>
    void get(const char *key, T &out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        try {
            out = it->template get<T>();
        } catch (const json::exception &) {
            throw ConfigError(field(key) + ": wrong type");
        }
    }

    Section child(const char *key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return Section(it == j_.end() ? empty_object() : *it, field(key));
    }

    bool has(const char *key) const { return j_.contains(key); }

    void finish() const {
        for (const auto &item : j_.items()) {
            if (!seen_.count(item.key()))
                throw ConfigError(field(item.key()) + ": unknown key");
        }
    }

    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_demand(Section s, ScenarioConfig &c) {
    s.get("scale", c.demand_scale);
    Section approaches = s.child("approaches");
    for (int a = 0; a < kApproaches; ++a) {
        std::string name(to_string(static_cast<Approach>(a)));
        if (!approaches.has(name.c_str())) {
            approaches.child(name.c_str()).finish();
            continue;
        }
        Section ap = approaches.child(name.c_str());
        auto &d = c.demand.approaches[a];
        ap.get("rate_vph", d.rate_vph);
        if (ap.has("split")) {
            std::vector<double> split;
            ap.get("split", split);
            if (split.size() != 3)
                throw ConfigError(ap.field("split") + ": expected [left, through, right]");
            d.split = {split[0], split[1], split[2]};
        }
        ap.finish();
    }
    approaches.finish();
    s.finish();
}

void read_cep(Section s, ScenarioConfig &c) {
    double idle = c.cep.idle_g_per_h();
    auto points = c.cep.breakpoints();
    s.get("idle_g_per_h", idle);
    if (s.has("breakpoints")) {
        std::vector<std::vector<double>> raw;
        s.get("breakpoints", raw);
        points.clear();
        for (const auto &p : raw) {
            if (p.size() != 2)
                throw ConfigError(s.field("breakpoints") + ": each entry must be [kW, g/h]");
            points.emplace_back(p[0], p[1]);
        }
    }
    s.finish();
    c.cep = CepCurve(idle, points);
}

} // namespace

ScenarioConfig config_from_json(const json &j) {
    ScenarioConfig c;
    Section root(j, "");

    read_demand(root.child("demand"), c);

    {
        Section s = root.child("geometry");
        s.get("lane_length", c.sim.lane_length);
        s.get("zone_clearance_s", c.sim.zone_clearance);
        s.get("rtor_horizon_s", c.sim.rtor_horizon);
        s.get("safety_clamp_gap", c.sim.safety_clamp_gap);
        s.get("strict", c.sim.strict);
        s.finish();
    }
    {
        Section s = root.child("idm");
        s.get("v0", c.sim.idm.v0);
        s.get("a_max", c.sim.idm.a_max);
        s.get("b", c.sim.idm.b);
        s.get("s0", c.sim.idm.s0);
        s.get("T", c.sim.idm.T);
        s.get("length", c.sim.idm.length);
        s.finish();
    }
    {
        Section s = root.child("signal");
        s.get("min_green", c.timing.min_green);
        s.get("yellow", c.timing.yellow);
        s.get("saturation_flow", c.saturation_flow);
        s.get("gap_time", c.actuated.gap_time);
        s.get("max_green", c.actuated.max_green);
        s.get("detector_distance", c.actuated.detector_distance);
        s.finish();
    }
    {
        Section s = root.child("emissions");
        auto &e = c.emissions;
        s.get("vehicle_mass", e.vehicle_mass);
        s.get("load_mass", e.load_mass);
        s.get("rotating_mass", e.rotating_mass);
        s.get("rolling_resistance", e.rolling_resistance);
        s.get("air_density", e.air_density);
        s.get("drag_coefficient", e.drag_coefficient);
        s.get("frontal_area", e.frontal_area);
        s.get("gradient", e.gradient);
        s.get("gearbox_efficiency", e.gearbox_efficiency);
        s.get("gravity", e.gravity);
        read_cep(s.child("cep"), c);
        s.finish();
    }
    {
        Section s = root.child("grid");
        s.get("cells_per_lane", c.grid.cells_per_lane);
        s.get("coverage", c.grid.coverage);
        s.get("growth", c.grid.growth);
        s.get("first_cell", c.grid.first_cell);
        s.get("max_considered_green", c.grid.max_considered_green);
        s.get("include_phase", c.grid.include_phase);
        s.finish();
    }
    {
        Section s = root.child("reward");
        Section w = s.child("weights");
        w.get("safety", c.weights.safety);
        w.get("efficiency", c.weights.efficiency);
        w.get("carbon", c.weights.carbon);
        w.finish();
        s.get("window", c.normalization.window);
        s.get("warmup", c.normalization.warmup);
        if (s.has("scales")) {
            std::vector<double> scales;
            s.get("scales", scales);
            if (scales.size() != 3)
                throw ConfigError("reward.scales: expected [conflicts, waiting, co2]");
            c.normalization.scales = {scales[0], scales[1], scales[2]};
        }
        s.get("entropy_reweight", c.run.entropy_reweight);
        s.finish();
    }
    {
        Section s = root.child("agent");
        auto &hp = c.agent;
        s.get("gamma", hp.gamma);
        s.get("learning_rate", hp.learning_rate);
        s.get("batch_size", hp.batch_size);
        s.get("epsilon_start", hp.epsilon_start);
        s.get("epsilon_end", hp.epsilon_end);
        s.get("epsilon_decay_steps", hp.epsilon_decay_steps);
        s.get("target_sync", hp.target_sync);
        s.get("capacity", hp.capacity);
        s.get("hidden", hp.hidden);
        s.get("train_every", hp.train_every);
        s.get("grad_clip", hp.grad_clip);
        s.get("seed", hp.seed);
        s.finish();
    }
    {
        Section s = root.child("run");
        s.get("episode_length", c.run.episode_length);
        s.get("episodes", c.run.episodes);
        s.get("train_seed", c.run.train_seed);
        s.get("eval_seeds", c.run.eval_seeds);
        s.finish();
    }
    root.finish();
    c.validate();
    return c;
}

json config_to_json(const ScenarioConfig &c) {
    json approaches = json::object();
    for (int a = 0; a < kApproaches; ++a) {
        const auto &d = c.demand.approaches[a];
        approaches[std::string(to_string(static_cast<Approach>(a)))] = {
            {"rate_vph", d.rate_vph}, {"split", {d.split.left, d.split.through, d.split.right}}};
    }
    json breakpoints = json::array();
    for (const auto &[kw, rate] : c.cep.breakpoints())
        breakpoints.push_back({kw, rate});
    const auto &e = c.emissions;
    const auto &hp = c.agent;
    return {
        {"demand", {{"scale", c.demand_scale}, {"approaches", approaches}}},
        {"geometry",
         {{"lane_length", c.sim.lane_length},
          {"zone_clearance_s", c.sim.zone_clearance},
          {"rtor_horizon_s", c.sim.rtor_horizon},
          {"safety_clamp_gap", c.sim.safety_clamp_gap},
          {"strict", c.sim.strict}}},
        {"idm",
         {{"v0", c.sim.idm.v0},
          {"a_max", c.sim.idm.a_max},
          {"b", c.sim.idm.b},
          {"s0", c.sim.idm.s0},
          {"T", c.sim.idm.T},
          {"length", c.sim.idm.length}}},
        {"signal",
         {{"min_green", c.timing.min_green},
          {"yellow", c.timing.yellow},
          {"saturation_flow", c.saturation_flow},
          {"gap_time", c.actuated.gap_time},
          {"max_green", c.actuated.max_green},
          {"detector_distance", c.actuated.detector_distance}}},
        {"emissions",
         {{"vehicle_mass", e.vehicle_mass},
          {"load_mass", e.load_mass},
          {"rotating_mass", e.rotating_mass},
          {"rolling_resistance", e.rolling_resistance},
          {"air_density", e.air_density},
          {"drag_coefficient", e.drag_coefficient},
          {"frontal_area", e.frontal_area},
          {"gradient", e.gradient},
          {"gearbox_efficiency", e.gearbox_efficiency},
          {"gravity", e.gravity},
          {"cep", {{"idle_g_per_h", c.cep.idle_g_per_h()}, {"breakpoints", breakpoints}}}}},
        {"grid",
         {{"cells_per_lane", c.grid.cells_per_lane},
          {"coverage", c.grid.coverage},
          {"growth", c.grid.growth},
          {"first_cell", c.grid.first_cell},
          {"max_considered_green", c.grid.max_considered_green},
          {"include_phase", c.grid.include_phase}}},
        {"reward",
         {{"weights", {{"safety", c.weights.safety}, {"efficiency", c.weights.efficiency}, {"carbon", c.weights.carbon}}},
          {"window", c.normalization.window},
          {"warmup", c.normalization.warmup},
          {"scales", c.normalization.scales},
          {"entropy_reweight", c.run.entropy_reweight}}},
        {"agent",
         {{"gamma", hp.gamma},
          {"learning_rate", hp.learning_rate},
          {"batch_size", hp.batch_size},
          {"epsilon_start", hp.epsilon_start},
          {"epsilon_end", hp.epsilon_end},
          {"epsilon_decay_steps", hp.epsilon_decay_steps},
          {"target_sync", hp.target_sync},
          {"capacity", hp.capacity},
          {"hidden", hp.hidden},
          {"train_every", hp.train_every},
          {"grad_clip", hp.grad_clip},
          {"seed", hp.seed}}},
        {"run",
         {{"episode_length", c.run.episode_length},
          {"episodes", c.run.episodes},
          {"train_seed", c.run.train_seed},
          {"eval_seeds", c.run.eval_seeds}}},
    };
}

void ScenarioConfig::validate() const {
    demand.validate();
    if (!(demand_scale >= 0.0))
        throw ConfigError("demand.scale: must be >= 0");
    if (!(sim.lane_length > 0.0))
        throw ConfigError("geometry.lane_length: must be > 0");
    if (sim.zone_clearance < 0)
        throw ConfigError("geometry.zone_clearance_s: must be >= 0");
    if (!(sim.safety_clamp_gap >= 0.0))
        throw ConfigError("geometry.safety_clamp_gap: must be >= 0");
    const auto &idm = sim.idm;
    if (!(idm.v0 > 0.0))
        throw ConfigError("idm.v0: must be > 0");
    if (!(idm.a_max > 0.0))
        throw ConfigError("idm.a_max: must be > 0");
    if (!(idm.b > 0.0))
        throw ConfigError("idm.b: must be > 0");
    if (!(idm.s0 > 0.0))
        throw ConfigError("idm.s0: must be > 0");
    if (!(idm.T >= 0.0))
        throw ConfigError("idm.T: must be >= 0");
    if (!(idm.length > 0.0))
        throw ConfigError("idm.length: must be > 0");
    if (timing.min_green < 1)
        throw ConfigError("signal.min_green: must be >= 1");
    if (timing.yellow < 1)
        throw ConfigError("signal.yellow: must be >= 1");
    if (!(saturation_flow > 0.0))
        throw ConfigError("signal.saturation_flow: must be > 0");
    if (!(actuated.gap_time > 0.0))
        throw ConfigError("signal.gap_time: must be > 0");
    if (actuated.max_green < timing.min_green)
        throw ConfigError("signal.max_green: must be >= min_green");
    if (!(actuated.detector_distance > 0.0 && actuated.detector_distance < sim.lane_length))
        throw ConfigError("signal.detector_distance: must lie inside the lane");
    emissions.validate();
    (void)build_grid(grid);
    if (!(grid.max_considered_green > 0.0))
        throw ConfigError("grid.max_considered_green: must be > 0");
    weights.validate();
    if (normalization.window < 1)
        throw ConfigError("reward.window: must be >= 1");
    for (double s : normalization.scales) {
        if (!(s > 0.0))
            throw ConfigError("reward.scales: must be > 0");
    }
    agent.validate();
    if (run.episode_length < 1)
        throw ConfigError("run.episode_length: must be >= 1");
    if (run.episodes < 0)
        throw ConfigError("run.episodes: must be >= 0");
    if (run.entropy_reweight < 0)
        throw ConfigError("reward.entropy_reweight: must be >= 0");
}

ScenarioConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot read " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception &e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

} // namespace atsc
