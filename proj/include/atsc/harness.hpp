#pragma once

#include "atsc/agent.hpp"
#include "atsc/config.hpp"
#include "atsc/emissions.hpp"
#include "atsc/encoding.hpp"
#include "atsc/rewards.hpp"
#include "atsc/safety.hpp"
#include "atsc/signal.hpp"
#include "atsc/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace atsc {

// Per-second metrics row; cumulative columns are episode totals.
struct StepRecord {
    int t = 0;
    Phase phase = Phase::WEG;
    bool in_yellow = false;
    int conflicts = 0;
    std::int64_t ctc = 0;
    double cwt = 0.0;
    double co2_step = 0.0;
    double cde = 0.0;
    int queue = 0;
    double mean_speed = 0.0;
    int vehicles = 0;
    std::int64_t served = 0;
    int conflict_events = 0;
    Channels raw{}; // per-second reward channels before normalization
};

// One simulation instance with its signal, detectors and metric ledgers.
class Environment {
public:
    Environment(const ScenarioConfig &config, std::uint64_t seed);

    const TrafficSnapshot &snapshot() const { return sim_.snapshot(); }
    const PhaseMachine &machine() const { return machine_; }
    DetectorState detectors() const { return detectors_.state(sim_.snapshot().time); }
    const CellGrid &grid() const { return grid_; }

    // True when the interlock lets a phase request take effect this second.
    bool decision_point() const { return machine_.can_switch(); }
    EncodedState observe() const;
    void request(Phase phase);

    StepRecord step();
    MetricsRecord metrics() const;
    const ConflictLedger &conflicts() const { return conflicts_; }
    const EmissionLedger &emissions() const { return emissions_; }

private:
    ScenarioConfig config_;
    Simulation sim_;
    PhaseMachine machine_;
    DetectorBank detectors_;
    CellGrid grid_;
    ConflictLedger conflicts_;
    EmissionLedger emissions_;
    ConflictEventCounter events_;
};

// Forwards the greedy action of a network at every legal decision second.
class AgentController : public Controller {
public:
    AgentController(ControllerKind kind, QNetwork net, const ScenarioConfig &config);

    ControllerKind kind() const override { return kind_; }
    std::optional<Phase> decide(const ControlContext &ctx) override;

private:
    ControllerKind kind_;
    QNetwork net_;
    GridParams grid_params_;
    double lane_length_;
    CellGrid grid_;
};

std::unique_ptr<Controller> make_controller(ControllerKind kind, const ScenarioConfig &config,
                                            const std::optional<std::string> &checkpoint);

// Writes one CSV row per vehicle per step.
class TrajectoryWriter {
public:
    explicit TrajectoryWriter(std::ostream &out);
    void write(const TrafficSnapshot &snapshot);

private:
    std::ostream &out_;
};

struct EpisodeSummary {
    std::uint64_t seed = 0;
    double conflicts = 0.0;
    double waiting_s = 0.0;
    double co2_g = 0.0;
    double served = 0.0;
    double mean_speed = 0.0;
};

EpisodeSummary run_episode(const ScenarioConfig &config, Controller &controller, std::uint64_t seed,
                           std::vector<StepRecord> *steps = nullptr, TrajectoryWriter *trajectories = nullptr);

struct TrainingEpisode {
    int episode = 0;
    std::uint64_t seed = 0;
    std::int64_t decisions = 0;
    double epsilon = 0.0;
    double reward = 0.0;
    double mean_loss = 0.0;
    EpisodeSummary summary;
    RewardWeights weights;
};

struct TrainingResult {
    std::vector<TrainingEpisode> episodes;
    D3qnAgent agent;
};

// Trains an agent controller (AgentTE or AgentSED). When out_dir is set, writes
// episodes.csv and checkpoint.json there.
TrainingResult run_training(const ScenarioConfig &config, ControllerKind kind,
                            const std::optional<std::filesystem::path> &out_dir = std::nullopt);

struct EvalOptions {
    bool log_trajectories = false;
    bool conflict_events = false;
};

// Runs every configured evaluation seed; writes steps.csv and summary.csv (and
// trajectories.csv when requested) when out_dir is set.
std::vector<EpisodeSummary> run_eval(const ScenarioConfig &config, ControllerKind kind,
                                     const std::optional<std::string> &checkpoint,
                                     const std::optional<std::filesystem::path> &out_dir = std::nullopt,
                                     const EvalOptions &options = {});

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct ComparisonRow {
    ControllerKind kind = ControllerKind::FixedTime;
    MetricStats conflicts, waiting, co2, served, speed;
    double conflicts_delta_pct = 0.0;
    double waiting_delta_pct = 0.0;
    double co2_delta_pct = 0.0;
};

MetricStats stats_of(const std::vector<double> &values);

// Rows in input order; deltas against the FixedTime row when present, else the first row.
std::vector<ComparisonRow> summarize_comparison(
    const std::vector<std::pair<ControllerKind, std::vector<EpisodeSummary>>> &results);

// Evaluates each controller on `seeds`. Agent controllers without a checkpoint are trained
// first (into out_dir/train_<kind>). Writes comparison.csv when out_dir is set.
std::vector<ComparisonRow> compare(const ScenarioConfig &config, const std::vector<ControllerKind> &controllers,
                                   const std::vector<std::uint64_t> &seeds,
                                   std::map<ControllerKind, std::string> checkpoints,
                                   const std::optional<std::filesystem::path> &out_dir = std::nullopt);

// Shortest round-trip decimal form of a double.
std::string format_number(double value);

void write_steps_header(std::ostream &out, bool conflict_events);
void write_step_row(std::ostream &out, int episode, std::uint64_t seed, const StepRecord &r, bool conflict_events);
void write_summary_csv(std::ostream &out, const std::vector<EpisodeSummary> &summaries);
void write_episodes_csv(std::ostream &out, const std::vector<TrainingEpisode> &episodes);
void write_comparison_csv(std::ostream &out, const std::vector<ComparisonRow> &rows);

} // namespace atsc
