#include "atsc/harness.hpp"

#include "atsc/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace atsc {

namespace {

std::ofstream open_output(const std::filesystem::path &path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("output: cannot write " + path.string());
    return out;
}

// Mean speed over every vehicle-second of the episode.
struct SpeedTally {
    double sum = 0.0;
    std::int64_t count = 0;

    void add(const StepRecord &r) {
        sum += r.mean_speed * r.vehicles;
        count += r.vehicles;
    }
    double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
};

EpisodeSummary summarize(const Environment &env, std::uint64_t seed, const SpeedTally &speed) {
    EpisodeSummary s;
    s.seed = seed;
    MetricsRecord m = env.metrics();
    s.conflicts = m.ctc;
    s.waiting_s = m.cwt;
    s.co2_g = m.cde;
    s.served = static_cast<double>(env.snapshot().exited);
    s.mean_speed = speed.mean();
    return s;
}

} // namespace

Environment::Environment(const ScenarioConfig &config, std::uint64_t seed)
    : config_(config), sim_(config.sim, config.effective_demand(), seed),
      detectors_(config.actuated.detector_distance), grid_(build_grid(config.grid)) {
    machine_.timing = config.timing;
}

EncodedState Environment::observe() const {
    return encode(sim_.snapshot(), machine_, grid_, config_.sim.lane_length, config_.grid);
}

void Environment::request(Phase phase) { machine_ = request_phase(machine_, phase); }

StepRecord Environment::step() {
    StepRecord r;
    const MetricsRecord before_metrics = metrics();
    r.phase = machine_.active;
    SignalOutput colors = tick(machine_);
    const TrafficSnapshot &snap = sim_.step(colors);
    detectors_.update(snap, config_.sim.lane_length);

    r.conflicts = step_conflicts(snap);
    conflicts_ = accumulate(std::move(conflicts_), r.conflicts);
    double before = emissions_.pe_total;
    emissions_ = accumulate_emissions(std::move(emissions_), snap, config_.emissions, config_.cep);
    r.conflict_events = events_.update(snap);

    r.t = static_cast<int>(std::lround(snap.time));
    for (LightColor c : colors) {
        if (c == LightColor::Yellow)
            r.in_yellow = true;
    }
    r.ctc = conflicts_.ctc;
    r.cwt = cumulative_waiting(snap);
    r.co2_step = emissions_.pe_total - before;
    r.cde = emissions_.pe_total;
    double speed_sum = 0.0;
    for (const Vehicle &v : snap.vehicles) {
        speed_sum += v.speed;
        if (!v.in_zone() && v.speed < 0.1)
            ++r.queue;
    }
    r.vehicles = static_cast<int>(snap.vehicles.size());
    r.mean_speed = r.vehicles > 0 ? speed_sum / r.vehicles : 0.0;
    r.served = snap.exited;
    r.raw = raw_rewards(before_metrics, metrics());
    return r;
}

MetricsRecord Environment::metrics() const {
    return {static_cast<double>(conflicts_.ctc), cumulative_waiting(sim_.snapshot()), emissions_.pe_total};
}

AgentController::AgentController(ControllerKind kind, QNetwork net, const ScenarioConfig &config)
    : kind_(kind), net_(std::move(net)), grid_params_(config.grid), lane_length_(config.sim.lane_length),
      grid_(build_grid(config.grid)) {
    if (!is_agent(kind_))
        throw ConfigError("controller: agent controller needs te or sed");
    if (net_.shape().input != static_cast<int>(encoding_length(grid_)))
        throw ConfigError("checkpoint: network input " + std::to_string(net_.shape().input) +
                          " does not match the state length " + std::to_string(encoding_length(grid_)));
    if (net_.shape().actions != kPhases)
        throw ConfigError("checkpoint: network must have " + std::to_string(kPhases) + " actions");
}

std::optional<Phase> AgentController::decide(const ControlContext &ctx) {
    if (!ctx.machine.can_switch())
        return std::nullopt;
    EncodedState s = encode(ctx.snapshot, ctx.machine, grid_, lane_length_, grid_params_);
    return phase_from_index(greedy_action(net_.forward(s.values)));
}

std::unique_ptr<Controller> make_controller(ControllerKind kind, const ScenarioConfig &config,
                                            const std::optional<std::string> &checkpoint) {
    switch (kind) {
    case ControllerKind::FixedTime:
        return std::make_unique<FixedTimeController>(
            webster_fixed_time(config.effective_demand(), config.saturation_flow, config.timing), config.timing);
    case ControllerKind::Actuated:
        return std::make_unique<ActuatedController>(config.actuated);
    case ControllerKind::AgentTE:
    case ControllerKind::AgentSED:
        if (!checkpoint)
            throw ConfigError("checkpoint: controller " + std::string(to_string(kind)) + " needs --checkpoint");
        return std::make_unique<AgentController>(kind, D3qnAgent::load(*checkpoint).online(), config);
    }
    throw ConfigError("controller: unknown kind");
}

TrajectoryWriter::TrajectoryWriter(std::ostream &out) : out_(out) {
    out_ << "t,veh_id,approach,lane,movement,pos_m,speed_mps,accel_mps2,waiting_s\n";
}

void TrajectoryWriter::write(const TrafficSnapshot &snapshot) {
    std::string t = format_number(snapshot.time);
    for (const Vehicle &v : snapshot.vehicles) {
        out_ << t << ',' << v.id << ',' << to_string(v.lane.approach) << ',' << v.lane.index << ','
             << to_string(v.movement) << ',' << format_number(v.pos) << ',' << format_number(v.speed) << ','
             << format_number(v.accel) << ',' << format_number(v.waiting_time) << '\n';
    }
}

EpisodeSummary run_episode(const ScenarioConfig &config, Controller &controller, std::uint64_t seed,
                           std::vector<StepRecord> *steps, TrajectoryWriter *trajectories) {
    Environment env(config, seed);
    SpeedTally speed;
    for (int t = 0; t < config.run.episode_length; ++t) {
        DetectorState det = env.detectors();
        ControlContext ctx{env.snapshot(), env.machine(), det};
        if (auto p = controller.decide(ctx))
            env.request(*p);
        StepRecord r = env.step();
        speed.add(r);
        if (steps)
            steps->push_back(r);
        if (trajectories)
            trajectories->write(env.snapshot());
    }
    return summarize(env, seed, speed);
}

TrainingResult run_training(const ScenarioConfig &config, ControllerKind kind,
                            const std::optional<std::filesystem::path> &out_dir) {
    config.validate();
    if (!is_agent(kind))
        throw ConfigError("controller: training needs te or sed");

    const RewardWeights initial = kind == ControllerKind::AgentTE ? RewardWeights{0.0, 1.0, 0.0} : config.weights;
    const CellGrid grid = build_grid(config.grid);
    TrainingResult result{{}, D3qnAgent(static_cast<int>(encoding_length(grid)), kPhases, config.agent)};
    D3qnAgent &agent = result.agent;
    RewardModel model(initial, config.normalization);
    const double gamma = config.agent.gamma;

    for (int ep = 0; ep < config.run.episodes; ++ep) {
        const std::uint64_t seed = config.run.train_seed + static_cast<std::uint64_t>(ep);
        Environment env(config, seed);
        TrainingEpisode row;
        row.episode = ep;
        row.seed = seed;
        row.weights = model.weights();

        // Seconds without a legal decision are folded into the open transition.
        std::optional<Transition> open;
        double discount = 1.0;
        double loss_sum = 0.0;
        int loss_n = 0;
        auto close = [&](std::vector<double> next_state) {
            open->next_state = std::move(next_state);
            if (auto loss = agent.observe(std::move(*open))) {
                loss_sum += *loss;
                ++loss_n;
            }
            open.reset();
        };

        SpeedTally speed;
        MetricsRecord prev = env.metrics();
        for (int t = 0; t < config.run.episode_length; ++t) {
            if (env.decision_point()) {
                std::vector<double> s = env.observe().values;
                if (open)
                    close(s);
                int a = agent.explore(s);
                ++row.decisions;
                open = Transition{std::move(s), a, 0.0, {}, false, 0};
                discount = 1.0;
                env.request(phase_from_index(a));
            }
            speed.add(env.step());
            MetricsRecord cur = env.metrics();
            double r = model.scalar(raw_rewards(prev, cur));
            prev = cur;
            row.reward += r;
            if (open) {
                open->reward += discount * r;
                discount *= gamma;
                ++open->steps;
            }
        }
        // Time limit, not a terminal state: keep bootstrapping.
        if (open)
            close(env.observe().values);

        row.epsilon = agent.current_epsilon();
        row.mean_loss = loss_n > 0 ? loss_sum / loss_n : 0.0;
        row.summary = summarize(env, seed, speed);
        result.episodes.push_back(row);

        const int every = config.run.entropy_reweight;
        if (kind == ControllerKind::AgentSED && every > 0 && (ep + 1) % every == 0) {
            try {
                Channels we = entropy_weights(model.samples(), initial).as_array();
                Channels w0 = initial.as_array();
                Channels blend{};
                for (int k = 0; k < kChannels; ++k)
                    blend[k] = 0.5 * w0[k] + 0.5 * we[k];
                model.set_weights(RewardWeights::from_array(blend));
            } catch (const InsufficientSamples &) {
            }
            model.clear_samples();
        }
    }

    if (out_dir) {
        std::ofstream episodes = open_output(*out_dir / "episodes.csv");
        write_episodes_csv(episodes, result.episodes);
        agent.save((*out_dir / "checkpoint.json").string());
    }
    return result;
}

std::vector<EpisodeSummary> run_eval(const ScenarioConfig &config, ControllerKind kind,
                                     const std::optional<std::string> &checkpoint,
                                     const std::optional<std::filesystem::path> &out_dir,
                                     const EvalOptions &options) {
    config.validate();
    std::unique_ptr<Controller> controller = make_controller(kind, config, checkpoint);
    std::vector<EpisodeSummary> summaries;
    std::ofstream steps_out;
    if (out_dir) {
        steps_out = open_output(*out_dir / "steps.csv");
        write_steps_header(steps_out, options.conflict_events);
    }
    for (std::size_t e = 0; e < config.run.eval_seeds.size(); ++e) {
        const std::uint64_t seed = config.run.eval_seeds[e];
        std::vector<StepRecord> steps;
        std::optional<std::ofstream> traj_out;
        std::optional<TrajectoryWriter> traj;
        if (out_dir && options.log_trajectories) {
            traj_out.emplace(open_output(*out_dir / ("trajectories_" + std::to_string(seed) + ".csv")));
            traj.emplace(*traj_out);
        }
        summaries.push_back(run_episode(config, *controller, seed, out_dir ? &steps : nullptr,
                                        traj ? &*traj : nullptr));
        for (const StepRecord &r : steps)
            write_step_row(steps_out, static_cast<int>(e), seed, r, options.conflict_events);
    }
    if (out_dir) {
        std::ofstream summary_out = open_output(*out_dir / "summary.csv");
        write_summary_csv(summary_out, summaries);
    }
    return summaries;
}

MetricStats stats_of(const std::vector<double> &values) {
    MetricStats s;
    if (values.empty())
        return s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
            ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

std::vector<ComparisonRow> summarize_comparison(
    const std::vector<std::pair<ControllerKind, std::vector<EpisodeSummary>>> &results) {
    std::vector<ComparisonRow> rows;
    for (const auto &[kind, summaries] : results) {
        auto column = [&](double EpisodeSummary::*field) {
            std::vector<double> v;
            for (const auto &s : summaries)
                v.push_back(s.*field);
            return stats_of(v);
        };
        ComparisonRow row;
        row.kind = kind;
        row.conflicts = column(&EpisodeSummary::conflicts);
        row.waiting = column(&EpisodeSummary::waiting_s);
        row.co2 = column(&EpisodeSummary::co2_g);
        row.served = column(&EpisodeSummary::served);
        row.speed = column(&EpisodeSummary::mean_speed);
        rows.push_back(row);
    }
    if (rows.empty())
        return rows;
    const ComparisonRow *base = &rows.front();
    for (const auto &r : rows) {
        if (r.kind == ControllerKind::FixedTime) {
            base = &r;
            break;
        }
    }
    auto delta = [](double value, double reference) {
        return reference != 0.0 ? 100.0 * (value - reference) / reference : 0.0;
    };
    const ComparisonRow ref = *base;
    for (auto &r : rows) {
        r.conflicts_delta_pct = delta(r.conflicts.mean, ref.conflicts.mean);
        r.waiting_delta_pct = delta(r.waiting.mean, ref.waiting.mean);
        r.co2_delta_pct = delta(r.co2.mean, ref.co2.mean);
    }
    return rows;
}

std::vector<ComparisonRow> compare(const ScenarioConfig &config, const std::vector<ControllerKind> &controllers,
                                   const std::vector<std::uint64_t> &seeds,
                                   std::map<ControllerKind, std::string> checkpoints,
                                   const std::optional<std::filesystem::path> &out_dir) {
    ScenarioConfig eval = config;
    eval.run.eval_seeds = seeds;
    eval.validate();
    std::vector<std::pair<ControllerKind, std::vector<EpisodeSummary>>> results;
    for (ControllerKind kind : controllers) {
        std::optional<std::string> checkpoint;
        if (auto it = checkpoints.find(kind); it != checkpoints.end()) {
            checkpoint = it->second;
        } else if (is_agent(kind)) {
            if (!out_dir)
                throw ConfigError("compare: " + std::string(to_string(kind)) + " needs a checkpoint or an output dir");
            auto dir = *out_dir / ("train_" + std::string(to_string(kind)));
            run_training(config, kind, dir);
            checkpoint = (dir / "checkpoint.json").string();
        }
        std::optional<std::filesystem::path> dir;
        if (out_dir)
            dir = *out_dir / ("eval_" + std::string(to_string(kind)));
        results.emplace_back(kind, run_eval(eval, kind, checkpoint, dir));
    }
    auto rows = summarize_comparison(results);
    if (out_dir) {
        std::ofstream out = open_output(*out_dir / "comparison.csv");
        write_comparison_csv(out, rows);
    }
    return rows;
}

std::string format_number(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_steps_header(std::ostream &out, bool conflict_events) {
    out << "episode,seed,t,phase,in_yellow,conflicts,ctc,cwt_s,co2_g,cde_g,queue,mean_speed,vehicles,served,"
           "r_ctc,r_cwt,r_cde";
    if (conflict_events)
        out << ",conflict_events";
    out << '\n';
}

void write_step_row(std::ostream &out, int episode, std::uint64_t seed, const StepRecord &r, bool conflict_events) {
    out << episode << ',' << seed << ',' << r.t << ',' << to_string(r.phase) << ',' << (r.in_yellow ? 1 : 0) << ','
        << r.conflicts << ',' << r.ctc << ',' << format_number(r.cwt) << ',' << format_number(r.co2_step) << ','
        << format_number(r.cde) << ',' << r.queue << ',' << format_number(r.mean_speed) << ',' << r.vehicles << ','
        << r.served << ',' << format_number(r.raw[0]) << ',' << format_number(r.raw[1]) << ','
        << format_number(r.raw[2]);
    if (conflict_events)
        out << ',' << r.conflict_events;
    out << '\n';
}

void write_summary_csv(std::ostream &out, const std::vector<EpisodeSummary> &summaries) {
    out << "seed,conflicts,waiting_s,co2_g,served,mean_speed\n";
    for (const auto &s : summaries) {
        out << s.seed << ',' << format_number(s.conflicts) << ',' << format_number(s.waiting_s) << ','
            << format_number(s.co2_g) << ',' << format_number(s.served) << ',' << format_number(s.mean_speed)
            << '\n';
    }
}

void write_episodes_csv(std::ostream &out, const std::vector<TrainingEpisode> &episodes) {
    out << "episode,seed,decisions,epsilon,reward,mean_loss,conflicts,waiting_s,co2_g,served,"
           "w_safety,w_efficiency,w_carbon\n";
    for (const auto &e : episodes) {
        out << e.episode << ',' << e.seed << ',' << e.decisions << ',' << format_number(e.epsilon) << ','
            << format_number(e.reward) << ',' << format_number(e.mean_loss) << ','
            << format_number(e.summary.conflicts) << ',' << format_number(e.summary.waiting_s) << ','
            << format_number(e.summary.co2_g) << ',' << format_number(e.summary.served) << ','
            << format_number(e.weights.safety) << ',' << format_number(e.weights.efficiency) << ','
            << format_number(e.weights.carbon) << '\n';
    }
}

void write_comparison_csv(std::ostream &out, const std::vector<ComparisonRow> &rows) {
    out << "controller,conflicts_mean,conflicts_sd,waiting_s_mean,waiting_s_sd,co2_g_mean,co2_g_sd,"
           "served_mean,served_sd,mean_speed_mean,mean_speed_sd,conflicts_delta_pct,waiting_delta_pct,"
           "co2_delta_pct\n";
    for (const auto &r : rows) {
        out << to_string(r.kind);
        for (const MetricStats *m : {&r.conflicts, &r.waiting, &r.co2, &r.served, &r.speed})
            out << ',' << format_number(m->mean) << ',' << format_number(m->stddev);
        out << ',' << format_number(r.conflicts_delta_pct) << ',' << format_number(r.waiting_delta_pct) << ','
            << format_number(r.co2_delta_pct) << '\n';
    }
}

} // namespace atsc
