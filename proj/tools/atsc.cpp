#include "atsc/config.hpp"
#include "atsc/errors.hpp"
#include "atsc/harness.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string &text) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw atsc::ConfigError("--seeds: '" + item + "' is not a non-negative integer");
        seeds.push_back(std::stoull(item));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return seeds;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Single-intersection adaptive signal control experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;

    auto *train = app.add_subcommand("train", "Train a D3QN signal agent");
    std::string train_controller = "sed";
    std::optional<int> entropy_reweight;
    train->add_option("--config", config_path, "Scenario config (JSON)")->required();
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_option("--controller", train_controller, "te or sed")->check(CLI::IsMember({"te", "sed"}));
    train->add_option("--entropy-reweight", entropy_reweight, "Episodes between entropy reweights")
        ->check(CLI::NonNegativeNumber);

    auto *eval = app.add_subcommand("eval", "Evaluate a controller on the configured evaluation seeds");
    std::string eval_controller;
    std::optional<std::string> checkpoint;
    atsc::EvalOptions eval_options;
    eval->add_option("--config", config_path, "Scenario config (JSON)")->required();
    eval->add_option("--controller", eval_controller, "fixed|actuated|te|sed")
        ->required()
        ->check(CLI::IsMember({"fixed", "actuated", "te", "sed"}));
    eval->add_option("--checkpoint", checkpoint, "Agent checkpoint (te/sed)");
    eval->add_option("--out", out_dir, "Output directory")->required();
    eval->add_flag("--log-trajectories", eval_options.log_trajectories, "Write per-vehicle trajectories");
    eval->add_flag("--conflict-events", eval_options.conflict_events, "Add a conflict onset column");

    auto *cmp = app.add_subcommand("compare", "Compare controllers on shared seeds");
    std::string seeds_text;
    std::vector<std::string> cmp_controllers{"fixed", "actuated", "te", "sed"};
    std::string te_checkpoint, sed_checkpoint;
    cmp->add_option("--config", config_path, "Scenario config (JSON)")->required();
    cmp->add_option("--seeds", seeds_text, "Comma-separated seeds")->required();
    cmp->add_option("--out", out_dir, "Output directory")->required();
    cmp->add_option("--controllers", cmp_controllers, "Subset to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"fixed", "actuated", "te", "sed"}));
    cmp->add_option("--te-checkpoint", te_checkpoint, "Skip TE training and use this checkpoint");
    cmp->add_option("--sed-checkpoint", sed_checkpoint, "Skip SED training and use this checkpoint");

    CLI11_PARSE(app, argc, argv);

    try {
        atsc::ScenarioConfig config = atsc::load_config(config_path);
        if (train->parsed()) {
            if (entropy_reweight)
                config.run.entropy_reweight = *entropy_reweight;
            auto result = atsc::run_training(config, atsc::parse_controller(train_controller), out_dir);
            std::cout << "trained " << result.episodes.size() << " episodes";
            if (!result.episodes.empty()) {
                const auto &last = result.episodes.back();
                std::cout << "; last: conflicts " << atsc::format_number(last.summary.conflicts) << ", waiting "
                          << atsc::format_number(last.summary.waiting_s) << " s, co2 "
                          << atsc::format_number(last.summary.co2_g) << " g";
            }
            std::cout << '\n';
        } else if (eval->parsed()) {
            auto summaries =
                atsc::run_eval(config, atsc::parse_controller(eval_controller), checkpoint, out_dir, eval_options);
            std::cout << "evaluated " << summaries.size() << " episodes into " << out_dir << '\n';
        } else if (cmp->parsed()) {
            std::vector<atsc::ControllerKind> kinds;
            for (const auto &c : cmp_controllers)
                kinds.push_back(atsc::parse_controller(c));
            std::map<atsc::ControllerKind, std::string> checkpoints;
            if (!te_checkpoint.empty())
                checkpoints[atsc::ControllerKind::AgentTE] = te_checkpoint;
            if (!sed_checkpoint.empty())
                checkpoints[atsc::ControllerKind::AgentSED] = sed_checkpoint;
            auto rows = atsc::compare(config, kinds, parse_seeds(seeds_text), checkpoints, out_dir);
            atsc::write_comparison_csv(std::cout, rows);
        }
    } catch (const std::exception &e) {
        std::cerr << "atsc: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
