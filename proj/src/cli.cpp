#include "nsplan/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "nsplan/harness.hpp"
#include "nsplan/mdp.hpp"
#include "nsplan/report.hpp"

namespace nsplan {

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "results/run";
    std::string format = "table";  // csv | json | table
    bool plots = false;
    std::optional<long> seed;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "configuration file");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--format", flags.format, "stdout format: csv, json or table")
        ->check(CLI::IsMember({"csv", "json", "table"}));
    cmd->add_flag("--plots", flags.plots, "also write SVG return-vs-p plots");
    cmd->add_option("--seed", flags.seed, "base seed");
    cmd->add_option("--jobs", flags.jobs, "worker thread cap");
}

ConfigFile load_config(const CommonFlags& flags) {
    if (flags.config_path.empty()) return ConfigFile();
    return ConfigFile::load(flags.config_path);
}

void print_results(const std::vector<ScenarioResult>& results, const CommonFlags& flags,
                   std::ostream& out) {
    if (flags.format == "csv")
        out << render_summary_csv(results);
    else if (flags.format == "json")
        out << render_summary_json(results);
    else
        out << render_summary_table(results);
}

struct RunFlags {
    std::optional<std::string> env;
    std::optional<std::string> planner;
    std::optional<std::string> access;
    std::optional<double> p_new;
    std::optional<double> p_old;
    std::optional<int> episodes;
    std::optional<int> max_steps;
    std::optional<int> simulations;
    std::optional<double> gamma;
};

ScenarioConfig scenario_from(const CommonFlags& common, const RunFlags& flags) {
    ConfigFile file = load_config(common);
    // command-line overrides take precedence over config file values
    if (flags.env) file.set("scenario", "env", *flags.env);
    if (flags.planner) file.set("scenario", "planner", *flags.planner);
    if (flags.access) file.set("scenario", "model_access", *flags.access);
    if (flags.p_new) file.set("scenario", "p_new", format_number(*flags.p_new));
    if (flags.p_old) file.set("scenario", "p_old", format_number(*flags.p_old));
    if (flags.episodes) file.set("scenario", "episodes", std::to_string(*flags.episodes));
    if (flags.max_steps) file.set("scenario", "max_steps", std::to_string(*flags.max_steps));
    if (flags.gamma) file.set("scenario", "gamma", format_number(*flags.gamma));
    if (flags.simulations) file.set("search", "simulations", std::to_string(*flags.simulations));
    if (common.seed) file.set("scenario", "seed", std::to_string(*common.seed));
    if (common.jobs) file.set("scenario", "jobs", std::to_string(*common.jobs));
    return ScenarioConfig::from_config(file);
}

int cmd_run(const CommonFlags& common, const RunFlags& flags, std::ostream& out) {
    const ScenarioConfig cfg = scenario_from(common, flags);
    std::vector<ScenarioResult> results = {run_scenario(cfg)};
    write_results(results, common.out_dir, common.plots);
    print_results(results, common, out);
    out << "results written to " << common.out_dir << "\n";
    return 0;
}

int cmd_matrix(const CommonFlags& common, bool ablation, std::ostream& out) {
    ConfigFile file = load_config(common);
    if (common.seed) file.set("scenario", "seed", std::to_string(*common.seed));
    if (common.jobs) file.set("scenario", "jobs", std::to_string(*common.jobs));
    MatrixConfig cfg = MatrixConfig::from_config(file);
    cfg.base.validate();
    const std::vector<ScenarioResult> results = ablation ? run_ablation(cfg) : run_table1(cfg);
    write_results(results, common.out_dir, common.plots);
    print_results(results, common, out);
    out << "results written to " << common.out_dir << "\n";
    return 0;
}

int cmd_timing(const CommonFlags& common, std::ostream& out) {
    ConfigFile file = load_config(common);
    if (common.seed) file.set("scenario", "seed", std::to_string(*common.seed));
    TimingConfig cfg = TimingConfig::from_config(file);
    const std::vector<TimingRow> rows = run_timing(cfg);
    std::filesystem::create_directories(common.out_dir);
    write_text_file(common.out_dir + "/timing.csv", render_timing_csv(rows));
    if (common.format == "csv")
        out << render_timing_csv(rows);
    else
        out << render_timing_table(rows);
    out << "results written to " << common.out_dir << "\n";
    return 0;
}

int cmd_envs(const std::string& filter, std::ostream& out) {
    for (const auto& [name, env] : standard_layouts(0.7)) {
        if (!filter.empty() && name.find(filter) == std::string::npos) continue;
        const RewardScale& r = env.rewards();
        out << name << "  (" << env.layout().height << "x" << env.layout().width << ", "
            << (env.slip().kind == SlipModel::Kind::Perpendicular ? "perpendicular" : "opposite")
            << " slip, R_goal=" << format_number(r.goal) << " R_hole=" << format_number(r.hole)
            << " R_step=" << format_number(r.step) << ")\n";
        out << env.layout().to_text() << "\n";
    }
    return 0;
}

int cmd_oracle(const std::string& env_name, double p, const std::string& kind, int horizon,
               double tolerance, double gamma, std::ostream& out) {
    const EnvironmentInstance env = make_environment(env_name, p);
    const MdpSnapshot mdp = env.build_mdp(gamma);
    std::vector<double> values;
    if (kind == "exact")
        values = exact_value_iteration(mdp, tolerance);
    else
        values = pessimistic_value_iteration(mdp, horizon);
    out << env_name << " p=" << format_number(p) << " gamma=" << format_number(gamma) << " "
        << kind << (kind == "exact" ? " (tolerance " + format_number(tolerance) + ")"
                                    : " (horizon " + std::to_string(horizon) + ")")
        << "\n";
    const GridLayout& layout = env.layout();
    char buf[32];
    for (int row = 0; row < layout.height; ++row) {
        for (int col = 0; col < layout.width; ++col) {
            const StateId s = layout.state_of(row, col);
            if (layout.terminal(s))
                std::snprintf(buf, sizeof(buf), "%9s", layout.goal(s) ? "G" : "H");
            else
                std::snprintf(buf, sizeof(buf), "%9.4f", values[static_cast<std::size_t>(s)]);
            out << buf;
        }
        out << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Online planning in non-stationary MDPs: adaptive MCTS, risk-averse baselines "
                 "and a benchmark harness"};
    app.require_subcommand(1);

    CommonFlags common;
    RunFlags run_flags;

    CLI::App* run = app.add_subcommand("run", "run one scenario cell");
    add_common(run, common);
    run->add_option("--env", run_flags.env, "environment name");
    run->add_option("--planner", run_flags.planner, "mcts, ra-mcts, ada-mcts or rats");
    run->add_option("--model-access", run_flags.access,
                    "ground-truth-current, ground-truth-previous, learned-previous or learned");
    run->add_option("--p-new", run_flags.p_new, "slip parameter after the change")
        ->check(CLI::Range(0.0, 1.0));
    run->add_option("--p-old", run_flags.p_old, "slip parameter before the change")
        ->check(CLI::Range(0.0, 1.0));
    run->add_option("--episodes", run_flags.episodes, "episode count");
    run->add_option("--max-steps", run_flags.max_steps, "episode step cap");
    run->add_option("--sims", run_flags.simulations, "simulations per decision");
    run->add_option("--gamma", run_flags.gamma, "discount factor");

    CLI::App* table1 = app.add_subcommand("table1", "run the full planner comparison matrix");
    add_common(table1, common);
    CLI::App* ablation = app.add_subcommand("ablation", "run the component ablation matrix");
    add_common(ablation, common);
    CLI::App* timing = app.add_subcommand("timing", "per-decision timing, ada-mcts vs rats");
    add_common(timing, common);

    std::string envs_filter;
    CLI::App* envs = app.add_subcommand("envs", "list environments with previews");
    envs->add_option("--filter", envs_filter, "substring filter");

    std::string oracle_env = "frozen_lake_4x4";
    double oracle_p = 0.7;
    std::string oracle_kind = "exact";
    int oracle_horizon = 200;
    double oracle_tolerance = 1e-10;
    double oracle_gamma = 0.95;
    CLI::App* oracle = app.add_subcommand("oracle", "print a value-iteration table");
    oracle->add_option("--env", oracle_env, "environment name");
    oracle->add_option("--p", oracle_p, "slip parameter")->check(CLI::Range(0.0, 1.0));
    oracle->add_option("--kind", oracle_kind, "exact or pessimistic")
        ->check(CLI::IsMember({"exact", "pessimistic"}));
    oracle->add_option("--horizon", oracle_horizon, "pessimistic backup sweeps");
    oracle->add_option("--tolerance", oracle_tolerance, "exact fixed-point tolerance");
    oracle->add_option("--gamma", oracle_gamma, "discount factor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << "usage: see 'nsplan --help'\n";
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(common, run_flags, out);
        if (table1->parsed()) return cmd_matrix(common, false, out);
        if (ablation->parsed()) return cmd_matrix(common, true, out);
        if (timing->parsed()) return cmd_timing(common, out);
        if (envs->parsed()) return cmd_envs(envs_filter, out);
        if (oracle->parsed())
            return cmd_oracle(oracle_env, oracle_p, oracle_kind, oracle_horizon, oracle_tolerance,
                              oracle_gamma, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace nsplan
