#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ast/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string out = "out";
    long long searches = 0;
    long long workers = 0;
    long long top_k = 0;
    long long seed = 0;
    bool seed_set = false;
    long long budget_episodes = 0;
    long long budget_steps = 0;
    double budget_seconds = 0.0;
    std::string solver;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config file")->required();
    cmd->add_option("--out", f.out, "output directory (default: out)");
    cmd->add_option("--searches", f.searches, "independent searches to run")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--top-k", f.top_k, "paths kept per search")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "experiment base seed")
        ->check(CLI::NonNegativeNumber)
        ->each([&f](const std::string&) { f.seed_set = true; });
    cmd->add_option("--solver", f.solver, "solver: mcts or mc")
        ->check(CLI::IsMember({"mcts", "mc"}));
    auto* episodes = cmd->add_option("--budget-episodes", f.budget_episodes,
                                     "episode budget per search")
                         ->check(CLI::PositiveNumber);
    auto* steps =
        cmd->add_option("--budget-steps", f.budget_steps, "simulator step budget per search")
            ->check(CLI::PositiveNumber);
    auto* seconds = cmd->add_option("--budget-seconds", f.budget_seconds,
                                    "wall-clock budget per search, in seconds")
                        ->check(CLI::PositiveNumber);
    episodes->excludes(steps, seconds);
    steps->excludes(seconds);
}

ast::ExperimentSpec spec_from_flags(const CommonFlags& f, bool differential) {
    ast::ExperimentSpec spec =
        ast::load_experiment(ast::TomlDocument::parse_file(f.config), differential);
    if (f.searches > 0) spec.searches = static_cast<int>(f.searches);
    if (f.workers > 0) spec.workers = static_cast<int>(f.workers);
    if (f.top_k > 0) spec.search.top_k = static_cast<std::size_t>(f.top_k);
    if (f.seed_set) spec.base_seed = static_cast<std::uint64_t>(f.seed);
    if (!f.solver.empty()) {
        spec.solver =
            f.solver == "mcts" ? ast::SolverKind::mcts : ast::SolverKind::monte_carlo;
    }
    if (f.budget_episodes > 0) spec.budget = ast::Budget::episodes(f.budget_episodes);
    if (f.budget_steps > 0) spec.budget = ast::Budget::steps(f.budget_steps);
    if (f.budget_seconds > 0.0) spec.budget = ast::Budget::seconds(f.budget_seconds);
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seed-space stress testing toolkit"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand(
        "run", "search one simulator for its most likely failure paths");
    add_common_flags(run, run_flags);

    CommonFlags dast_flags;
    CLI::App* dast = app.add_subcommand(
        "dast", "differential search: failures of [test] that spare [baseline]");
    add_common_flags(dast, dast_flags);

    CommonFlags compare_flags;
    std::vector<long long> compare_episode_budgets;
    std::vector<long long> compare_step_budgets;
    std::vector<double> compare_second_budgets;
    CLI::App* compare =
        app.add_subcommand("compare", "tabulate mcts against mc across budgets");
    compare->add_option("--config", compare_flags.config, "experiment config file")
        ->required();
    compare->add_option("--out", compare_flags.out, "output directory (default: out)");
    compare->add_option("--searches", compare_flags.searches, "searches per solver/budget")
        ->check(CLI::PositiveNumber);
    compare->add_option("--workers", compare_flags.workers, "worker threads")
        ->check(CLI::PositiveNumber);
    compare->add_option("--seed", compare_flags.seed, "experiment base seed")
        ->check(CLI::NonNegativeNumber)
        ->each([&compare_flags](const std::string&) { compare_flags.seed_set = true; });
    auto* cmp_episodes = compare->add_option("--budget-episodes", compare_episode_budgets,
                                             "episode budget (repeatable)");
    auto* cmp_steps = compare->add_option("--budget-steps", compare_step_budgets,
                                          "step budget (repeatable)");
    auto* cmp_seconds = compare->add_option("--budget-seconds", compare_second_budgets,
                                            "seconds budget (repeatable)");
    cmp_episodes->excludes(cmp_steps, cmp_seconds);
    cmp_steps->excludes(cmp_seconds);

    std::string trace_path;
    CLI::App* replay = app.add_subcommand("replay", "verify a trace file bit for bit");
    replay->add_option("trace", trace_path, "trace file (trace_<i>.jsonl)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return ast::run_experiment_command(spec_from_flags(run_flags, false),
                                               run_flags.out, std::cout);
        }
        if (dast->parsed()) {
            return ast::run_experiment_command(spec_from_flags(dast_flags, true),
                                               dast_flags.out, std::cout);
        }
        if (compare->parsed()) {
            const ast::ExperimentSpec spec = spec_from_flags(compare_flags, false);
            std::vector<ast::Budget> budgets;
            for (long long n : compare_episode_budgets) {
                budgets.push_back(ast::Budget::episodes(n));
            }
            for (long long n : compare_step_budgets) budgets.push_back(ast::Budget::steps(n));
            for (double s : compare_second_budgets) {
                budgets.push_back(ast::Budget::seconds(s));
            }
            if (budgets.empty()) {
                throw std::invalid_argument(
                    "compare: give at least one --budget-episodes/steps/seconds");
            }
            return ast::compare_command(spec, budgets, compare_flags.out, std::cout);
        }
        if (replay->parsed()) {
            return ast::replay_trace_command(trace_path, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
