#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ast/encounter.hpp"
#include "ast/mcts.hpp"
#include "ast/monte_carlo.hpp"
#include "ast/reward.hpp"
#include "ast/search_result.hpp"
#include "ast/toml_lite.hpp"
#include "ast/trace.hpp"
#include "ast/walker.hpp"

namespace ast {

/// Experiment harness: turns a config file plus command-line overrides into
/// repeated stress-testing searches with reproducible outputs (summary.csv,
/// one JSONL trace per search, compare.csv for solver comparisons). Output
/// files are byte-identical for a fixed spec, independent of worker count;
/// wall-clock time is deliberately kept out of them.

enum class SimKind { walker, encounter };
enum class SolverKind { mcts, monte_carlo };

struct SimSpec {
    SimKind kind = SimKind::walker;
    WalkerConfig walker;
    EncounterConfig encounter;

    void validate() const;
};

struct ExperimentSpec {
    std::string name = "experiment";
    int searches = 1;
    int workers = 1;
    std::uint64_t base_seed = 0;

    /// Single-simulator mode uses `sim`; differential mode uses the
    /// test/baseline pair stepped in lockstep.
    bool differential = false;
    SimSpec sim;
    SimSpec test_sim;
    SimSpec baseline_sim;

    SolverKind solver = SolverKind::mcts;
    SearchConfig search;  ///< rng_seed is overwritten per search
    /// When unset, the budget is search.iterations episodes.
    std::optional<Budget> budget;
    RewardParams reward;

    Budget effective_budget() const;
    void validate() const;
};

/// Reads an experiment from a parsed config. Sections: [experiment],
/// [simulation] (key `kind` = "walker" | "encounter" plus that simulator's
/// parameters), [solver], [reward], and in differential mode [test] and
/// [baseline], which override [simulation] per side. Unknown sections or
/// keys are errors.
ExperimentSpec load_experiment(const TomlDocument& doc, bool differential);

/// JSON descriptions embedded in trace headers, and their inverses used to
/// rebuild simulators for replay verification.
nlohmann::ordered_json sim_spec_json(const SimSpec& spec);
SimSpec sim_spec_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json reward_json(const RewardParams& params);
RewardParams reward_from_json(const nlohmann::ordered_json& j);

std::unique_ptr<Simulator> make_simulator(const SimSpec& spec);

/// Solver seed for one search: a stream derived from the experiment base
/// seed and the search index.
std::uint64_t search_seed(std::uint64_t base_seed, int index);

/// Runs spec.searches independent searches across spec.workers threads and
/// returns the results in search order.
std::vector<SearchResult> run_searches(const ExperimentSpec& spec);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<SearchResult>& results);
void write_trace_files(const std::string& out_dir, const ExperimentSpec& spec,
                       const std::vector<SearchResult>& results);

/// Per-simulator trace extras (post-step state snapshots).
TraceExtras make_trace_extras(Simulator& sim);

struct CompareRow {
    std::string budget_mode;
    double budget_amount = 0.0;
    std::string solver;
    int searches = 0;
    double find_rate = 0.0;
    double mean_best_return = 0.0;
    double sem_best_return = 0.0;
};

/// Runs both solvers at each budget and tabulates find rates and best
/// returns across searches.
std::vector<CompareRow> compare_solvers(const ExperimentSpec& spec,
                                        const std::vector<Budget>& budgets);
void write_compare_csv(const std::string& path, const std::vector<CompareRow>& rows);

/// Command bodies behind the CLI. Return process exit codes; `log` receives
/// the human-readable progress lines.
int run_experiment_command(const ExperimentSpec& spec, const std::string& out_dir,
                           std::ostream& log);
int compare_command(const ExperimentSpec& spec, const std::vector<Budget>& budgets,
                    const std::string& out_dir, std::ostream& log);

/// Replay verification: rebuilds the simulator named in the trace header,
/// replays the recorded seeds, and compares every recorded number exactly.
/// Exit codes: 0 verified, 1 unusable trace (parse/rebuild failure),
/// 2 mismatch (the trace does not reproduce).
int replay_trace_command(const std::string& trace_path, std::ostream& log);

}  // namespace ast
