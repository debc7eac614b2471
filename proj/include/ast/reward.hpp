#pragma once

#include <optional>
#include <span>

#include "ast/sim.hpp"

namespace ast {

/// Parameters of the stress-testing reward.
struct RewardParams {
    /// Bonus paid when an episode terminates inside the failure set. Should
    /// dominate the achievable miss-distance penalties so that failing paths
    /// always outrank near misses.
    double event_reward = 100.0;
    /// Miss distance substituted when a simulator reports none (NaN).
    double miss_distance_fallback = 1000.0;

    void validate() const;
};

/// Reward for one step of a single-simulator episode, Markov in this step's
/// output and the pre-step terminal flag:
///
///   terminal and event     ->  event_reward
///   terminal and no event  ->  -miss_distance
///   otherwise              ->  log(likelihood)
///
/// Maximizing the undiscounted sum therefore maximizes trajectory
/// log-likelihood among failing paths, and closeness to failure otherwise.
double ast_reward(const StepOutput& output, bool terminal_before_step, const RewardParams& params);

/// Where a sub-simulator of a combined differential episode is in its life
/// cycle at a given combined step.
enum class SubSimPhase {
    running,        ///< stepped normally this combined step
    just_terminal,  ///< pre-step terminal flag was true; its terminal reward is paid now
    absorbed,       ///< already paid out earlier; contributes nothing
};

/// Per-sub-simulator slice of one combined step. `output` is present unless
/// the sub-simulator is absorbed (absorbed simulators are not stepped).
struct SubSimStatus {
    SubSimPhase phase = SubSimPhase::running;
    std::optional<StepOutput> output;
};

/// Differential reward for one combined step: the test simulator contributes
/// its stress reward with the usual signs, the baseline contributes with the
/// signs flipped on the terminal terms, and both contribute log-likelihood
/// while running. Each terminal term is paid exactly once (on the
/// just_terminal step); absorbed simulators contribute zero.
///
/// Maximizing the sum favors seeds that fail the test simulator while the
/// baseline survives. Throws std::logic_error when both are absorbed (no
/// such combined step exists in a well-formed episode).
double dast_reward(const SubSimStatus& test, const SubSimStatus& baseline,
                   const RewardParams& params);

/// Undiscounted return: plain left-to-right sum. Solvers, replay, and tests
/// all total rewards through this one function so that returns compare
/// bit-identically.
double path_return(std::span<const double> rewards);

/// Bind ast_reward into the solver-facing reward seam.
RewardFn make_ast_reward(const RewardParams& params);

}  // namespace ast
