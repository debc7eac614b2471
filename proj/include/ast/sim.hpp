#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ast/seed.hpp"

namespace ast {

/// What a simulator reports for one step call. All three values describe the
/// state the simulator was in *before* the transition: `likelihood` is the
/// probability density of the disturbance drawn from `seed` under that
/// state's disturbance model, `event` says whether that state already lies in
/// the failure set, and `miss_distance` says how close the trajectory has
/// come to it so far (0 only on or past the boundary).
struct StepOutput {
    double likelihood = 1.0;
    bool event = false;
    double miss_distance = 0.0;

    bool operator==(const StepOutput&) const = default;
};

/// Black-box seeded simulator. Hidden state, three entry points.
///
/// An episode is: initialize(); then repeatedly observe is_terminal() and
/// call step(seed). When is_terminal() turns true the episode is over, but
/// one more step call (the "terminal read") is still made: its output carries
/// the event flag and miss distance of the terminal state, which are not
/// observable any other way. Seeds recorded for replay exclude that final
/// read.
class Simulator {
public:
    virtual ~Simulator() = default;

    /// Reset to the initial state. Idempotent; required before stepping.
    virtual void initialize() = 0;

    /// Advance one step, with every stochastic choice driven by `seed`.
    /// Throws std::logic_error if the simulator was never initialized.
    virtual StepOutput step(Seed seed) = 0;

    /// True iff the current state is in the failure set or the step count
    /// has reached max_steps().
    virtual bool is_terminal() const = 0;

    /// Horizon t_max: every episode terminates within this many steps.
    virtual int max_steps() const = 0;
};

/// Reward seam between simulators and solvers: maps one step's output plus
/// the pre-step terminal flag to a scalar reward. Solvers are agnostic to
/// what the function computes (single-simulator stress reward, differential
/// reward, ...).
using RewardFn = std::function<double(const StepOutput& output, bool terminal_before_step)>;

/// Seed used for the terminal read during replay. The reward of that step
/// never depends on the seed (terminal branches ignore the likelihood), so
/// any fixed value keeps replays bit-identical.
inline constexpr Seed kTerminalReadSeed = 0;

/// Everything one deterministic pass over a seed sequence produced.
/// The vectors are index-aligned, one entry per step call made, including
/// the terminal read when one happened.
struct TrajectoryRecord {
    SeedSequence seeds;
    std::vector<StepOutput> step_outputs;
    std::vector<bool> terminal_flags;  ///< pre-step terminal flag per call
    std::vector<double> rewards;
    double return_value = 0.0;
    bool event_reached = false;

    std::size_t size() const { return seeds.size(); }
    bool operator==(const TrajectoryRecord&) const = default;
};

/// Deterministically re-run `seeds` through `sim`.
///
/// Per step: record the pre-step terminal flag, call step, score the step
/// with `reward`, accumulate the return in step order. Stops after the step
/// whose pre-step flag was true (that step is the terminal read). If the
/// sequence is exhausted with the simulator sitting on a terminal state
/// (an empty sequence on a terminal initial state included), the terminal
/// read is performed with kTerminalReadSeed so the terminal reward is still
/// collected. An empty sequence on a non-terminal initial state yields an
/// empty record.
TrajectoryRecord replay(Simulator& sim, const SeedSequence& seeds, const RewardFn& reward);

/// Pass-through wrapper that counts step calls; used for budget accounting
/// checks and complexity measurements.
class CountingSimulator final : public Simulator {
public:
    explicit CountingSimulator(Simulator& inner) : inner_(&inner) {}

    void initialize() override { inner_->initialize(); }
    StepOutput step(Seed seed) override {
        ++step_calls_;
        return inner_->step(seed);
    }
    bool is_terminal() const override { return inner_->is_terminal(); }
    int max_steps() const override { return inner_->max_steps(); }

    long long step_calls() const { return step_calls_; }
    void reset_count() { step_calls_ = 0; }

private:
    Simulator* inner_;
    long long step_calls_ = 0;
};

}  // namespace ast
