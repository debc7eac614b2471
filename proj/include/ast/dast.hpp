#pragma once

#include <array>

#include "ast/reward.hpp"
#include "ast/sim.hpp"

namespace ast {

/// Lockstep pair of simulators for differential stress testing. Both
/// sub-simulators receive the same step seed while running, so any
/// divergence between their trajectories comes from their configurations,
/// not from the disturbance stream.
///
/// Sub-simulators terminate independently: a side whose pre-step terminal
/// flag is true is stepped one last time (its terminal read) and marked
/// absorbed; absorbed sides are no longer stepped and contribute nothing.
/// The combined episode terminates once both sides have terminated, so the
/// combined simulator satisfies the ordinary simulator contract and any
/// solver can drive it unchanged, with the reward supplied through
/// make_dast_reward instead of the single-simulator reward.
class CombinedSimulator final : public Simulator {
public:
    /// Non-owning; both simulators must outlive this object and be distinct.
    CombinedSimulator(Simulator& test, Simulator& baseline);

    void initialize() override;
    StepOutput step(Seed seed) override;
    bool is_terminal() const override;
    int max_steps() const override;

    /// Sub-simulator slices of the most recent step; feeds dast_reward.
    const SubSimStatus& test_status() const { return status_[0]; }
    const SubSimStatus& baseline_status() const { return status_[1]; }

    /// Terminal outcome of a side, valid once that side is absorbed.
    bool side_event(bool baseline) const { return final_event_[baseline ? 1 : 0]; }

private:
    bool side_terminated(int i) const;

    std::array<Simulator*, 2> sims_;  // [0] = test, [1] = baseline
    bool initialized_ = false;
    std::array<bool, 2> absorbed_{false, false};
    std::array<bool, 2> final_event_{false, false};
    std::array<double, 2> final_miss_{0.0, 0.0};
    std::array<SubSimStatus, 2> status_;
};

/// Reward seam adaptor: scores each combined step from the sub-simulator
/// statuses. The combined StepOutput passed by the solver is ignored; the
/// status pair carries strictly more information.
RewardFn make_dast_reward(const CombinedSimulator& combined, const RewardParams& params);

}  // namespace ast
