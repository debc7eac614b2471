#include "ast/sim.hpp"

namespace ast {

namespace {

void push_step(TrajectoryRecord& rec, Seed seed, const StepOutput& out, bool tau, double r) {
    rec.seeds.push_back(seed);
    rec.step_outputs.push_back(out);
    rec.terminal_flags.push_back(tau);
    rec.rewards.push_back(r);
    rec.return_value += r;
}

}  // namespace

TrajectoryRecord replay(Simulator& sim, const SeedSequence& seeds, const RewardFn& reward) {
    TrajectoryRecord rec;
    sim.initialize();

    bool read_done = false;
    for (Seed seed : seeds) {
        const bool tau = sim.is_terminal();
        const StepOutput out = sim.step(seed);
        push_step(rec, seed, out, tau, reward(out, tau));
        if (tau) {
            read_done = true;
            break;
        }
    }
    if (!read_done && sim.is_terminal()) {
        const StepOutput out = sim.step(kTerminalReadSeed);
        push_step(rec, kTerminalReadSeed, out, true, reward(out, true));
        read_done = true;
    }
    if (read_done) {
        rec.event_reached = rec.step_outputs.back().event;
    }
    return rec;
}

}  // namespace ast
