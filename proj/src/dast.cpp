#include "ast/dast.hpp"

#include <algorithm>
#include <stdexcept>

namespace ast {

CombinedSimulator::CombinedSimulator(Simulator& test, Simulator& baseline)
    : sims_{&test, &baseline} {
    if (&test == &baseline) {
        throw std::invalid_argument("CombinedSimulator: test and baseline must be distinct");
    }
}

void CombinedSimulator::initialize() {
    for (Simulator* s : sims_) s->initialize();
    initialized_ = true;
    absorbed_ = {false, false};
    final_event_ = {false, false};
    final_miss_ = {0.0, 0.0};
    status_ = {SubSimStatus{}, SubSimStatus{}};
}

bool CombinedSimulator::side_terminated(int i) const {
    return absorbed_[i] || sims_[i]->is_terminal();
}

bool CombinedSimulator::is_terminal() const {
    if (!initialized_) {
        throw std::logic_error("CombinedSimulator::is_terminal: initialize() not called");
    }
    return side_terminated(0) && side_terminated(1);
}

StepOutput CombinedSimulator::step(Seed seed) {
    if (!initialized_) {
        throw std::logic_error("CombinedSimulator::step: initialize() not called");
    }
    if (absorbed_[0] && absorbed_[1]) {
        throw std::logic_error("CombinedSimulator::step: both sub-simulators absorbed");
    }
    const bool terminal_read = is_terminal();

    double likelihood = 1.0;
    for (int i = 0; i < 2; ++i) {
        if (absorbed_[i]) {
            status_[i] = SubSimStatus{SubSimPhase::absorbed, std::nullopt};
            continue;
        }
        const bool tau = sims_[i]->is_terminal();
        const StepOutput out = sims_[i]->step(seed);
        if (tau) {
            status_[i] = SubSimStatus{SubSimPhase::just_terminal, out};
            absorbed_[i] = true;
            final_event_[i] = out.event;
            final_miss_[i] = out.miss_distance;
        } else {
            status_[i] = SubSimStatus{SubSimPhase::running, out};
            likelihood *= out.likelihood;
        }
    }

    StepOutput out;
    out.likelihood = likelihood;
    // The differential event exists only for the completed episode, so it is
    // reported on the combined terminal read and false before that.
    out.event = terminal_read && final_event_[0] && !final_event_[1];
    out.miss_distance = status_[0].output ? status_[0].output->miss_distance : final_miss_[0];
    return out;
}

int CombinedSimulator::max_steps() const {
    return std::max(sims_[0]->max_steps(), sims_[1]->max_steps());
}

RewardFn make_dast_reward(const CombinedSimulator& combined, const RewardParams& params) {
    return [&combined, params](const StepOutput&, bool) {
        return dast_reward(combined.test_status(), combined.baseline_status(), params);
    };
}

}  // namespace ast
