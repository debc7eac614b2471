#include "ast/reward.hpp"

#include <cmath>
#include <stdexcept>

namespace ast {

void RewardParams::validate() const {
    if (!(event_reward >= 0.0)) {
        throw std::invalid_argument("RewardParams: event_reward must be >= 0");
    }
    if (!(miss_distance_fallback >= 0.0)) {
        throw std::invalid_argument("RewardParams: miss_distance_fallback must be >= 0");
    }
}

namespace {

double effective_miss(const StepOutput& output, const RewardParams& params) {
    return std::isnan(output.miss_distance) ? params.miss_distance_fallback
                                            : output.miss_distance;
}

}  // namespace

double ast_reward(const StepOutput& output, bool terminal_before_step,
                  const RewardParams& params) {
    if (terminal_before_step) {
        return output.event ? params.event_reward : -effective_miss(output, params);
    }
    return std::log(output.likelihood);
}

double dast_reward(const SubSimStatus& test, const SubSimStatus& baseline,
                   const RewardParams& params) {
    if (test.phase == SubSimPhase::absorbed && baseline.phase == SubSimPhase::absorbed) {
        throw std::logic_error("dast_reward: both sub-simulators absorbed");
    }

    const auto contribution = [&](const SubSimStatus& s, double terminal_sign) {
        switch (s.phase) {
            case SubSimPhase::running:
                return std::log(s.output->likelihood);
            case SubSimPhase::just_terminal:
                return terminal_sign * (s.output->event
                                            ? params.event_reward
                                            : -effective_miss(*s.output, params));
            case SubSimPhase::absorbed:
                return 0.0;
        }
        return 0.0;
    };

    return contribution(test, +1.0) + contribution(baseline, -1.0);
}

double path_return(std::span<const double> rewards) {
    double total = 0.0;
    for (double r : rewards) total += r;
    return total;
}

RewardFn make_ast_reward(const RewardParams& params) {
    return [params](const StepOutput& output, bool terminal_before_step) {
        return ast_reward(output, terminal_before_step, params);
    };
}

}  // namespace ast
