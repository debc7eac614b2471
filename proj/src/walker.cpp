#include "ast/walker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ast {

void WalkerConfig::validate() const {
    if (!(step_std > 0.0)) {
        throw std::invalid_argument("WalkerConfig: step_std must be > 0");
    }
    if (horizon < 1) {
        throw std::invalid_argument("WalkerConfig: horizon must be >= 1");
    }
}

double seed_to_disturbance(Seed seed, double step_std) {
    SplitMix64 gen(seed);
    return step_std * gen.next_normal();
}

WalkerTransition walker_transition(double position, double disturbance,
                                   const WalkerConfig& cfg) {
    const double density = normal_pdf(disturbance / cfg.step_std) / cfg.step_std;
    return {position + disturbance, density};
}

double walker_miss_distance(std::span<const double> positions, const WalkerConfig& cfg) {
    double highest = -std::numeric_limits<double>::infinity();
    for (double x : positions) highest = std::max(highest, x);
    return std::max(0.0, cfg.threshold - highest);
}

double analytic_optimum_log_likelihood(const WalkerConfig& cfg) {
    const double increment = (cfg.threshold - cfg.initial_position) / cfg.horizon;
    return cfg.horizon * log_normal_pdf(increment, cfg.step_std);
}

WalkerSim::WalkerSim(const WalkerConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void WalkerSim::initialize() {
    initialized_ = true;
    position_ = cfg_.initial_position;
    max_position_ = cfg_.initial_position;
    step_count_ = 0;
}

StepOutput WalkerSim::step(Seed seed) {
    require_initialized("step");

    StepOutput out;
    out.event = position_ >= cfg_.threshold;
    out.miss_distance = std::max(0.0, cfg_.threshold - max_position_);

    const double disturbance = seed_to_disturbance(seed, cfg_.step_std);
    const auto [next_position, likelihood] = walker_transition(position_, disturbance, cfg_);
    out.likelihood = likelihood;

    position_ = next_position;
    max_position_ = std::max(max_position_, position_);
    ++step_count_;
    return out;
}

bool WalkerSim::is_terminal() const {
    require_initialized("is_terminal");
    return position_ >= cfg_.threshold || step_count_ >= cfg_.horizon;
}

double WalkerSim::position() const {
    require_initialized("position");
    return position_;
}

int WalkerSim::step_count() const {
    require_initialized("step_count");
    return step_count_;
}

void WalkerSim::require_initialized(const char* op) const {
    if (!initialized_) {
        throw std::logic_error(std::string("WalkerSim::") + op + ": initialize() not called");
    }
}

}  // namespace ast
