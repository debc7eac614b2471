#pragma once

#include <span>

#include "ast/sim.hpp"

namespace ast {

/// One-dimensional random walk toward a threshold. The state is a scalar
/// position; each step adds a zero-mean Gaussian disturbance drawn from the
/// step seed. The failure set is {position >= threshold}. Its per-step
/// likelihood and the closed-form optimum below make it the reference
/// simulator for solver tests.
struct WalkerConfig {
    double threshold = 15.0;
    int horizon = 20;           ///< t_max
    double step_std = 1.0;      ///< disturbance standard deviation
    double initial_position = 0.0;

    void validate() const;
};

/// Disturbance encoded by a seed: step_std * Phi^-1(u(seed)) with u the
/// fixed 53-bit uniform mapping. Monotone in the mixed uniform and linear
/// in step_std.
double seed_to_disturbance(Seed seed, double step_std);

/// Pure transition kernel: returns the new position and the density of the
/// disturbance under the walk model.
struct WalkerTransition {
    double position;
    double likelihood;
};
WalkerTransition walker_transition(double position, double disturbance, const WalkerConfig& cfg);

/// Trajectory miss distance: shortfall of the highest position reached,
/// max(0, threshold - max_t x_t).
double walker_miss_distance(std::span<const double> positions, const WalkerConfig& cfg);

/// Log-likelihood of the equal-increment path that reaches the threshold
/// exactly at the horizon: T * log(phi_sigma((threshold - x0) / T)). This is
/// the optimum among full-horizon event paths; paths that cross earlier can
/// score higher when the per-step density cost outweighs spreading the climb.
double analytic_optimum_log_likelihood(const WalkerConfig& cfg);

class WalkerSim final : public Simulator {
public:
    explicit WalkerSim(const WalkerConfig& cfg);

    void initialize() override;
    StepOutput step(Seed seed) override;
    bool is_terminal() const override;
    int max_steps() const override { return cfg_.horizon; }

    const WalkerConfig& config() const { return cfg_; }
    double position() const;
    int step_count() const;

private:
    void require_initialized(const char* op) const;

    WalkerConfig cfg_;
    bool initialized_ = false;
    double position_ = 0.0;
    double max_position_ = 0.0;
    int step_count_ = 0;
};

}  // namespace ast
