#include "ast/monte_carlo.hpp"

#include <chrono>
#include <stdexcept>

#include "ast/reward.hpp"

namespace ast {

void McConfig::validate() const {
    if (top_k == 0) throw std::invalid_argument("McConfig: top_k must be >= 1");
}

SearchResult mc_search(Simulator& sim, const RewardFn& reward, const McConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.rng_seed);
    const auto draw = [&] { return config.seed_sampler ? config.seed_sampler(rng) : rng(); };

    BestPathList best(config.top_k);
    SearchStats stats;

    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    TrajectoryRecord trajectory;
    while (!config.budget.exhausted(stats.episodes, stats.step_calls, elapsed())) {
        sim.initialize();
        trajectory = TrajectoryRecord{};

        bool tau = false;
        while (!tau) {
            const Seed seed = draw();
            tau = sim.is_terminal();
            const StepOutput out = sim.step(seed);
            ++stats.step_calls;
            const double r = reward(out, tau);
            trajectory.seeds.push_back(seed);
            trajectory.step_outputs.push_back(out);
            trajectory.terminal_flags.push_back(tau);
            trajectory.rewards.push_back(r);
        }
        trajectory.return_value = path_return(trajectory.rewards);
        trajectory.event_reached = trajectory.step_outputs.back().event;

        PathResult path;
        path.seeds.assign(trajectory.seeds.begin(), trajectory.seeds.end() - 1);
        path.return_value = trajectory.return_value;
        path.event_reached = trajectory.event_reached;
        path.trajectory = std::move(trajectory);
        best.offer(std::move(path));
        ++stats.episodes;
    }

    stats.wall_seconds = elapsed();
    return SearchResult{std::move(best), stats};
}

}  // namespace ast
