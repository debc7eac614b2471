#pragma once

#include <functional>
#include <random>

#include "ast/search_result.hpp"
#include "ast/sim.hpp"

namespace ast {

/// Direct Monte Carlo baseline: independent episodes with uniform seeds,
/// scored with the same reward seam and collected into the same result types
/// as the tree search, so solver comparisons differ only in search policy.
struct McConfig {
    Budget budget = Budget::episodes(1000);
    std::size_t top_k = 10;
    std::uint64_t rng_seed = 0;

    /// Same test-only override as SearchConfig::seed_sampler.
    std::function<Seed(std::mt19937_64&)> seed_sampler;

    void validate() const;
};

SearchResult mc_search(Simulator& sim, const RewardFn& reward, const McConfig& config);

}  // namespace ast
