#pragma once

#include <functional>
#include <memory>
#include <random>

#include "ast/search_result.hpp"
#include "ast/sim.hpp"

namespace ast {

/// Monte Carlo tree search over seed sequences with progressive widening.
///
/// The tree is keyed by the sequence of step seeds from the root; seeds are
/// the only actions. Each iteration runs one full episode (initialize to
/// terminal): descend the tree by UCT, append at most one leaf, finish with
/// a uniform-seed rollout, and back up the return along the traversed edges.
/// The best complete paths seen anywhere, rollout tails included, are kept
/// in a BestPathList.

struct SearchConfig {
    long long iterations = 2000;        ///< episode budget (run(Budget) overrides)
    double k = 0.5;                     ///< progressive widening scale
    double alpha = 0.85;                ///< progressive widening exponent
    double exploration_constant = 100.0;
    std::size_t top_k = 10;
    std::uint64_t rng_seed = 0;         ///< seeds the solver's own generator

    /// Override for the seed universe. Default draws uniform 64-bit seeds;
    /// tests substitute small alphabets to compare against exhaustive
    /// enumeration.
    std::function<Seed(std::mt19937_64&)> seed_sampler;

    void validate() const;
};

struct EdgeStats {
    long long visit_count = 0;
    double q_value = 0.0;
};

/// Incremental-mean backup: N += 1, Q += (q - Q) / N.
void update_edge(EdgeStats& edge, double q);

struct TreeNode {
    struct Child {
        Seed seed = 0;
        EdgeStats stats;
        std::unique_ptr<TreeNode> node;  ///< created on first descent through this edge
    };

    long long visit_count = 0;
    std::vector<Child> children;  ///< insertion order preserved

    const Child* find(Seed seed) const;
};

/// Progressive widening test: grow the child set while
/// |children| < k * N^alpha (strict).
bool should_widen(std::size_t child_count, long long visit_count, double k, double alpha);

/// UCT pick among a node's children: maximize Q + c * sqrt(ln N(node) / N(edge)).
/// Zero-visit children count as infinitely attractive and are taken first in
/// insertion order; score ties go to the lower edge visit count, then to
/// insertion order. The node must have at least one child.
std::size_t select_child_index(const TreeNode& node, double exploration_constant);

/// Test observation points; not used by production callers.
struct SearchHooks {
    /// After each edge backup on the way out of an episode.
    std::function<void(const TreeNode& parent, Seed seed, double q, const EdgeStats& after)>
        on_backup;
    /// After each completed episode.
    std::function<void(long long iteration, double episode_return, double best_return)>
        on_episode;
};

class MctsSearch {
public:
    /// `sim` and `reward` must outlive the search. One run() per instance.
    MctsSearch(Simulator& sim, RewardFn reward, SearchConfig config, SearchHooks hooks = {});

    SearchResult run() { return run(Budget::episodes(config_.iterations)); }
    SearchResult run(const Budget& budget);

    /// Tree inspection for invariant checks (valid after run()).
    const TreeNode& root() const { return root_; }
    const SearchConfig& config() const { return config_; }

private:
    double simulate(TreeNode& node);
    double rollout();
    void maybe_widen(TreeNode& node);
    TreeNode::Child& select_child(TreeNode& node);
    Seed sample_seed();
    StepOutput take_step(Seed seed, bool& terminal_before_step);
    void complete_episode();

    Simulator* sim_;
    RewardFn reward_;
    SearchConfig config_;
    SearchHooks hooks_;
    std::mt19937_64 rng_;

    TreeNode root_;
    BestPathList best_paths_;
    SearchStats stats_;

    // Scratch state for the episode in flight.
    SeedSequence episode_seeds_;
    std::vector<StepOutput> episode_outputs_;
    std::vector<bool> episode_flags_;
    std::vector<double> episode_rewards_;
    bool episode_done_ = false;
};

/// One-shot convenience wrappers.
SearchResult mcts_search(Simulator& sim, const RewardFn& reward, const SearchConfig& config);
SearchResult mcts_search(Simulator& sim, const RewardFn& reward, const SearchConfig& config,
                         const Budget& budget);

}  // namespace ast
