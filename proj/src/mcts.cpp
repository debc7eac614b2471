#include "ast/mcts.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ast/reward.hpp"

namespace ast {

void SearchConfig::validate() const {
    if (iterations < 0) throw std::invalid_argument("SearchConfig: iterations must be >= 0");
    if (!(k > 0.0)) throw std::invalid_argument("SearchConfig: k must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("SearchConfig: alpha must lie in (0, 1)");
    }
    if (!(exploration_constant >= 0.0)) {
        throw std::invalid_argument("SearchConfig: exploration_constant must be >= 0");
    }
    if (top_k == 0) throw std::invalid_argument("SearchConfig: top_k must be >= 1");
}

void update_edge(EdgeStats& edge, double q) {
    edge.visit_count += 1;
    edge.q_value += (q - edge.q_value) / static_cast<double>(edge.visit_count);
}

const TreeNode::Child* TreeNode::find(Seed seed) const {
    for (const Child& c : children) {
        if (c.seed == seed) return &c;
    }
    return nullptr;
}

bool should_widen(std::size_t child_count, long long visit_count, double k, double alpha) {
    return static_cast<double>(child_count) <
           k * std::pow(static_cast<double>(visit_count), alpha);
}

std::size_t select_child_index(const TreeNode& node, double exploration_constant) {
    if (node.children.empty()) {
        throw std::logic_error("select_child_index: node has no children");
    }
    // Never-tried children carry an infinite exploration bonus: take the
    // earliest-inserted one.
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (node.children[i].stats.visit_count == 0) return i;
    }

    const double log_n = std::log(static_cast<double>(node.visit_count));
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        const EdgeStats& stats = node.children[i].stats;
        const double n = static_cast<double>(stats.visit_count);
        const double score = stats.q_value + exploration_constant * std::sqrt(log_n / n);
        // Ties go to the lower visit count, then to insertion order.
        if (score > best_score ||
            (score == best_score &&
             stats.visit_count < node.children[best].stats.visit_count)) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

MctsSearch::MctsSearch(Simulator& sim, RewardFn reward, SearchConfig config, SearchHooks hooks)
    : sim_(&sim),
      reward_(std::move(reward)),
      config_(std::move(config)),
      hooks_(std::move(hooks)),
      rng_(config_.rng_seed),
      best_paths_(config_.top_k) {
    config_.validate();
}

SearchResult MctsSearch::run(const Budget& budget) {
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    while (!budget.exhausted(stats_.episodes, stats_.step_calls, elapsed())) {
        sim_->initialize();
        episode_seeds_.clear();
        episode_outputs_.clear();
        episode_flags_.clear();
        episode_rewards_.clear();
        episode_done_ = false;

        simulate(root_);

        ++stats_.episodes;
        if (hooks_.on_episode) {
            const double episode_return = path_return(episode_rewards_);
            const double best = best_paths_.empty()
                                    ? -std::numeric_limits<double>::infinity()
                                    : best_paths_.best().return_value;
            hooks_.on_episode(stats_.episodes, episode_return, best);
        }
    }

    stats_.wall_seconds = elapsed();
    return SearchResult{best_paths_, stats_};
}

double MctsSearch::simulate(TreeNode& node) {
    node.visit_count += 1;
    maybe_widen(node);
    TreeNode::Child& child = select_child(node);

    bool tau = false;
    const StepOutput out = take_step(child.seed, tau);
    const double r = reward_(out, tau);
    episode_rewards_.push_back(r);
    if (tau) {
        complete_episode();
        return r;
    }

    double q;
    if (!child.node) {
        child.node = std::make_unique<TreeNode>();
        q = r + rollout();
    } else {
        q = r + simulate(*child.node);
    }
    update_edge(child.stats, q);
    if (hooks_.on_backup) hooks_.on_backup(node, child.seed, q, child.stats);
    return q;
}

double MctsSearch::rollout() {
    double total = 0.0;
    while (true) {
        const Seed seed = sample_seed();
        bool tau = false;
        const StepOutput out = take_step(seed, tau);
        const double r = reward_(out, tau);
        episode_rewards_.push_back(r);
        total += r;
        if (tau) {
            complete_episode();
            return total;
        }
    }
}

void MctsSearch::maybe_widen(TreeNode& node) {
    if (!should_widen(node.children.size(), node.visit_count, config_.k, config_.alpha)) {
        return;
    }

    // Fresh seeds collide with existing children with negligible probability
    // over the full 64-bit universe; the attempt cap only matters for tiny
    // test alphabets, where an exhausted node simply stops widening.
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Seed seed = sample_seed();
        if (node.find(seed) == nullptr) {
            node.children.push_back(TreeNode::Child{seed, EdgeStats{}, nullptr});
            return;
        }
    }
}

TreeNode::Child& MctsSearch::select_child(TreeNode& node) {
    return node.children[select_child_index(node, config_.exploration_constant)];
}

Seed MctsSearch::sample_seed() {
    return config_.seed_sampler ? config_.seed_sampler(rng_) : rng_();
}

StepOutput MctsSearch::take_step(Seed seed, bool& terminal_before_step) {
    terminal_before_step = sim_->is_terminal();
    const StepOutput out = sim_->step(seed);
    ++stats_.step_calls;
    episode_seeds_.push_back(seed);
    episode_outputs_.push_back(out);
    episode_flags_.push_back(terminal_before_step);
    return out;
}

void MctsSearch::complete_episode() {
    if (episode_done_) throw std::logic_error("MctsSearch: episode completed twice");
    episode_done_ = true;

    TrajectoryRecord trajectory;
    trajectory.seeds = episode_seeds_;
    trajectory.step_outputs = episode_outputs_;
    trajectory.terminal_flags = episode_flags_;
    trajectory.rewards = episode_rewards_;
    trajectory.return_value = path_return(episode_rewards_);
    trajectory.event_reached = episode_outputs_.back().event;

    PathResult path;
    path.seeds.assign(episode_seeds_.begin(), episode_seeds_.end() - 1);
    path.return_value = trajectory.return_value;
    path.event_reached = trajectory.event_reached;
    path.trajectory = std::move(trajectory);
    best_paths_.offer(std::move(path));
}

SearchResult mcts_search(Simulator& sim, const RewardFn& reward, const SearchConfig& config) {
    return MctsSearch(sim, reward, config).run();
}

SearchResult mcts_search(Simulator& sim, const RewardFn& reward, const SearchConfig& config,
                         const Budget& budget) {
    return MctsSearch(sim, reward, config).run(budget);
}

}  // namespace ast
