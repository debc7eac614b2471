#include <stdexcept>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "ast/dast.hpp"
#include "ast/mcts.hpp"
#include "ast/monte_carlo.hpp"
#include "ast/reward.hpp"
#include "ast/seed.hpp"
#include "ast/walker.hpp"
#include "doctest.h"

using namespace ast;

namespace {

PathResult make_path(SeedSequence seeds, double ret) {
    PathResult p;
    p.seeds = std::move(seeds);
    p.return_value = ret;
    return p;
}

Seed find_seed_with_disturbance(double lo, double hi) {
    for (Seed s = 1;; ++s) {
        const double eps = seed_to_disturbance(s, 1.0);
        if (eps >= lo && eps < hi) return s;
        REQUIRE(s < 100'000'000ull);
    }
}

void check_widening_bound(const TreeNode& node, double k, double alpha) {
    if (node.visit_count > 0) {
        const double bound =
            std::floor(k * std::pow(double(node.visit_count), alpha)) + 1.0;
        CHECK(double(node.children.size()) <= bound);
    } else {
        CHECK(node.children.empty());
    }
    for (const TreeNode::Child& c : node.children) {
        if (c.node) check_widening_bound(*c.node, k, alpha);
    }
}

}  // namespace

TEST_CASE("edge backup keeps an incremental mean") {
    EdgeStats e;
    update_edge(e, -3.0);
    CHECK(e.visit_count == 1);
    CHECK(e.q_value == -3.0);

    EdgeStats f{1, 10.0};
    update_edge(f, 20.0);
    CHECK(f.visit_count == 2);
    CHECK(f.q_value == 15.0);

    EdgeStats g;
    double naive = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double q = std::sin(double(i));
        update_edge(g, q);
        naive += q;
    }
    CHECK(g.visit_count == 1000);
    CHECK(g.q_value == doctest::Approx(naive / 1000.0).epsilon(1e-12));
}

TEST_CASE("progressive widening threshold is strict") {
    CHECK(should_widen(0, 1, 0.5, 0.85));        // 0 < 0.5
    CHECK_FALSE(should_widen(1, 1, 0.5, 0.85));  // 1 < 0.5 fails
    CHECK(should_widen(1, 4, 0.5, 0.85));        // 1 < 1.6245
    CHECK_FALSE(should_widen(2, 4, 0.5, 0.85));  // 2 < 1.6245 fails
    CHECK(should_widen(3, 100, 0.5, 0.85));      // 3 < 25.06
}

TEST_CASE("child selection follows UCT with deterministic ties") {
    TreeNode node;
    node.visit_count = 2;
    node.children.push_back({1, EdgeStats{1, 5.0}, nullptr});
    node.children.push_back({2, EdgeStats{1, 3.0}, nullptr});
    CHECK(select_child_index(node, 0.0) == 0);

    // A never-tried child outranks everything, earliest first.
    node.children.push_back({3, EdgeStats{0, 0.0}, nullptr});
    node.children.push_back({4, EdgeStats{0, 0.0}, nullptr});
    CHECK(select_child_index(node, 0.0) == 2);

    TreeNode explored;
    explored.visit_count = 8;
    explored.children.push_back({1, EdgeStats{4, 1.5}, nullptr});
    explored.children.push_back({2, EdgeStats{2, 1.0}, nullptr});
    CHECK(select_child_index(explored, 0.0) == 0);  // Q alone decides at c = 0

    explored.children[0].stats.q_value = 1.0;
    CHECK(select_child_index(explored, 1.0) == 1);  // larger exploration bonus

    TreeNode tied;
    tied.visit_count = 7;
    tied.children.push_back({1, EdgeStats{5, 5.0}, nullptr});
    tied.children.push_back({2, EdgeStats{2, 5.0}, nullptr});
    CHECK(select_child_index(tied, 0.0) == 1);  // tie resolved to fewer visits

    TreeNode equal;
    equal.visit_count = 4;
    equal.children.push_back({1, EdgeStats{2, 5.0}, nullptr});
    equal.children.push_back({2, EdgeStats{2, 5.0}, nullptr});
    CHECK(select_child_index(equal, 0.0) == 0);  // full tie: insertion order

    TreeNode empty;
    CHECK_THROWS_AS(select_child_index(empty, 1.0), std::logic_error);
}

TEST_CASE("best path list keeps distinct paths sorted by return") {
    BestPathList list(2);
    CHECK(list.empty());
    CHECK(list.offer(make_path({1}, 1.0)));
    CHECK(list.offer(make_path({2}, 2.0)));
    CHECK(list.size() == 2);
    CHECK(list.best().return_value == 2.0);

    CHECK_FALSE(list.offer(make_path({1}, 1.0)));   // duplicate sequence
    CHECK_FALSE(list.offer(make_path({3}, 0.5)));   // full and not better
    CHECK(list.offer(make_path({4}, 1.5)));         // evicts the 1.0 entry
    CHECK(list.paths()[1].seeds == SeedSequence{4});

    CHECK(list.offer(make_path({5}, 2.0)));  // ties rank behind the incumbent
    CHECK(list.paths()[0].seeds == SeedSequence{2});
    CHECK(list.paths()[1].seeds == SeedSequence{5});

    CHECK_THROWS_AS(BestPathList(0), std::invalid_argument);
}

TEST_CASE("budgets cut off by the configured resource") {
    const Budget eps = Budget::episodes(3);
    CHECK_FALSE(eps.exhausted(2, 1'000'000, 1e6));
    CHECK(eps.exhausted(3, 0, 0.0));

    const Budget steps = Budget::steps(100);
    CHECK_FALSE(steps.exhausted(1'000'000, 99, 1e6));
    CHECK(steps.exhausted(0, 100, 0.0));

    const Budget secs = Budget::seconds(0.5);
    CHECK_FALSE(secs.exhausted(1'000'000, 1'000'000, 0.49));
    CHECK(secs.exhausted(0, 0, 0.5));
}

TEST_CASE("tree search is reproducible and accounts for every step call") {
    WalkerConfig cfg;
    cfg.threshold = 3.0;
    cfg.horizon = 5;
    SearchConfig sc;
    sc.iterations = 500;
    sc.rng_seed = 42;
    sc.top_k = 5;
    const RewardFn reward = make_ast_reward(RewardParams{});

    WalkerSim sim_a(cfg);
    CountingSimulator counted(sim_a);
    const SearchResult a = mcts_search(counted, reward, sc);
    CHECK(a.stats.episodes == 500);
    CHECK(a.stats.step_calls == counted.step_calls());

    WalkerSim sim_b(cfg);
    const SearchResult b = mcts_search(sim_b, reward, sc);
    CHECK(a.stats.episodes == b.stats.episodes);
    CHECK(a.stats.step_calls == b.stats.step_calls);
    REQUIRE(a.best_paths.size() == b.best_paths.size());
    for (std::size_t i = 0; i < a.best_paths.size(); ++i) {
        CHECK(a.best_paths.paths()[i].seeds == b.best_paths.paths()[i].seeds);
        CHECK(a.best_paths.paths()[i].return_value == b.best_paths.paths()[i].return_value);
    }

    SearchConfig other = sc;
    other.rng_seed = 43;
    WalkerSim sim_c(cfg);
    const SearchResult c = mcts_search(sim_c, reward, other);
    CHECK(c.best_paths.best().seeds != a.best_paths.best().seeds);
}

TEST_CASE("returns of reported paths replay bit for bit") {
    WalkerConfig cfg;
    cfg.threshold = 3.0;
    cfg.horizon = 5;
    SearchConfig sc;
    sc.iterations = 1000;
    sc.rng_seed = 7;
    sc.top_k = 10;
    const RewardFn reward = make_ast_reward(RewardParams{});

    WalkerSim sim(cfg);
    const SearchResult result = mcts_search(sim, reward, sc);
    REQUIRE(result.best_paths.size() == 10);

    WalkerSim fresh(cfg);
    for (const PathResult& p : result.best_paths.paths()) {
        const TrajectoryRecord rec = replay(fresh, p.seeds, reward);
        CHECK(rec.return_value == p.return_value);  // exact, not approximate
        CHECK(rec.event_reached == p.event_reached);
        CHECK(rec.rewards == p.trajectory.rewards);
        CHECK(rec.terminal_flags == p.trajectory.terminal_flags);
    }

    // Distinctness of the reported paths.
    for (std::size_t i = 0; i < result.best_paths.size(); ++i) {
        for (std::size_t j = i + 1; j < result.best_paths.size(); ++j) {
            CHECK(result.best_paths.paths()[i].seeds != result.best_paths.paths()[j].seeds);
        }
    }
}

TEST_CASE("every node in the search tree respects the widening bound") {
    WalkerConfig cfg;
    cfg.threshold = 3.0;
    cfg.horizon = 5;
    SearchConfig sc;
    sc.iterations = 2000;
    sc.rng_seed = 3;

    WalkerSim sim(cfg);
    MctsSearch search(sim, make_ast_reward(RewardParams{}), sc);
    search.run();
    check_widening_bound(search.root(), sc.k, sc.alpha);
    CHECK(search.root().visit_count == 2000);
}

TEST_CASE("backed-up values are running means of the returns seen") {
    WalkerConfig cfg;
    cfg.threshold = 3.0;
    cfg.horizon = 5;

    std::map<std::pair<const TreeNode*, Seed>, std::pair<long long, double>> seen;
    SearchHooks hooks;
    hooks.on_backup = [&](const TreeNode& parent, Seed seed, double q,
                          const EdgeStats& after) {
        auto& [count, sum] = seen[{&parent, seed}];
        ++count;
        sum += q;
        CHECK(after.visit_count == count);
        CHECK(after.q_value == doctest::Approx(sum / double(count)).epsilon(1e-9));
    };

    double best_so_far = -1e300;
    long long episodes_seen = 0;
    hooks.on_episode = [&](long long iteration, double episode_return, double best_return) {
        ++episodes_seen;
        CHECK(iteration == episodes_seen);
        best_so_far = std::max(best_so_far, episode_return);
        CHECK(best_return == best_so_far);  // the list's best tracks the running max
    };

    SearchConfig sc;
    sc.iterations = 400;
    sc.rng_seed = 9;
    WalkerSim sim(cfg);
    MctsSearch search(sim, make_ast_reward(RewardParams{}), sc, hooks);
    search.run();
    CHECK(episodes_seen == 400);
    CHECK_FALSE(seen.empty());
}

TEST_CASE("zero iterations produce an empty result") {
    WalkerSim sim(WalkerConfig{});
    SearchConfig sc;
    sc.iterations = 0;
    const SearchResult r = mcts_search(sim, make_ast_reward(RewardParams{}), sc);
    CHECK(r.stats.episodes == 0);
    CHECK(r.stats.step_calls == 0);
    CHECK(r.best_paths.empty());
}

TEST_CASE("config validation rejects bad parameters") {
    SearchConfig sc;
    sc.k = 0.0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = SearchConfig{};
    sc.alpha = 1.0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = SearchConfig{};
    sc.iterations = -1;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
    sc = SearchConfig{};
    sc.top_k = 0;
    CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("a single-seed alphabet collapses the search to one path") {
    WalkerConfig cfg;
    cfg.threshold = 100.0;
    cfg.horizon = 4;
    SearchConfig sc;
    sc.iterations = 50;
    sc.seed_sampler = [](std::mt19937_64&) { return Seed{7}; };

    WalkerSim sim(cfg);
    const SearchResult r = mcts_search(sim, make_ast_reward(RewardParams{}), sc);
    CHECK(r.best_paths.size() == 1);
    CHECK(r.best_paths.best().seeds == SeedSequence{7, 7, 7, 7});
}

TEST_CASE("small-alphabet search finds the enumerated optimum") {
    // Three seeds, horizon three: 27 possible seed sequences. The search
    // must find exactly the best one that brute force finds.
    const Seed up = find_seed_with_disturbance(1.15, 1.25);
    const Seed flat = find_seed_with_disturbance(0.25, 0.35);
    const Seed down = find_seed_with_disturbance(-0.85, -0.75);
    const std::vector<Seed> alphabet{up, flat, down};

    WalkerConfig cfg;
    cfg.threshold = 2.0;
    cfg.horizon = 3;
    const RewardFn reward = make_ast_reward(RewardParams{});

    double best_return = -1e300;
    WalkerSim probe(cfg);
    for (Seed a : alphabet) {
        for (Seed b : alphabet) {
            for (Seed c : alphabet) {
                const TrajectoryRecord rec = replay(probe, {a, b, c}, reward);
                best_return = std::max(best_return, rec.return_value);
            }
        }
    }
    CHECK(best_return > 90.0);  // the up/up prefix crosses the threshold

    SearchConfig sc;
    sc.iterations = 3000;
    sc.rng_seed = 5;
    sc.seed_sampler = [alphabet](std::mt19937_64& rng) {
        return alphabet[rng() % alphabet.size()];
    };
    WalkerSim sim(cfg);
    const SearchResult r = mcts_search(sim, reward, sc);
    CHECK(r.best_paths.best().return_value == best_return);  // exact equality
}

TEST_CASE("search honors step and time budgets") {
    WalkerConfig cfg;  // horizon 20, threshold far: every episode costs 21 calls
    cfg.threshold = 1e9;
    SearchConfig sc;
    sc.rng_seed = 1;

    WalkerSim sim(cfg);
    MctsSearch by_steps(sim, make_ast_reward(RewardParams{}), sc);
    const SearchResult r = by_steps.run(Budget::steps(100));
    CHECK(r.stats.step_calls >= 100);
    CHECK(r.stats.step_calls <= 100 + 21);  // overshoot of at most one episode

    WalkerSim sim2(cfg);
    MctsSearch by_time(sim2, make_ast_reward(RewardParams{}), sc);
    const SearchResult t = by_time.run(Budget::seconds(0.05));
    CHECK(t.stats.episodes >= 1);
    CHECK(t.stats.wall_seconds >= 0.05);
}

TEST_CASE("monte carlo baseline is reproducible and budgeted") {
    WalkerConfig cfg;
    cfg.threshold = 2.0;
    cfg.horizon = 6;
    McConfig mc;
    mc.budget = Budget::episodes(200);
    mc.rng_seed = 12;
    mc.top_k = 5;
    const RewardFn reward = make_ast_reward(RewardParams{});

    WalkerSim sim_a(cfg);
    CountingSimulator counted(sim_a);
    const SearchResult a = mc_search(counted, reward, mc);
    CHECK(a.stats.episodes == 200);
    CHECK(a.stats.step_calls == counted.step_calls());

    WalkerSim sim_b(cfg);
    const SearchResult b = mc_search(sim_b, reward, mc);
    REQUIRE(a.best_paths.size() == b.best_paths.size());
    for (std::size_t i = 0; i < a.best_paths.size(); ++i) {
        CHECK(a.best_paths.paths()[i].seeds == b.best_paths.paths()[i].seeds);
        CHECK(a.best_paths.paths()[i].return_value == b.best_paths.paths()[i].return_value);
    }

    WalkerSim fresh(cfg);
    for (const PathResult& p : a.best_paths.paths()) {
        const TrajectoryRecord rec = replay(fresh, p.seeds, reward);
        CHECK(rec.return_value == p.return_value);
    }

    WalkerConfig far = cfg;
    far.threshold = 1e9;
    far.horizon = 20;
    WalkerSim sim_c(far);
    McConfig by_steps = mc;
    by_steps.budget = Budget::steps(100);
    const SearchResult s = mc_search(sim_c, reward, by_steps);
    CHECK(s.stats.step_calls >= 100);
    CHECK(s.stats.step_calls <= 100 + 21);
}

TEST_CASE("combined simulator rejects aliased or uninitialized use") {
    WalkerSim a(WalkerConfig{});
    WalkerSim b(WalkerConfig{});
    CHECK_THROWS_AS(std::make_unique<CombinedSimulator>(a, a), std::invalid_argument);

    CombinedSimulator combined(a, b);
    CHECK_THROWS_AS(combined.step(1), std::logic_error);
    CHECK_THROWS_AS(combined.is_terminal(), std::logic_error);
}

TEST_CASE("identical systems never diverge") {
    WalkerConfig cfg;
    cfg.threshold = 4.0;
    cfg.horizon = 6;
    WalkerSim test(cfg);
    WalkerSim baseline(cfg);
    CombinedSimulator combined(test, baseline);
    const RewardFn reward = make_dast_reward(combined, RewardParams{});

    std::mt19937_64 rng(21);
    for (int episode = 0; episode < 50; ++episode) {
        combined.initialize();
        while (!combined.is_terminal()) {
            const StepOutput out = combined.step(rng());
            CHECK_FALSE(out.event);
            REQUIRE(combined.test_status().output.has_value());
            REQUIRE(combined.baseline_status().output.has_value());
            CHECK(*combined.test_status().output == *combined.baseline_status().output);
            CHECK(combined.test_status().phase == combined.baseline_status().phase);
        }
        // Terminal read: both sides pay out together and cancel exactly.
        const StepOutput read = combined.step(rng());
        CHECK_FALSE(read.event);
        CHECK(reward(read, true) == 0.0);
        CHECK(combined.side_event(false) == combined.side_event(true));
    }
}

TEST_CASE("staggered termination absorbs one side and pays each terminal once") {
    WalkerConfig instant;
    instant.threshold = 0.0;  // test side is terminal at the initial state
    instant.horizon = 2;
    WalkerConfig survivor;
    survivor.threshold = 1e9;
    survivor.horizon = 3;

    WalkerSim test(instant);
    WalkerSim baseline(survivor);
    CombinedSimulator combined(test, baseline);
    CHECK(combined.max_steps() == 3);

    const RewardParams params;
    const RewardFn reward = make_dast_reward(combined, params);
    const SeedSequence seeds{11, 12, 13, 14};
    const TrajectoryRecord rec = replay(combined, seeds, reward);

    REQUIRE(rec.size() == 4);
    CHECK(rec.terminal_flags == std::vector<bool>{false, false, false, true});
    CHECK(rec.event_reached);  // test failed, baseline survived

    // Step 1: test terminal read (+100, its position starts in the failure
    // set), baseline still running.
    WalkerSim base_probe(survivor);
    const TrajectoryRecord base_rec =
        replay(base_probe, seeds, make_ast_reward(params));
    REQUIRE(base_rec.size() == 4);
    const double base_miss = -base_rec.rewards[3];
    CHECK(rec.rewards[0] ==
          doctest::Approx(100.0 + base_rec.rewards[0]).epsilon(1e-13));
    CHECK(rec.rewards[1] == base_rec.rewards[1]);
    CHECK(rec.rewards[2] == base_rec.rewards[2]);
    CHECK(rec.rewards[3] == doctest::Approx(base_miss).epsilon(1e-13));
    CHECK(rec.return_value ==
          doctest::Approx(100.0 + base_rec.rewards[0] + base_rec.rewards[1] +
                          base_rec.rewards[2] + base_miss)
              .epsilon(1e-12));

    // The combined step output carries only the running side's likelihood.
    CHECK(rec.step_outputs[1].likelihood ==
          doctest::Approx(base_rec.step_outputs[1].likelihood).epsilon(1e-15));

    CHECK(combined.side_event(false));        // test side failed
    CHECK_FALSE(combined.side_event(true));   // baseline side did not

    CHECK_THROWS_AS(combined.step(99), std::logic_error);  // both absorbed now
}

TEST_CASE("solvers can drive the combined simulator directly") {
    WalkerConfig fragile;
    fragile.threshold = 2.0;
    fragile.horizon = 5;
    WalkerConfig sturdy;
    sturdy.threshold = 1e9;
    sturdy.horizon = 5;

    WalkerSim test(fragile);
    WalkerSim baseline(sturdy);
    CombinedSimulator combined(test, baseline);
    const RewardFn reward = make_dast_reward(combined, RewardParams{});

    SearchConfig sc;
    sc.iterations = 800;
    sc.rng_seed = 31;
    const SearchResult r = mcts_search(combined, reward, sc);
    CHECK(r.stats.episodes == 800);
    REQUIRE_FALSE(r.best_paths.empty());

    // Best path should fail the fragile side while the sturdy one survives,
    // and must replay exactly.
    const PathResult& best = r.best_paths.best();
    CHECK(best.event_reached);
    const TrajectoryRecord rec = replay(combined, best.seeds, reward);
    CHECK(rec.return_value == best.return_value);
    CHECK(rec.event_reached);
}
