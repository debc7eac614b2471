#pragma once

#include <cstddef>
#include <vector>

#include "ast/sim.hpp"

namespace ast {

/// One complete root-to-terminal path found by a solver.
struct PathResult {
    /// Transition seeds only; replaying them through the simulator
    /// reproduces `return_value` bit-for-bit.
    SeedSequence seeds;
    double return_value = 0.0;
    bool event_reached = false;
    /// Full record of the episode that produced this path, including the
    /// terminal read (whose seed is incidental and excluded from `seeds`).
    TrajectoryRecord trajectory;
};

/// Bounded best-first collection of distinct paths, ordered by descending
/// return. Distinctness is by seed sequence; re-offering a known sequence is
/// a no-op (determinism makes its return identical).
class BestPathList {
public:
    explicit BestPathList(std::size_t capacity);

    /// Returns true if the path was inserted.
    bool offer(PathResult path);

    const std::vector<PathResult>& paths() const { return paths_; }
    bool empty() const { return paths_.empty(); }
    std::size_t size() const { return paths_.size(); }
    std::size_t capacity() const { return capacity_; }
    const PathResult& best() const { return paths_.front(); }

private:
    std::size_t capacity_;
    std::vector<PathResult> paths_;
};

/// Search effort limit. Exactly one mode; solvers check it between episodes,
/// so a run can overshoot by at most one episode's steps.
class Budget {
public:
    enum class Mode { episodes, steps, seconds };

    static Budget episodes(long long n);
    static Budget steps(long long n);
    static Budget seconds(double s);

    Mode mode() const { return mode_; }
    long long amount() const { return amount_; }
    double seconds_amount() const { return seconds_; }

    bool exhausted(long long episodes_done, long long steps_done, double elapsed_seconds) const;

private:
    Budget(Mode mode, long long amount, double seconds)
        : mode_(mode), amount_(amount), seconds_(seconds) {}

    Mode mode_;
    long long amount_;
    double seconds_;
};

/// Per-search accounting (exact counters; wall time informational).
struct SearchStats {
    long long episodes = 0;
    long long step_calls = 0;
    double wall_seconds = 0.0;
};

struct SearchResult {
    BestPathList best_paths;
    SearchStats stats;
};

}  // namespace ast
