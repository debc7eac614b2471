#include "ast/search_result.hpp"

#include <algorithm>
#include <stdexcept>

namespace ast {

BestPathList::BestPathList(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
        throw std::invalid_argument("BestPathList: capacity must be >= 1");
    }
}

bool BestPathList::offer(PathResult path) {
    for (const PathResult& existing : paths_) {
        if (existing.seeds == path.seeds) return false;
    }
    if (paths_.size() == capacity_ && path.return_value <= paths_.back().return_value) {
        return false;
    }
    // Insert after entries with equal return so earlier discoveries rank first.
    auto pos = std::upper_bound(paths_.begin(), paths_.end(), path.return_value,
                                [](double value, const PathResult& p) {
                                    return value > p.return_value;
                                });
    paths_.insert(pos, std::move(path));
    if (paths_.size() > capacity_) paths_.pop_back();
    return true;
}

Budget Budget::episodes(long long n) { return Budget(Mode::episodes, n, 0.0); }
Budget Budget::steps(long long n) { return Budget(Mode::steps, n, 0.0); }
Budget Budget::seconds(double s) { return Budget(Mode::seconds, 0, s); }

bool Budget::exhausted(long long episodes_done, long long steps_done,
                       double elapsed_seconds) const {
    switch (mode_) {
        case Mode::episodes: return episodes_done >= amount_;
        case Mode::steps: return steps_done >= amount_;
        case Mode::seconds: return elapsed_seconds >= seconds_;
    }
    return true;
}

}  // namespace ast
