#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ast/search_result.hpp"
#include "ast/sim.hpp"

namespace ast {

/// JSONL trace of one search: a header object, one object per step call of
/// the replayed best path, and a summary object. Every number round-trips
/// exactly through JSON, so a trace is a self-contained, bit-exact replay
/// certificate: the header carries the simulator description, the path
/// seeds, and the expected return.
///
/// Step objects describe the state *before* the transition (likelihood,
/// event, miss_distance, terminal_before_step, reward); extra fields sampled
/// by `extras` describe the simulator *after* the step.

/// Samples simulator-specific fields to merge into a step line (aircraft
/// states, walker position, sub-simulator phases). May be null.
using TraceExtras = std::function<nlohmann::ordered_json()>;

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Replays `path.seeds` through `sim` and writes the full trace to `out`.
/// `header_fields` are emitted into the header object after the standard
/// fields; `top_k` lists the other paths of the search for the summary.
/// Returns the replayed record. Throws TraceError if the simulator fails to
/// reproduce the replayed outputs on the logging pass (a determinism bug).
TrajectoryRecord write_trace(std::ostream& out, Simulator& sim, const RewardFn& reward,
                             const PathResult& path,
                             const nlohmann::ordered_json& header_fields,
                             const std::vector<PathResult>& top_k,
                             const TraceExtras& extras = nullptr);

/// write_trace to a file; creates/truncates `file_path`.
TrajectoryRecord write_trace_file(const std::string& file_path, Simulator& sim,
                                  const RewardFn& reward, const PathResult& path,
                                  const nlohmann::ordered_json& header_fields,
                                  const std::vector<PathResult>& top_k,
                                  const TraceExtras& extras = nullptr);

/// Parsed trace file.
struct TraceFile {
    nlohmann::ordered_json header;
    std::vector<nlohmann::ordered_json> steps;
    nlohmann::ordered_json summary;

    SeedSequence seeds() const;          ///< path seeds from the header
    double expected_return() const;      ///< expected return from the header
};

TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& file_path);

/// Compares a freshly replayed record against the step and summary lines of
/// a trace. Returns an empty string when every field matches exactly, else a
/// description of the first mismatch.
std::string diff_trace(const TraceFile& trace, const TrajectoryRecord& replayed);

}  // namespace ast
