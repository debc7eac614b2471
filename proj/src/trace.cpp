#include "ast/trace.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace ast {

namespace {

nlohmann::ordered_json step_line(std::size_t t, const TrajectoryRecord& rec) {
    nlohmann::ordered_json line;
    line["type"] = "step";
    line["t"] = t;
    line["seed"] = rec.seeds[t];
    line["likelihood"] = rec.step_outputs[t].likelihood;
    line["event"] = rec.step_outputs[t].event;
    line["miss_distance"] = rec.step_outputs[t].miss_distance;
    line["terminal_before_step"] = static_cast<bool>(rec.terminal_flags[t]);
    line["reward"] = rec.rewards[t];
    return line;
}

}  // namespace

TrajectoryRecord write_trace(std::ostream& out, Simulator& sim, const RewardFn& reward,
                             const PathResult& path,
                             const nlohmann::ordered_json& header_fields,
                             const std::vector<PathResult>& top_k,
                             const TraceExtras& extras) {
    const TrajectoryRecord rec = replay(sim, path.seeds, reward);
    if (rec.return_value != path.return_value) {
        std::ostringstream msg;
        msg << "write_trace: replay return " << rec.return_value
            << " does not reproduce the search return " << path.return_value;
        throw TraceError(msg.str());
    }

    nlohmann::ordered_json header;
    header["type"] = "header";
    for (const auto& [key, value] : header_fields.items()) header[key] = value;
    header["seeds"] = rec.seeds;  // includes the terminal read when present
    header["path_seeds"] = path.seeds;
    header["expected_return"] = rec.return_value;
    out << header.dump() << '\n';

    // Second pass for the extras: step through the recorded seeds (terminal
    // read included) and let `extras` sample the post-step simulator state.
    sim.initialize();
    for (std::size_t t = 0; t < rec.size(); ++t) {
        const StepOutput again = sim.step(rec.seeds[t]);
        if (!(again == rec.step_outputs[t])) {
            throw TraceError("write_trace: simulator output changed between replays");
        }
        nlohmann::ordered_json line = step_line(t, rec);
        if (extras) {
            const nlohmann::ordered_json extra = extras();
            for (const auto& [key, value] : extra.items()) line[key] = value;
        }
        out << line.dump() << '\n';
    }

    nlohmann::ordered_json summary;
    summary["type"] = "summary";
    summary["return"] = rec.return_value;
    summary["event_reached"] = rec.event_reached;
    summary["steps"] = rec.size();
    nlohmann::ordered_json ranked = nlohmann::ordered_json::array();
    for (const PathResult& p : top_k) {
        nlohmann::ordered_json entry;
        entry["return"] = p.return_value;
        entry["event_reached"] = p.event_reached;
        entry["seeds"] = p.seeds;
        ranked.push_back(std::move(entry));
    }
    summary["top_k"] = std::move(ranked);
    out << summary.dump() << '\n';

    return rec;
}

TrajectoryRecord write_trace_file(const std::string& file_path, Simulator& sim,
                                  const RewardFn& reward, const PathResult& path,
                                  const nlohmann::ordered_json& header_fields,
                                  const std::vector<PathResult>& top_k,
                                  const TraceExtras& extras) {
    std::ofstream out(file_path);
    if (!out) throw TraceError("cannot open trace file for writing: " + file_path);
    return write_trace(out, sim, reward, path, header_fields, top_k, extras);
}

TraceFile read_trace(std::istream& in) {
    TraceFile trace;
    bool have_header = false;
    bool have_summary = false;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::ordered_json parsed;
        try {
            parsed = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        const std::string type = parsed.value("type", "");
        if (type == "header") {
            if (have_header) throw TraceError("trace has more than one header");
            trace.header = std::move(parsed);
            have_header = true;
        } else if (type == "step") {
            if (have_summary) throw TraceError("trace has steps after the summary");
            trace.steps.push_back(std::move(parsed));
        } else if (type == "summary") {
            if (have_summary) throw TraceError("trace has more than one summary");
            trace.summary = std::move(parsed);
            have_summary = true;
        } else {
            throw TraceError("trace line " + std::to_string(line_no) +
                             ": unknown line type '" + type + "'");
        }
    }
    if (!have_header) throw TraceError("trace has no header line");
    if (!have_summary) throw TraceError("trace has no summary line");
    return trace;
}

TraceFile read_trace_file(const std::string& file_path) {
    std::ifstream in(file_path);
    if (!in) throw TraceError("cannot open trace file: " + file_path);
    return read_trace(in);
}

SeedSequence TraceFile::seeds() const {
    if (!header.contains("path_seeds") || !header["path_seeds"].is_array()) {
        throw TraceError("trace header has no path_seeds array");
    }
    return header["path_seeds"].get<SeedSequence>();
}

double TraceFile::expected_return() const {
    if (!header.contains("expected_return") || !header["expected_return"].is_number()) {
        throw TraceError("trace header has no expected_return");
    }
    return header["expected_return"].get<double>();
}

namespace {

template <typename T>
bool field_matches(const nlohmann::ordered_json& line, const char* key, const T& expect) {
    return line.contains(key) && line[key].is_primitive() && line[key].get<T>() == expect;
}

}  // namespace

std::string diff_trace(const TraceFile& trace, const TrajectoryRecord& replayed) {
    if (trace.steps.size() != replayed.size()) {
        return "step count mismatch: trace has " + std::to_string(trace.steps.size()) +
               ", replay produced " + std::to_string(replayed.size());
    }
    for (std::size_t t = 0; t < replayed.size(); ++t) {
        const nlohmann::ordered_json& line = trace.steps[t];
        const std::string at = "step " + std::to_string(t) + ": ";
        if (!field_matches(line, "seed", replayed.seeds[t])) return at + "seed mismatch";
        if (!field_matches(line, "likelihood", replayed.step_outputs[t].likelihood)) {
            return at + "likelihood mismatch";
        }
        if (!field_matches(line, "event", replayed.step_outputs[t].event)) {
            return at + "event mismatch";
        }
        if (!field_matches(line, "miss_distance", replayed.step_outputs[t].miss_distance)) {
            return at + "miss_distance mismatch";
        }
        if (!field_matches(line, "terminal_before_step",
                           static_cast<bool>(replayed.terminal_flags[t]))) {
            return at + "terminal flag mismatch";
        }
        if (!field_matches(line, "reward", replayed.rewards[t])) return at + "reward mismatch";
    }
    if (!trace.summary.contains("return") ||
        trace.summary["return"].get<double>() != replayed.return_value) {
        return "summary return mismatch";
    }
    if (!trace.summary.contains("event_reached") ||
        trace.summary["event_reached"].get<bool>() != replayed.event_reached) {
        return "summary event_reached mismatch";
    }
    return "";
}

}  // namespace ast
