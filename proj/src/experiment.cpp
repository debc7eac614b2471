#include "ast/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ast/dast.hpp"

namespace ast {

namespace {

const char* sim_kind_name(SimKind kind) {
    return kind == SimKind::walker ? "walker" : "encounter";
}

const char* solver_name(SolverKind solver) {
    return solver == SolverKind::mcts ? "mcts" : "mc";
}

const char* budget_mode_name(Budget::Mode mode) {
    switch (mode) {
        case Budget::Mode::episodes: return "episodes";
        case Budget::Mode::steps: return "steps";
        case Budget::Mode::seconds: return "seconds";
    }
    return "?";
}

double budget_amount(const Budget& budget) {
    return budget.mode() == Budget::Mode::seconds ? budget.seconds_amount()
                                                  : static_cast<double>(budget.amount());
}

void check_section_keys(const TomlDocument& doc, const std::string& section,
                        const std::set<std::string>& allowed) {
    const TomlDocument::Section* s = doc.section(section);
    if (!s) return;
    for (const auto& [key, value] : *s) {
        if (!allowed.count(key)) {
            throw TomlError("[" + section + "]: unknown key '" + key + "'");
        }
    }
}

const std::set<std::string> kWalkerKeys{"threshold", "horizon", "step_std",
                                        "initial_position"};
const std::set<std::string> kEncounterKeys{
    "num_aircraft",    "horizon",           "nmac_horizontal",   "nmac_vertical",
    "vertical_accel_std", "turn_rate_std",  "airspeed_accel_std", "cas_enabled",
    "alert_range",     "alert_time",        "strengthen_range",  "strengthen_time",
    "target_rate",     "strong_target_rate", "accel",            "strong_accel",
    "initial_delay",   "subsequent_delay",  "approach_time",     "airspeed_min",
    "airspeed_max",    "altitude_min",      "altitude_max",      "vertical_rate_min",
    "vertical_rate_max", "init_seed"};

void read_walker_keys(const TomlDocument& doc, const std::string& section, WalkerConfig& w) {
    w.threshold = doc.get_double(section, "threshold", w.threshold);
    w.horizon = static_cast<int>(doc.get_int(section, "horizon", w.horizon));
    w.step_std = doc.get_double(section, "step_std", w.step_std);
    w.initial_position = doc.get_double(section, "initial_position", w.initial_position);
}

void read_encounter_keys(const TomlDocument& doc, const std::string& section,
                         EncounterConfig& e) {
    e.num_aircraft = static_cast<int>(doc.get_int(section, "num_aircraft", e.num_aircraft));
    e.horizon = static_cast<int>(doc.get_int(section, "horizon", e.horizon));
    e.nmac_horizontal = doc.get_double(section, "nmac_horizontal", e.nmac_horizontal);
    e.nmac_vertical = doc.get_double(section, "nmac_vertical", e.nmac_vertical);
    e.noise.vertical_accel_std =
        doc.get_double(section, "vertical_accel_std", e.noise.vertical_accel_std);
    e.noise.turn_rate_std = doc.get_double(section, "turn_rate_std", e.noise.turn_rate_std);
    e.noise.airspeed_accel_std =
        doc.get_double(section, "airspeed_accel_std", e.noise.airspeed_accel_std);
    e.cas.enabled = doc.get_bool(section, "cas_enabled", e.cas.enabled);
    e.cas.alert_range = doc.get_double(section, "alert_range", e.cas.alert_range);
    e.cas.alert_time = doc.get_double(section, "alert_time", e.cas.alert_time);
    e.cas.strengthen_range =
        doc.get_double(section, "strengthen_range", e.cas.strengthen_range);
    e.cas.strengthen_time = doc.get_double(section, "strengthen_time", e.cas.strengthen_time);
    e.cas.target_rate = doc.get_double(section, "target_rate", e.cas.target_rate);
    e.cas.strong_target_rate =
        doc.get_double(section, "strong_target_rate", e.cas.strong_target_rate);
    e.cas.accel = doc.get_double(section, "accel", e.cas.accel);
    e.cas.strong_accel = doc.get_double(section, "strong_accel", e.cas.strong_accel);
    e.pilot.initial_delay = doc.get_double(section, "initial_delay", e.pilot.initial_delay);
    e.pilot.subsequent_delay =
        doc.get_double(section, "subsequent_delay", e.pilot.subsequent_delay);
    e.approach_time = doc.get_double(section, "approach_time", e.approach_time);
    e.airspeed_min = doc.get_double(section, "airspeed_min", e.airspeed_min);
    e.airspeed_max = doc.get_double(section, "airspeed_max", e.airspeed_max);
    e.altitude_min = doc.get_double(section, "altitude_min", e.altitude_min);
    e.altitude_max = doc.get_double(section, "altitude_max", e.altitude_max);
    e.vertical_rate_min = doc.get_double(section, "vertical_rate_min", e.vertical_rate_min);
    e.vertical_rate_max = doc.get_double(section, "vertical_rate_max", e.vertical_rate_max);
    e.init_seed = doc.get_seed(section, "init_seed", e.init_seed);
}

/// Reads simulator keys from `section` over the given base spec. Only the
/// [simulation] section carries (and requires) the `kind` key.
SimSpec read_sim_section(const TomlDocument& doc, const std::string& section,
                         SimSpec base, bool with_kind) {
    std::set<std::string> allowed;
    if (with_kind) {
        const TomlValue* kind = doc.find(section, "kind");
        if (!kind) throw TomlError("[" + section + "]: missing key 'kind'");
        const std::string name = kind->as_string(section + ".kind");
        if (name == "walker") {
            base.kind = SimKind::walker;
        } else if (name == "encounter") {
            base.kind = SimKind::encounter;
        } else {
            throw TomlError("[" + section + "]: unknown simulator kind '" + name + "'");
        }
        allowed.insert("kind");
    } else if (doc.find(section, "kind")) {
        throw TomlError("[" + section + "]: kind cannot be overridden per side");
    }

    const auto& keys = base.kind == SimKind::walker ? kWalkerKeys : kEncounterKeys;
    allowed.insert(keys.begin(), keys.end());
    check_section_keys(doc, section, allowed);

    if (base.kind == SimKind::walker) {
        read_walker_keys(doc, section, base.walker);
    } else {
        read_encounter_keys(doc, section, base.encounter);
    }
    return base;
}

SearchResult run_one_search(const ExperimentSpec& spec, int index) {
    SearchConfig sc = spec.search;
    sc.rng_seed = search_seed(spec.base_seed, index);
    const Budget budget = spec.effective_budget();

    const auto solve = [&](Simulator& sim, const RewardFn& reward) {
        if (spec.solver == SolverKind::mcts) {
            return MctsSearch(sim, reward, sc).run(budget);
        }
        McConfig mc;
        mc.budget = budget;
        mc.top_k = sc.top_k;
        mc.rng_seed = sc.rng_seed;
        return mc_search(sim, reward, mc);
    };

    if (spec.differential) {
        const std::unique_ptr<Simulator> test = make_simulator(spec.test_sim);
        const std::unique_ptr<Simulator> baseline = make_simulator(spec.baseline_sim);
        CombinedSimulator combined(*test, *baseline);
        return solve(combined, make_dast_reward(combined, spec.reward));
    }
    const std::unique_ptr<Simulator> sim = make_simulator(spec.sim);
    return solve(*sim, make_ast_reward(spec.reward));
}

nlohmann::ordered_json solver_json(const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = solver_name(spec.solver);
    if (spec.solver == SolverKind::mcts) {
        j["iterations"] = spec.search.iterations;
        j["k"] = spec.search.k;
        j["alpha"] = spec.search.alpha;
        j["exploration_constant"] = spec.search.exploration_constant;
    }
    j["top_k"] = spec.search.top_k;
    const Budget budget = spec.effective_budget();
    j["budget_mode"] = budget_mode_name(budget.mode());
    j["budget"] = budget_amount(budget);
    return j;
}

nlohmann::ordered_json header_fields(const ExperimentSpec& spec, int index) {
    nlohmann::ordered_json h;
    h["experiment"] = spec.name;
    h["search"] = index;
    h["solver_seed"] = search_seed(spec.base_seed, index);
    h["solver"] = solver_json(spec);
    if (spec.differential) {
        nlohmann::ordered_json sim;
        sim["kind"] = "differential";
        sim["test"] = sim_spec_json(spec.test_sim);
        sim["baseline"] = sim_spec_json(spec.baseline_sim);
        h["simulator"] = std::move(sim);
    } else {
        h["simulator"] = sim_spec_json(spec.sim);
    }
    h["reward"] = reward_json(spec.reward);
    return h;
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

std::string join_seeds(const SeedSequence& seeds) {
    std::string out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) out.push_back(';');
        out += std::to_string(seeds[i]);
    }
    return out;
}

/// Everything replay verification needs, rebuilt from a trace header.
struct ReplayBundle {
    std::unique_ptr<Simulator> single;
    std::unique_ptr<Simulator> test;
    std::unique_ptr<Simulator> baseline;
    std::unique_ptr<CombinedSimulator> combined;
    Simulator* sim = nullptr;
    RewardFn reward;
};

ReplayBundle bundle_from_header(const nlohmann::ordered_json& header) {
    if (!header.contains("simulator") || !header["simulator"].is_object()) {
        throw TraceError("trace header has no simulator description");
    }
    if (!header.contains("reward") || !header["reward"].is_object()) {
        throw TraceError("trace header has no reward description");
    }
    const RewardParams params = reward_from_json(header["reward"]);

    ReplayBundle bundle;
    const nlohmann::ordered_json& sim = header["simulator"];
    if (sim.value("kind", "") == "differential") {
        if (!sim.contains("test") || !sim.contains("baseline")) {
            throw TraceError("differential trace lacks test/baseline descriptions");
        }
        bundle.test = make_simulator(sim_spec_from_json(sim["test"]));
        bundle.baseline = make_simulator(sim_spec_from_json(sim["baseline"]));
        bundle.combined = std::make_unique<CombinedSimulator>(*bundle.test, *bundle.baseline);
        bundle.sim = bundle.combined.get();
        bundle.reward = make_dast_reward(*bundle.combined, params);
    } else {
        bundle.single = make_simulator(sim_spec_from_json(sim));
        bundle.sim = bundle.single.get();
        bundle.reward = make_ast_reward(params);
    }
    return bundle;
}

}  // namespace

void SimSpec::validate() const {
    if (kind == SimKind::walker) {
        walker.validate();
    } else {
        encounter.validate();
    }
}

Budget ExperimentSpec::effective_budget() const {
    return budget ? *budget : Budget::episodes(search.iterations);
}

void ExperimentSpec::validate() const {
    if (searches < 1) throw std::invalid_argument("ExperimentSpec: searches must be >= 1");
    if (workers < 1) throw std::invalid_argument("ExperimentSpec: workers must be >= 1");
    search.validate();
    reward.validate();
    if (differential) {
        test_sim.validate();
        baseline_sim.validate();
        if (test_sim.kind != baseline_sim.kind) {
            throw std::invalid_argument(
                "ExperimentSpec: test and baseline must be the same simulator kind");
        }
    } else {
        sim.validate();
    }
}

ExperimentSpec load_experiment(const TomlDocument& doc, bool differential) {
    std::set<std::string> sections{"", "experiment", "simulation", "solver", "reward"};
    if (differential) {
        sections.insert("test");
        sections.insert("baseline");
    }
    for (const std::string& name : doc.section_names()) {
        if (!sections.count(name)) {
            throw TomlError("unknown config section [" + name + "]");
        }
    }
    if (const TomlDocument::Section* root = doc.section(""); root && !root->empty()) {
        throw TomlError("keys are only allowed inside sections");
    }

    check_section_keys(doc, "experiment",
                       {"name", "searches", "base_seed", "top_k", "workers"});
    check_section_keys(doc, "solver",
                       {"kind", "iterations", "k", "alpha", "exploration_constant",
                        "budget_episodes", "budget_steps", "budget_seconds"});
    check_section_keys(doc, "reward", {"event_reward", "miss_distance_fallback"});

    ExperimentSpec spec;
    spec.differential = differential;
    spec.name = doc.get_string("experiment", "name", spec.name);
    spec.searches = static_cast<int>(doc.get_int("experiment", "searches", spec.searches));
    spec.base_seed = doc.get_seed("experiment", "base_seed", spec.base_seed);
    spec.workers = static_cast<int>(doc.get_int("experiment", "workers", spec.workers));

    spec.sim = read_sim_section(doc, "simulation", SimSpec{}, true);
    if (differential) {
        spec.test_sim = read_sim_section(doc, "test", spec.sim, false);
        spec.baseline_sim = read_sim_section(doc, "baseline", spec.sim, false);
    }

    const std::string solver = doc.get_string("solver", "kind", "mcts");
    if (solver == "mcts") {
        spec.solver = SolverKind::mcts;
    } else if (solver == "mc") {
        spec.solver = SolverKind::monte_carlo;
    } else {
        throw TomlError("[solver]: unknown kind '" + solver + "'");
    }
    spec.search.iterations = doc.get_int("solver", "iterations", spec.search.iterations);
    spec.search.k = doc.get_double("solver", "k", spec.search.k);
    spec.search.alpha = doc.get_double("solver", "alpha", spec.search.alpha);
    spec.search.exploration_constant =
        doc.get_double("solver", "exploration_constant", spec.search.exploration_constant);
    spec.search.top_k = static_cast<std::size_t>(
        doc.get_int("experiment", "top_k", static_cast<long long>(spec.search.top_k)));

    int budget_keys = 0;
    if (doc.find("solver", "budget_episodes")) {
        spec.budget = Budget::episodes(doc.get_int("solver", "budget_episodes", 0));
        ++budget_keys;
    }
    if (doc.find("solver", "budget_steps")) {
        spec.budget = Budget::steps(doc.get_int("solver", "budget_steps", 0));
        ++budget_keys;
    }
    if (doc.find("solver", "budget_seconds")) {
        spec.budget = Budget::seconds(doc.get_double("solver", "budget_seconds", 0.0));
        ++budget_keys;
    }
    if (budget_keys > 1) {
        throw TomlError("[solver]: give at most one of budget_episodes/budget_steps/budget_seconds");
    }

    spec.reward.event_reward =
        doc.get_double("reward", "event_reward", spec.reward.event_reward);
    spec.reward.miss_distance_fallback =
        doc.get_double("reward", "miss_distance_fallback", spec.reward.miss_distance_fallback);

    spec.validate();
    return spec;
}

nlohmann::ordered_json sim_spec_json(const SimSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = sim_kind_name(spec.kind);
    if (spec.kind == SimKind::walker) {
        const WalkerConfig& w = spec.walker;
        j["threshold"] = w.threshold;
        j["horizon"] = w.horizon;
        j["step_std"] = w.step_std;
        j["initial_position"] = w.initial_position;
        return j;
    }
    const EncounterConfig& e = spec.encounter;
    j["num_aircraft"] = e.num_aircraft;
    j["horizon"] = e.horizon;
    j["nmac_horizontal"] = e.nmac_horizontal;
    j["nmac_vertical"] = e.nmac_vertical;
    j["vertical_accel_std"] = e.noise.vertical_accel_std;
    j["turn_rate_std"] = e.noise.turn_rate_std;
    j["airspeed_accel_std"] = e.noise.airspeed_accel_std;
    j["cas_enabled"] = e.cas.enabled;
    j["alert_range"] = e.cas.alert_range;
    j["alert_time"] = e.cas.alert_time;
    j["strengthen_range"] = e.cas.strengthen_range;
    j["strengthen_time"] = e.cas.strengthen_time;
    j["target_rate"] = e.cas.target_rate;
    j["strong_target_rate"] = e.cas.strong_target_rate;
    j["accel"] = e.cas.accel;
    j["strong_accel"] = e.cas.strong_accel;
    j["initial_delay"] = e.pilot.initial_delay;
    j["subsequent_delay"] = e.pilot.subsequent_delay;
    j["approach_time"] = e.approach_time;
    j["airspeed_min"] = e.airspeed_min;
    j["airspeed_max"] = e.airspeed_max;
    j["altitude_min"] = e.altitude_min;
    j["altitude_max"] = e.altitude_max;
    j["vertical_rate_min"] = e.vertical_rate_min;
    j["vertical_rate_max"] = e.vertical_rate_max;
    j["init_seed"] = e.init_seed;
    return j;
}

SimSpec sim_spec_from_json(const nlohmann::ordered_json& j) {
    SimSpec spec;
    const std::string kind = j.value("kind", "");
    if (kind == "walker") {
        spec.kind = SimKind::walker;
        WalkerConfig& w = spec.walker;
        w.threshold = j.value("threshold", w.threshold);
        w.horizon = j.value("horizon", w.horizon);
        w.step_std = j.value("step_std", w.step_std);
        w.initial_position = j.value("initial_position", w.initial_position);
        return spec;
    }
    if (kind != "encounter") {
        throw TraceError("unknown simulator kind '" + kind + "' in trace header");
    }
    spec.kind = SimKind::encounter;
    EncounterConfig& e = spec.encounter;
    e.num_aircraft = j.value("num_aircraft", e.num_aircraft);
    e.horizon = j.value("horizon", e.horizon);
    e.nmac_horizontal = j.value("nmac_horizontal", e.nmac_horizontal);
    e.nmac_vertical = j.value("nmac_vertical", e.nmac_vertical);
    e.noise.vertical_accel_std = j.value("vertical_accel_std", e.noise.vertical_accel_std);
    e.noise.turn_rate_std = j.value("turn_rate_std", e.noise.turn_rate_std);
    e.noise.airspeed_accel_std = j.value("airspeed_accel_std", e.noise.airspeed_accel_std);
    e.cas.enabled = j.value("cas_enabled", e.cas.enabled);
    e.cas.alert_range = j.value("alert_range", e.cas.alert_range);
    e.cas.alert_time = j.value("alert_time", e.cas.alert_time);
    e.cas.strengthen_range = j.value("strengthen_range", e.cas.strengthen_range);
    e.cas.strengthen_time = j.value("strengthen_time", e.cas.strengthen_time);
    e.cas.target_rate = j.value("target_rate", e.cas.target_rate);
    e.cas.strong_target_rate = j.value("strong_target_rate", e.cas.strong_target_rate);
    e.cas.accel = j.value("accel", e.cas.accel);
    e.cas.strong_accel = j.value("strong_accel", e.cas.strong_accel);
    e.pilot.initial_delay = j.value("initial_delay", e.pilot.initial_delay);
    e.pilot.subsequent_delay = j.value("subsequent_delay", e.pilot.subsequent_delay);
    e.approach_time = j.value("approach_time", e.approach_time);
    e.airspeed_min = j.value("airspeed_min", e.airspeed_min);
    e.airspeed_max = j.value("airspeed_max", e.airspeed_max);
    e.altitude_min = j.value("altitude_min", e.altitude_min);
    e.altitude_max = j.value("altitude_max", e.altitude_max);
    e.vertical_rate_min = j.value("vertical_rate_min", e.vertical_rate_min);
    e.vertical_rate_max = j.value("vertical_rate_max", e.vertical_rate_max);
    e.init_seed = j.value("init_seed", e.init_seed);
    return spec;
}

nlohmann::ordered_json reward_json(const RewardParams& params) {
    nlohmann::ordered_json j;
    j["event_reward"] = params.event_reward;
    j["miss_distance_fallback"] = params.miss_distance_fallback;
    return j;
}

RewardParams reward_from_json(const nlohmann::ordered_json& j) {
    RewardParams params;
    params.event_reward = j.value("event_reward", params.event_reward);
    params.miss_distance_fallback =
        j.value("miss_distance_fallback", params.miss_distance_fallback);
    return params;
}

std::unique_ptr<Simulator> make_simulator(const SimSpec& spec) {
    if (spec.kind == SimKind::walker) {
        return std::make_unique<WalkerSim>(spec.walker);
    }
    return std::make_unique<EncounterSim>(spec.encounter);
}

std::uint64_t search_seed(std::uint64_t base_seed, int index) {
    return derive_stream(base_seed, static_cast<std::uint64_t>(index));
}

std::vector<SearchResult> run_searches(const ExperimentSpec& spec) {
    spec.validate();
    const int n = spec.searches;
    std::vector<std::optional<SearchResult>> slots(n);
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    const auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                slots[static_cast<std::size_t>(i)] = run_one_search(spec, i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int worker_count = std::min(spec.workers, n);
    if (worker_count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
    }

    if (first_error) std::rethrow_exception(first_error);

    std::vector<SearchResult> results;
    results.reserve(static_cast<std::size_t>(n));
    for (std::optional<SearchResult>& slot : slots) {
        if (!slot) throw std::logic_error("run_searches: missing result slot");
        results.push_back(std::move(*slot));
    }
    return results;
}

std::string format_double(double value) {
    std::array<char, 32> buf;
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
    return std::string(buf.data(), end);
}

void write_summary_csv(const std::string& path, const ExperimentSpec& spec,
                       const std::vector<SearchResult>& results) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "search,solver,episodes,step_calls,best_return,best_event,best_steps,best_seeds\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const SearchResult& r = results[i];
        out << i << ',' << solver_name(spec.solver) << ',' << r.stats.episodes << ','
            << r.stats.step_calls << ',';
        if (r.best_paths.empty()) {
            out << ",false,0,\n";
            continue;
        }
        const PathResult& best = r.best_paths.best();
        out << format_double(best.return_value) << ',' << csv_bool(best.event_reached) << ','
            << best.trajectory.size() << ',' << join_seeds(best.seeds) << '\n';
    }
}

TraceExtras make_trace_extras(Simulator& sim) {
    if (auto* walker = dynamic_cast<WalkerSim*>(&sim)) {
        return [walker] {
            nlohmann::ordered_json extra;
            extra["position"] = walker->position();
            return extra;
        };
    }
    if (auto* encounter = dynamic_cast<EncounterSim*>(&sim)) {
        return [encounter] {
            nlohmann::ordered_json extra;
            nlohmann::ordered_json fleet = nlohmann::ordered_json::array();
            const auto states = encounter->aircraft();
            const auto ras = encounter->ra_states();
            for (std::size_t i = 0; i < states.size(); ++i) {
                nlohmann::ordered_json a;
                a["north"] = states[i].north;
                a["east"] = states[i].east;
                a["altitude"] = states[i].altitude;
                a["vertical_rate"] = states[i].vertical_rate;
                a["heading"] = states[i].heading;
                a["airspeed"] = states[i].airspeed;
                a["advisory"] = advisory_code(ras[i].current);
                fleet.push_back(std::move(a));
            }
            extra["aircraft"] = std::move(fleet);
            extra["closest_approach"] = encounter->closest_approach();
            return extra;
        };
    }
    if (auto* combined = dynamic_cast<CombinedSimulator*>(&sim)) {
        const auto phase_name = [](SubSimPhase phase) {
            switch (phase) {
                case SubSimPhase::running: return "running";
                case SubSimPhase::just_terminal: return "just_terminal";
                case SubSimPhase::absorbed: return "absorbed";
            }
            return "?";
        };
        return [combined, phase_name] {
            nlohmann::ordered_json extra;
            const auto side = [&](const SubSimStatus& status) {
                nlohmann::ordered_json s;
                s["phase"] = phase_name(status.phase);
                if (status.output) {
                    s["event"] = status.output->event;
                    s["miss_distance"] = status.output->miss_distance;
                }
                return s;
            };
            extra["test"] = side(combined->test_status());
            extra["baseline"] = side(combined->baseline_status());
            return extra;
        };
    }
    return nullptr;
}

void write_trace_files(const std::string& out_dir, const ExperimentSpec& spec,
                       const std::vector<SearchResult>& results) {
    namespace fs = std::filesystem;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].best_paths.empty()) continue;
        const fs::path path = fs::path(out_dir) / ("trace_" + std::to_string(i) + ".jsonl");

        if (spec.differential) {
            const std::unique_ptr<Simulator> test = make_simulator(spec.test_sim);
            const std::unique_ptr<Simulator> baseline = make_simulator(spec.baseline_sim);
            CombinedSimulator combined(*test, *baseline);
            write_trace_file(path.string(), combined,
                             make_dast_reward(combined, spec.reward),
                             results[i].best_paths.best(),
                             header_fields(spec, static_cast<int>(i)),
                             results[i].best_paths.paths(), make_trace_extras(combined));
        } else {
            const std::unique_ptr<Simulator> sim = make_simulator(spec.sim);
            write_trace_file(path.string(), *sim, make_ast_reward(spec.reward),
                             results[i].best_paths.best(),
                             header_fields(spec, static_cast<int>(i)),
                             results[i].best_paths.paths(), make_trace_extras(*sim));
        }
    }
}

std::vector<CompareRow> compare_solvers(const ExperimentSpec& spec,
                                        const std::vector<Budget>& budgets) {
    std::vector<CompareRow> rows;
    for (const Budget& budget : budgets) {
        for (const SolverKind solver : {SolverKind::mcts, SolverKind::monte_carlo}) {
            ExperimentSpec run = spec;
            run.solver = solver;
            run.budget = budget;
            const std::vector<SearchResult> results = run_searches(run);

            CompareRow row;
            row.budget_mode = budget_mode_name(budget.mode());
            row.budget_amount = budget_amount(budget);
            row.solver = solver_name(solver);
            row.searches = static_cast<int>(results.size());

            int finds = 0;
            double sum = 0.0;
            for (const SearchResult& r : results) {
                bool found = false;
                for (const PathResult& p : r.best_paths.paths()) found |= p.event_reached;
                finds += found ? 1 : 0;
                sum += r.best_paths.empty() ? 0.0 : r.best_paths.best().return_value;
            }
            const double n = static_cast<double>(results.size());
            row.find_rate = finds / n;
            row.mean_best_return = sum / n;

            double sq = 0.0;
            for (const SearchResult& r : results) {
                const double best =
                    r.best_paths.empty() ? 0.0 : r.best_paths.best().return_value;
                sq += (best - row.mean_best_return) * (best - row.mean_best_return);
            }
            row.sem_best_return =
                results.size() > 1 ? std::sqrt(sq / (n - 1.0)) / std::sqrt(n) : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_compare_csv(const std::string& path, const std::vector<CompareRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "budget_mode,budget,solver,searches,find_rate,mean_best_return,sem_best_return\n";
    for (const CompareRow& row : rows) {
        out << row.budget_mode << ',' << format_double(row.budget_amount) << ',' << row.solver
            << ',' << row.searches << ',' << format_double(row.find_rate) << ','
            << format_double(row.mean_best_return) << ','
            << format_double(row.sem_best_return) << '\n';
    }
}

int run_experiment_command(const ExperimentSpec& spec, const std::string& out_dir,
                           std::ostream& log) {
    spec.validate();
    std::filesystem::create_directories(out_dir);

    const std::vector<SearchResult> results = run_searches(spec);
    const std::filesystem::path dir(out_dir);
    write_summary_csv((dir / "summary.csv").string(), spec, results);
    write_trace_files(out_dir, spec, results);

    int finds = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (const SearchResult& r : results) {
        if (r.best_paths.empty()) continue;
        finds += r.best_paths.best().event_reached ? 1 : 0;
        best = std::max(best, r.best_paths.best().return_value);
    }
    log << spec.name << ": " << results.size() << " searches with "
        << solver_name(spec.solver) << ", failure found in " << finds << '/' << results.size()
        << ", best return " << format_double(best) << '\n';
    log << "wrote " << (dir / "summary.csv").string() << " and " << results.size()
        << " trace files\n";
    return 0;
}

int compare_command(const ExperimentSpec& spec, const std::vector<Budget>& budgets,
                    const std::string& out_dir, std::ostream& log) {
    spec.validate();
    if (budgets.empty()) throw std::invalid_argument("compare: no budgets given");
    std::filesystem::create_directories(out_dir);

    const std::vector<CompareRow> rows = compare_solvers(spec, budgets);
    const std::filesystem::path path = std::filesystem::path(out_dir) / "compare.csv";
    write_compare_csv(path.string(), rows);

    for (const CompareRow& row : rows) {
        log << row.solver << " @ " << format_double(row.budget_amount) << ' '
            << row.budget_mode << ": find rate " << format_double(row.find_rate)
            << ", mean best return " << format_double(row.mean_best_return) << '\n';
    }
    log << "wrote " << path.string() << '\n';
    return 0;
}

int replay_trace_command(const std::string& trace_path, std::ostream& log) {
    TraceFile trace;
    SeedSequence seeds;
    double expected = 0.0;
    ReplayBundle bundle;
    try {
        trace = read_trace_file(trace_path);
        seeds = trace.seeds();
        expected = trace.expected_return();
        bundle = bundle_from_header(trace.header);
    } catch (const std::exception& e) {
        log << "replay: unusable trace: " << e.what() << '\n';
        return 1;
    }

    const TrajectoryRecord rec = replay(*bundle.sim, seeds, bundle.reward);
    if (rec.return_value != expected) {
        log << "replay: return mismatch: expected " << format_double(expected) << ", got "
            << format_double(rec.return_value) << '\n';
        return 2;
    }
    const std::string diff = diff_trace(trace, rec);
    if (!diff.empty()) {
        log << "replay: trace mismatch: " << diff << '\n';
        return 2;
    }
    log << "replay: verified " << rec.size() << " steps, return "
        << format_double(rec.return_value) << ", event "
        << (rec.event_reached ? "reached" : "not reached") << '\n';
    return 0;
}

}  // namespace ast
