#include "ast/encounter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ast {

const char* advisory_code(Advisory a) {
    switch (a) {
        case Advisory::none: return "COC";
        case Advisory::climb: return "CL1500";
        case Advisory::descend: return "DS1500";
        case Advisory::level_off: return "LVL";
        case Advisory::strong_climb: return "CL2500";
        case Advisory::strong_descend: return "DS2500";
    }
    return "?";
}

int advisory_sense(Advisory a) {
    switch (a) {
        case Advisory::climb:
        case Advisory::strong_climb: return +1;
        case Advisory::descend:
        case Advisory::strong_descend: return -1;
        default: return 0;
    }
}

void EncounterConfig::validate() const {
    if (num_aircraft < 2) {
        throw std::invalid_argument("EncounterConfig: num_aircraft must be >= 2");
    }
    if (horizon < 1) throw std::invalid_argument("EncounterConfig: horizon must be >= 1");
    if (!(nmac_horizontal > 0.0) || !(nmac_vertical > 0.0)) {
        throw std::invalid_argument("EncounterConfig: NMAC thresholds must be > 0");
    }
    if (noise.vertical_accel_std < 0.0 || noise.turn_rate_std < 0.0 ||
        noise.airspeed_accel_std < 0.0) {
        throw std::invalid_argument("EncounterConfig: noise stds must be >= 0");
    }
    if (pilot.initial_delay < 0.0 || pilot.subsequent_delay < 0.0) {
        throw std::invalid_argument("EncounterConfig: pilot delays must be >= 0");
    }
    if (!(approach_time > 0.0)) {
        throw std::invalid_argument("EncounterConfig: approach_time must be > 0");
    }
    if (!(airspeed_min > 0.0) || airspeed_max < airspeed_min ||
        altitude_max < altitude_min || vertical_rate_max < vertical_rate_min) {
        throw std::invalid_argument("EncounterConfig: bad initial-state ranges");
    }
    if (!(cas.alert_range > 0.0) || !(cas.alert_time > 0.0) || !(cas.target_rate > 0.0) ||
        !(cas.strong_target_rate > 0.0) || !(cas.accel > 0.0) || !(cas.strong_accel > 0.0)) {
        throw std::invalid_argument("EncounterConfig: bad CAS parameters");
    }
}

void issue_advisory(RaState& ra, Advisory requested, double now, const PilotParams& pilot) {
    // A strengthened advisory is only valid as an escalation of the weak
    // advisory of the same sense that the pilot is already flying.
    if (requested == Advisory::strong_climb && ra.current != Advisory::climb &&
        ra.current != Advisory::strong_climb) {
        requested = Advisory::climb;
    }
    if (requested == Advisory::strong_descend && ra.current != Advisory::descend &&
        ra.current != Advisory::strong_descend) {
        requested = Advisory::descend;
    }
    if (requested == ra.latest()) return;

    const double delay = ra.ever_issued ? pilot.subsequent_delay : pilot.initial_delay;
    ra.queue.push_back(RaState::Pending{requested, now + delay});
    ra.ever_issued = true;
}

void advance_ra_queue(RaState& ra, double now) {
    std::size_t due = 0;
    while (due < ra.queue.size() && ra.queue[due].respond_at <= now) {
        ra.current = ra.queue[due].advisory;
        ++due;
    }
    ra.queue.erase(ra.queue.begin(), ra.queue.begin() + due);
}

PilotCommand pilot_response(Advisory current, double vertical_rate,
                            const PilotCommand& intended, const CasParams& cas) {
    if (current == Advisory::none) return intended;

    double target = 0.0;  // level_off
    double cap = cas.accel;
    switch (current) {
        case Advisory::climb: target = cas.target_rate; break;
        case Advisory::descend: target = -cas.target_rate; break;
        case Advisory::strong_climb:
            target = cas.strong_target_rate;
            cap = cas.strong_accel;
            break;
        case Advisory::strong_descend:
            target = -cas.strong_target_rate;
            cap = cas.strong_accel;
            break;
        default: break;
    }

    PilotCommand cmd = intended;
    cmd.vertical_accel = std::clamp(target - vertical_rate, -cap, cap);
    return cmd;
}

AircraftState encounter_step_dynamics(const AircraftState& s, const PilotCommand& cmd,
                                      double dt) {
    AircraftState next = s;
    next.north = s.north + s.airspeed * std::cos(s.heading) * dt;
    next.east = s.east + s.airspeed * std::sin(s.heading) * dt;
    next.altitude = s.altitude + s.vertical_rate * dt;
    next.vertical_rate = s.vertical_rate + cmd.vertical_accel * dt;
    next.heading = s.heading + cmd.turn_rate * dt;
    next.airspeed = std::max(s.airspeed + cmd.airspeed_accel * dt, 1.0);
    return next;
}

bool is_nmac(const AircraftState& a, const AircraftState& b, const EncounterConfig& cfg) {
    const double dh = std::hypot(a.north - b.north, a.east - b.east);
    const double dv = std::abs(a.altitude - b.altitude);
    return dh < cfg.nmac_horizontal && dv < cfg.nmac_vertical;
}

bool any_nmac(std::span<const AircraftState> states, const EncounterConfig& cfg) {
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            if (is_nmac(states[i], states[j], cfg)) return true;
        }
    }
    return false;
}

double pair_separation(const AircraftState& a, const AircraftState& b) {
    const double dh = std::hypot(a.north - b.north, a.east - b.east);
    return std::hypot(dh, a.altitude - b.altitude);
}

double min_separation(std::span<const AircraftState> states) {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            lowest = std::min(lowest, pair_separation(states[i], states[j]));
        }
    }
    return lowest;
}

std::vector<AircraftState> star_initial_states(const EncounterConfig& cfg) {
    std::vector<AircraftState> states(cfg.num_aircraft);
    for (int i = 0; i < cfg.num_aircraft; ++i) {
        SplitMix64 gen(derive_stream(cfg.init_seed, static_cast<std::uint64_t>(i)));
        AircraftState& s = states[i];
        s.airspeed = gen.next_in(cfg.airspeed_min, cfg.airspeed_max);
        s.altitude = gen.next_in(cfg.altitude_min, cfg.altitude_max);
        s.vertical_rate = gen.next_in(cfg.vertical_rate_min, cfg.vertical_rate_max);

        const double bearing = 2.0 * std::numbers::pi * i / cfg.num_aircraft;
        const double range = s.airspeed * cfg.approach_time;
        s.north = range * std::cos(bearing);
        s.east = range * std::sin(bearing);
        s.heading = std::fmod(bearing + std::numbers::pi, 2.0 * std::numbers::pi);
    }
    return states;
}

EncounterSim::EncounterSim(const EncounterConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void EncounterSim::initialize() {
    initialized_ = true;
    aircraft_ = star_initial_states(cfg_);
    ra_.assign(aircraft_.size(), RaState{});
    step_count_ = 0;
    closest_approach_ = min_separation(aircraft_);
}

namespace {

struct Velocity {
    double north, east;
};

Velocity horizontal_velocity(const AircraftState& s) {
    return {s.airspeed * std::cos(s.heading), s.airspeed * std::sin(s.heading)};
}

struct Threat {
    int index = -1;
    double t_cpa = 0.0;
    double range_cpa = 0.0;
};

}  // namespace

void EncounterSim::cas_update() {
    const double now = step_count_;
    const int n = static_cast<int>(aircraft_.size());

    // Index order; earlier aircraft's fresh advisories are visible to later
    // ones through latest(), which is what keeps a simultaneous pair alert
    // from picking the same sense.
    for (int i = 0; i < n; ++i) {
        std::vector<Threat> threats;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double rn = aircraft_[j].north - aircraft_[i].north;
            const double re = aircraft_[j].east - aircraft_[i].east;
            const Velocity vi = horizontal_velocity(aircraft_[i]);
            const Velocity vj = horizontal_velocity(aircraft_[j]);
            const double vn = vj.north - vi.north;
            const double ve = vj.east - vi.east;
            const double rv = rn * vn + re * ve;
            if (rv >= 0.0) continue;  // not converging
            const double vv = vn * vn + ve * ve;
            const double t_cpa = std::clamp(-rv / vv, 0.0, cfg_.cas.alert_time);
            const double range_cpa = std::hypot(rn + vn * t_cpa, re + ve * t_cpa);
            if (range_cpa < cfg_.cas.alert_range) {
                threats.push_back(Threat{j, t_cpa, range_cpa});
            }
        }

        if (threats.empty()) {
            // Clear of conflict: drop advisory state; a later alert counts
            // as a fresh initial advisory.
            ra_[i] = RaState{};
            continue;
        }

        const Threat primary = *std::min_element(
            threats.begin(), threats.end(), [](const Threat& a, const Threat& b) {
                if (a.t_cpa != b.t_cpa) return a.t_cpa < b.t_cpa;
                if (a.range_cpa != b.range_cpa) return a.range_cpa < b.range_cpa;
                return a.index < b.index;
            });

        // Desired sense: move away from the primary threat's projected
        // altitude; dead ties break by index so a symmetric pair splits.
        const AircraftState& own = aircraft_[i];
        const AircraftState& other = aircraft_[primary.index];
        const double own_proj = own.altitude + own.vertical_rate * primary.t_cpa;
        const double other_proj = other.altitude + other.vertical_rate * primary.t_cpa;
        int sense;
        if (own_proj != other_proj) {
            sense = own_proj > other_proj ? +1 : -1;
        } else {
            sense = i < primary.index ? +1 : -1;
        }

        // Pairwise coordination: a sense held by any threat is unavailable.
        bool climb_blocked = false;
        bool descend_blocked = false;
        for (const Threat& t : threats) {
            const int held = advisory_sense(ra_[t.index].latest());
            climb_blocked |= held == +1;
            descend_blocked |= held == -1;
        }

        Advisory request;
        if (climb_blocked && descend_blocked) {
            request = Advisory::level_off;
        } else {
            if (sense == +1 && climb_blocked) sense = -1;
            if (sense == -1 && descend_blocked) sense = +1;
            const bool strengthen =
                advisory_sense(ra_[i].current) == sense &&
                primary.t_cpa < cfg_.cas.strengthen_time &&
                primary.range_cpa < cfg_.cas.strengthen_range;
            if (sense == +1) {
                request = strengthen ? Advisory::strong_climb : Advisory::climb;
            } else {
                request = strengthen ? Advisory::strong_descend : Advisory::descend;
            }
        }
        issue_advisory(ra_[i], request, now, cfg_.pilot);
    }
}

StepOutput EncounterSim::step(Seed seed) {
    require_initialized("step");
    const int n = static_cast<int>(aircraft_.size());

    StepOutput out;
    out.event = any_nmac(aircraft_, cfg_);
    out.miss_distance = closest_approach_;

    // Intended-flight noise: one substream per aircraft, draws in fixed
    // order (vertical, turn, airspeed). Draws are made even on axes that end
    // up overridden so the stream layout never depends on advisory state.
    std::vector<PilotCommand> intended(n);
    for (int i = 0; i < n; ++i) {
        SplitMix64 gen(derive_stream(seed, static_cast<std::uint64_t>(i)));
        intended[i].vertical_accel = cfg_.noise.vertical_accel_std * gen.next_normal();
        intended[i].turn_rate = cfg_.noise.turn_rate_std * gen.next_normal();
        intended[i].airspeed_accel = cfg_.noise.airspeed_accel_std * gen.next_normal();
    }

    if (cfg_.cas.enabled) cas_update();
    const double now = step_count_;
    for (RaState& ra : ra_) advance_ra_queue(ra, now);

    // The step likelihood is the joint density of the disturbances actually
    // applied: an axis with zero std is deterministic, and the vertical axis
    // of a complying pilot is dictated by the advisory, so neither
    // contributes a factor.
    double log_likelihood = 0.0;
    std::vector<AircraftState> next(n);
    for (int i = 0; i < n; ++i) {
        const bool complying = ra_[i].current != Advisory::none;
        const PilotCommand cmd =
            complying
                ? pilot_response(ra_[i].current, aircraft_[i].vertical_rate, intended[i],
                                 cfg_.cas)
                : intended[i];
        if (!complying && cfg_.noise.vertical_accel_std > 0.0) {
            log_likelihood +=
                log_normal_pdf(intended[i].vertical_accel, cfg_.noise.vertical_accel_std);
        }
        if (cfg_.noise.turn_rate_std > 0.0) {
            log_likelihood += log_normal_pdf(intended[i].turn_rate, cfg_.noise.turn_rate_std);
        }
        if (cfg_.noise.airspeed_accel_std > 0.0) {
            log_likelihood +=
                log_normal_pdf(intended[i].airspeed_accel, cfg_.noise.airspeed_accel_std);
        }
        next[i] = encounter_step_dynamics(aircraft_[i], cmd);
    }

    aircraft_ = std::move(next);
    ++step_count_;
    closest_approach_ = std::min(closest_approach_, min_separation(aircraft_));
    out.likelihood = std::exp(log_likelihood);
    return out;
}

bool EncounterSim::is_terminal() const {
    require_initialized("is_terminal");
    return any_nmac(aircraft_, cfg_) || step_count_ >= cfg_.horizon;
}

std::span<const AircraftState> EncounterSim::aircraft() const {
    require_initialized("aircraft");
    return aircraft_;
}

std::span<const RaState> EncounterSim::ra_states() const {
    require_initialized("ra_states");
    return ra_;
}

int EncounterSim::step_count() const {
    require_initialized("step_count");
    return step_count_;
}

double EncounterSim::closest_approach() const {
    require_initialized("closest_approach");
    return closest_approach_;
}

void EncounterSim::require_initialized(const char* op) const {
    if (!initialized_) {
        throw std::logic_error(std::string("EncounterSim::") + op +
                               ": initialize() not called");
    }
}

}  // namespace ast
