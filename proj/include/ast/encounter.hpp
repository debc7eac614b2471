#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ast/sim.hpp"

namespace ast {

// Multi-aircraft near-midair-collision simulator. Aircraft fly stochastic
// intended trajectories (zero-mean Gaussian perturbations on vertical
// acceleration, turn rate, and airspeed acceleration); a rule-based
// collision-avoidance system issues vertical advisories which pilots follow
// after a response delay. Kinematics advance by forward Euler at 1 Hz.
// The failure set is a near midair collision between any pair.
//
// Units: feet, seconds, radians. Heading 0 points north, increasing toward
// east.

struct AircraftState {
    double north = 0.0;          // ft
    double east = 0.0;           // ft
    double altitude = 0.0;       // ft
    double vertical_rate = 0.0;  // ft/s
    double heading = 0.0;        // rad
    double airspeed = 0.0;       // ft/s

    bool operator==(const AircraftState&) const = default;
};

enum class Advisory { none, climb, descend, level_off, strong_climb, strong_descend };

/// Short display code ("COC", "CL1500", ...).
const char* advisory_code(Advisory a);

/// Vertical sense of an advisory: +1 climb, -1 descend, 0 otherwise.
int advisory_sense(Advisory a);

/// One aircraft's commanded accelerations for a step.
struct PilotCommand {
    double vertical_accel = 0.0;  // ft/s^2
    double turn_rate = 0.0;       // rad/s
    double airspeed_accel = 0.0;  // ft/s^2
};

/// Standard deviations of the intended-flight command noise. A zero entry
/// makes that axis deterministic (and excludes it from the step likelihood).
struct CommandNoise {
    double vertical_accel_std = 2.0;  // ft/s^2
    double turn_rate_std = 0.02;      // rad/s
    double airspeed_accel_std = 1.0;  // ft/s^2
};

/// Advisory logic parameters. The thresholds describe a simple geometric
/// alerting rule: project the horizontal closest point of approach from
/// current velocities, alert when it falls below alert_range within
/// alert_time, and escalate an active advisory when the encounter keeps
/// converging inside the strengthen thresholds.
struct CasParams {
    bool enabled = true;
    double alert_range = 2500.0;        // ft
    double alert_time = 25.0;           // s
    double strengthen_range = 1250.0;   // ft
    double strengthen_time = 12.0;      // s
    double target_rate = 25.0;          // ft/s   (1500 ft/min)
    double strong_target_rate = 125.0 / 3.0;  // ft/s (2500 ft/min)
    double accel = 8.05;                // ft/s^2 (quarter g)
    double strong_accel = 32.2 / 3.0;   // ft/s^2 (third g)
};

struct PilotParams {
    double initial_delay = 5.0;     // s before complying with a first advisory
    double subsequent_delay = 3.0;  // s before complying with a revision
};

struct EncounterConfig {
    int num_aircraft = 2;
    int horizon = 50;                 // t_max, steps of 1 s
    double nmac_horizontal = 500.0;   // ft
    double nmac_vertical = 100.0;     // ft
    CommandNoise noise;
    CasParams cas;
    PilotParams pilot;

    // Star initializer: aircraft are placed on a circle at equally spaced
    // bearings, headed at the origin, each at range airspeed * approach_time
    // so all arrive together. Scalars are drawn uniformly from the ranges
    // below using a stream derived from init_seed.
    double approach_time = 40.0;  // s
    double airspeed_min = 180.0, airspeed_max = 220.0;    // ft/s
    double altitude_min = 10000.0, altitude_max = 10000.0;  // ft
    double vertical_rate_min = 0.0, vertical_rate_max = 0.0;  // ft/s
    std::uint64_t init_seed = 0;

    void validate() const;
};

/// Advisory bookkeeping for one aircraft. Issued advisories queue up with
/// their compliance times; `current` is what the pilot is actually flying.
struct RaState {
    Advisory current = Advisory::none;
    bool ever_issued = false;
    struct Pending {
        Advisory advisory;
        double respond_at;  // sim time when the pilot starts complying
    };
    std::vector<Pending> queue;

    /// Most recently issued advisory (queued or current).
    Advisory latest() const { return queue.empty() ? current : queue.back().advisory; }
};

/// Queue `requested` on `ra` at time `now`, applying the pilot delay
/// (initial_delay for a first-ever advisory, subsequent_delay after) and the
/// escalation guard: a strengthened advisory is downgraded to its weak form
/// unless the weak same-sense advisory is already current. Re-issuing the
/// latest advisory is a no-op.
void issue_advisory(RaState& ra, Advisory requested, double now, const PilotParams& pilot);

/// Promote due queue entries (respond_at <= now) into ra.current, in order.
void advance_ra_queue(RaState& ra, double now);

/// Compliance command for one step: tracks the advisory's target vertical
/// rate under its acceleration cap, keeping the intended horizontal and
/// airspeed components. Advisory none returns `intended` unchanged.
PilotCommand pilot_response(Advisory current, double vertical_rate,
                            const PilotCommand& intended, const CasParams& cas);

/// Forward Euler kinematics, one step of dt seconds. Position and altitude
/// integrate the current velocity; rates then integrate the command.
AircraftState encounter_step_dynamics(const AircraftState& s, const PilotCommand& cmd,
                                      double dt = 1.0);

/// Near midair collision test for a pair: horizontal separation under
/// nmac_horizontal and vertical separation under nmac_vertical.
bool is_nmac(const AircraftState& a, const AircraftState& b, const EncounterConfig& cfg);
bool any_nmac(std::span<const AircraftState> states, const EncounterConfig& cfg);

/// 3-D Euclidean separation of a pair.
double pair_separation(const AircraftState& a, const AircraftState& b);

/// Smallest pairwise separation in a set of states.
double min_separation(std::span<const AircraftState> states);

/// Star initial placement (see EncounterConfig).
std::vector<AircraftState> star_initial_states(const EncounterConfig& cfg);

class EncounterSim final : public Simulator {
public:
    explicit EncounterSim(const EncounterConfig& cfg);

    void initialize() override;
    StepOutput step(Seed seed) override;
    bool is_terminal() const override;
    int max_steps() const override { return cfg_.horizon; }

    const EncounterConfig& config() const { return cfg_; }
    std::span<const AircraftState> aircraft() const;
    std::span<const RaState> ra_states() const;
    int step_count() const;
    /// Closest 3-D approach over the states visited so far.
    double closest_approach() const;

private:
    void require_initialized(const char* op) const;
    void cas_update();

    EncounterConfig cfg_;
    bool initialized_ = false;
    std::vector<AircraftState> aircraft_;
    std::vector<RaState> ra_;
    int step_count_ = 0;
    double closest_approach_ = 0.0;
};

}  // namespace ast
