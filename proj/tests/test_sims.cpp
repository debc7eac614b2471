#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ast/encounter.hpp"
#include "ast/reward.hpp"
#include "ast/seed.hpp"
#include "ast/sim.hpp"
#include "ast/walker.hpp"
#include "doctest.h"

using namespace ast;

TEST_CASE("walker transition density and motion") {
    WalkerConfig cfg;
    const WalkerTransition at_rest = walker_transition(0.0, 0.0, cfg);
    CHECK(at_rest.position == 0.0);
    CHECK(at_rest.likelihood == doctest::Approx(0.3989422804014327).epsilon(1e-14));

    const WalkerTransition jump = walker_transition(1.0, 2.0, cfg);
    CHECK(jump.position == 3.0);
    CHECK(jump.likelihood == doctest::Approx(0.05399096651318806).epsilon(1e-14));

    WalkerConfig wide = cfg;
    wide.step_std = 2.0;
    const WalkerTransition scaled = walker_transition(0.0, 2.0, wide);
    CHECK(scaled.likelihood == doctest::Approx(0.24197072451914337 / 2.0).epsilon(1e-14));
}

TEST_CASE("disturbance scales with the step deviation") {
    const double base = seed_to_disturbance(77, 1.0);
    CHECK(seed_to_disturbance(77, 2.5) == doctest::Approx(2.5 * base).epsilon(1e-14));
    CHECK(seed_to_disturbance(77, 1.0) == base);  // deterministic

    const int n = 1'000'000;
    double sum = 0.0, sum_sq = 0.0;
    for (Seed s = 1; s <= Seed(n); ++s) {
        const double e = seed_to_disturbance(s, 1.0);
        sum += e;
        sum_sq += e * e;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 3.5 / std::sqrt(double(n)));
    CHECK(sum_sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("walker miss distance tracks the best approach") {
    WalkerConfig cfg;
    cfg.threshold = 10.0;
    const std::vector<double> path{0.0, 4.0, 2.0, 7.5, 3.0};
    CHECK(walker_miss_distance(path, cfg) == doctest::Approx(2.5).epsilon(1e-14));
    const std::vector<double> crossed{0.0, 11.0, 5.0};
    CHECK(walker_miss_distance(crossed, cfg) == 0.0);
}

TEST_CASE("grid search confirms the analytic two-step optimum") {
    // Brute-force the most likely pair of disturbances that crosses 2.0
    // within two steps; the straight split (1, 1) should win.
    WalkerConfig cfg;
    cfg.threshold = 2.0;
    cfg.horizon = 2;

    double best = -1e300;
    double best_e1 = 0.0, best_e2 = 0.0;
    for (double e1 = -1.0; e1 <= 3.0; e1 += 0.01) {
        for (double e2 = -1.0; e2 <= 3.0; e2 += 0.01) {
            if (e1 + e2 < cfg.threshold && e1 < cfg.threshold) continue;
            const double ll = log_normal_pdf(e1, 1.0) + log_normal_pdf(e2, 1.0);
            if (ll > best) {
                best = ll;
                best_e1 = e1;
                best_e2 = e2;
            }
        }
    }
    CHECK(best_e1 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(best_e2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(best == doctest::Approx(analytic_optimum_log_likelihood(cfg)).epsilon(1e-3));
    CHECK(analytic_optimum_log_likelihood(cfg) ==
          doctest::Approx(-2.8378770664093453).epsilon(1e-12));
}

TEST_CASE("walker terminates on crossing or horizon") {
    WalkerConfig cfg;
    cfg.threshold = 0.5;
    cfg.horizon = 100;
    WalkerSim sim(cfg);
    sim.initialize();
    int steps = 0;
    std::mt19937_64 rng(3);
    while (!sim.is_terminal()) {
        sim.step(rng());
        ++steps;
        REQUIRE(steps <= 100);
    }
    CHECK(sim.position() >= 0.5);

    WalkerConfig stuck;
    stuck.threshold = 1e9;
    stuck.horizon = 5;
    WalkerSim bounded(stuck);
    bounded.initialize();
    for (int i = 0; i < 5; ++i) {
        CHECK_FALSE(bounded.is_terminal());
        bounded.step(rng());
    }
    CHECK(bounded.is_terminal());
    CHECK(bounded.step_count() == 5);
}

TEST_CASE("advisory codes and senses") {
    CHECK(advisory_code(Advisory::none) == std::string("COC"));
    CHECK(advisory_code(Advisory::climb) == std::string("CL1500"));
    CHECK(advisory_code(Advisory::descend) == std::string("DS1500"));
    CHECK(advisory_code(Advisory::level_off) == std::string("LVL"));
    CHECK(advisory_code(Advisory::strong_climb) == std::string("CL2500"));
    CHECK(advisory_code(Advisory::strong_descend) == std::string("DS2500"));
    CHECK(advisory_sense(Advisory::climb) == 1);
    CHECK(advisory_sense(Advisory::strong_climb) == 1);
    CHECK(advisory_sense(Advisory::descend) == -1);
    CHECK(advisory_sense(Advisory::strong_descend) == -1);
    CHECK(advisory_sense(Advisory::none) == 0);
    CHECK(advisory_sense(Advisory::level_off) == 0);
}

TEST_CASE("advisories queue behind pilot delays") {
    PilotParams pilot;  // 5 s initial, 3 s subsequent
    RaState ra;
    issue_advisory(ra, Advisory::climb, 0.0, pilot);
    CHECK(ra.current == Advisory::none);
    CHECK(ra.latest() == Advisory::climb);

    advance_ra_queue(ra, 4.9);
    CHECK(ra.current == Advisory::none);
    advance_ra_queue(ra, 5.0);
    CHECK(ra.current == Advisory::climb);

    issue_advisory(ra, Advisory::strong_climb, 10.0, pilot);
    advance_ra_queue(ra, 12.9);
    CHECK(ra.current == Advisory::climb);
    advance_ra_queue(ra, 13.0);
    CHECK(ra.current == Advisory::strong_climb);
}

TEST_CASE("reissuing the pending advisory is a no-op") {
    PilotParams pilot;
    RaState ra;
    issue_advisory(ra, Advisory::descend, 0.0, pilot);
    issue_advisory(ra, Advisory::descend, 1.0, pilot);
    CHECK(ra.queue.size() == 1);
    advance_ra_queue(ra, 5.0);
    CHECK(ra.current == Advisory::descend);
}

TEST_CASE("strengthening requires a matching weak advisory") {
    PilotParams pilot;
    RaState ra;
    // A strong advisory with no current weak one of the same sense degrades.
    issue_advisory(ra, Advisory::strong_climb, 0.0, pilot);
    advance_ra_queue(ra, 5.0);
    CHECK(ra.current == Advisory::climb);

    issue_advisory(ra, Advisory::strong_climb, 6.0, pilot);
    advance_ra_queue(ra, 9.0);
    CHECK(ra.current == Advisory::strong_climb);
}

TEST_CASE("pilot response accelerates toward the advised rate") {
    CasParams cas;
    const PilotCommand intended{0.0, 0.03, -1.5};

    const PilotCommand climb = pilot_response(Advisory::climb, 0.0, intended, cas);
    CHECK(climb.vertical_accel == doctest::Approx(cas.accel).epsilon(1e-14));
    CHECK(climb.turn_rate == 0.03);  // horizontal intent untouched
    CHECK(climb.airspeed_accel == -1.5);

    // Already above the 25 ft/s target: ease off without the cap binding.
    const PilotCommand ease = pilot_response(Advisory::climb, 30.0, intended, cas);
    CHECK(ease.vertical_accel == doctest::Approx(-5.0).epsilon(1e-12));

    const PilotCommand strong = pilot_response(Advisory::strong_descend, 0.0, intended, cas);
    CHECK(strong.vertical_accel == doctest::Approx(-cas.strong_accel).epsilon(1e-14));

    const PilotCommand flatten = pilot_response(Advisory::level_off, 30.0, intended, cas);
    CHECK(flatten.vertical_accel == doctest::Approx(-cas.accel).epsilon(1e-14));

    const PilotCommand clear = pilot_response(Advisory::none, 30.0, intended, cas);
    CHECK(clear.vertical_accel == intended.vertical_accel);
}

TEST_CASE("euler dynamics integrate one second at a time") {
    AircraftState s{};
    s.north = 0.0;
    s.east = 0.0;
    s.altitude = 10000.0;
    s.vertical_rate = 25.0;
    s.heading = 0.0;  // due north
    s.airspeed = 200.0;

    const AircraftState next = encounter_step_dynamics(s, PilotCommand{});
    CHECK(next.north == doctest::Approx(200.0).epsilon(1e-12));
    CHECK(next.east == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(next.altitude == doctest::Approx(10025.0).epsilon(1e-12));
    CHECK(next.vertical_rate == 25.0);

    const AircraftState turned = encounter_step_dynamics(s, PilotCommand{8.05, 0.1, -2.0});
    CHECK(turned.vertical_rate == doctest::Approx(33.05).epsilon(1e-12));
    CHECK(turned.heading == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(turned.airspeed == doctest::Approx(198.0).epsilon(1e-12));
}

TEST_CASE("near mid-air collision bounds are strict") {
    AircraftState a{};
    AircraftState b{};
    a.altitude = 10000.0;

    b.north = 400.0;
    b.altitude = 10050.0;
    CHECK(is_nmac(a, b, EncounterConfig{}));

    b.north = 600.0;
    CHECK_FALSE(is_nmac(a, b, EncounterConfig{}));

    b.north = 400.0;
    b.altitude = 10150.0;
    CHECK_FALSE(is_nmac(a, b, EncounterConfig{}));

    b.north = 500.0;
    b.altitude = 10000.0;
    CHECK_FALSE(is_nmac(a, b, EncounterConfig{}));  // boundary excluded
}

TEST_CASE("pairwise separation is three dimensional") {
    AircraftState a{};
    AircraftState b{};
    a.altitude = 10000.0;
    b.north = 300.0;
    b.east = 400.0;
    b.altitude = 10050.0;
    CHECK(pair_separation(a, b) == doctest::Approx(std::sqrt(252500.0)).epsilon(1e-14));

    std::vector<AircraftState> fleet{a, b};
    CHECK(min_separation(fleet) == pair_separation(a, b));
}

TEST_CASE("star initialization spaces aircraft around a circle") {
    EncounterConfig cfg;
    cfg.num_aircraft = 3;
    cfg.init_seed = 9;
    const std::vector<AircraftState> fleet = star_initial_states(cfg);
    REQUIRE(fleet.size() == 3);

    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const double range = std::hypot(fleet[i].north, fleet[i].east);
        CHECK(range == doctest::Approx(fleet[i].airspeed * cfg.approach_time).epsilon(1e-9));
        // Heading points back at the origin.
        const double inward = std::atan2(-fleet[i].east, -fleet[i].north);
        const double diff =
            std::remainder(fleet[i].heading - inward, 2.0 * 3.141592653589793);
        CHECK(std::abs(diff) < 1e-9);
        CHECK(fleet[i].airspeed >= cfg.airspeed_min);
        CHECK(fleet[i].airspeed <= cfg.airspeed_max);
        CHECK(fleet[i].altitude == 10000.0);
        CHECK(fleet[i].vertical_rate == 0.0);
    }

    const std::vector<AircraftState> again = star_initial_states(cfg);
    CHECK(again[1].airspeed == fleet[1].airspeed);

    EncounterConfig other = cfg;
    other.init_seed = 10;
    const std::vector<AircraftState> different = star_initial_states(other);
    CHECK(different[1].airspeed != fleet[1].airspeed);
}

TEST_CASE("encounter replays are deterministic") {
    EncounterConfig cfg;
    cfg.horizon = 30;
    const RewardFn reward = make_ast_reward(RewardParams{});
    std::mt19937_64 rng(5);
    SeedSequence seeds(30);
    for (Seed& s : seeds) s = rng();

    EncounterSim sim(cfg);
    const TrajectoryRecord a = replay(sim, seeds, reward);
    const TrajectoryRecord b = replay(sim, seeds, reward);
    CHECK(a == b);
    CHECK(a.size() > 0);
    for (const StepOutput& out : a.step_outputs) {
        CHECK(out.likelihood > 0.0);
        CHECK(std::isfinite(out.likelihood));
    }
}

TEST_CASE("head-on geometry collides without avoidance") {
    EncounterConfig cfg;
    cfg.cas.enabled = false;
    cfg.noise.vertical_accel_std = 0.0;
    cfg.noise.turn_rate_std = 0.0;
    cfg.noise.airspeed_accel_std = 0.0;
    cfg.init_seed = 1;

    EncounterSim sim(cfg);
    sim.initialize();
    bool nmac = false;
    while (!sim.is_terminal()) {
        nmac = sim.step(0).event || nmac;
        nmac = nmac || any_nmac(sim.aircraft(), cfg);
    }
    CHECK(nmac);
    // The episode ends the moment separation drops below the collision
    // bound, one step before the geometric crossing, so the closest visited
    // approach is about one second of combined closing speed.
    CHECK(sim.closest_approach() < cfg.nmac_horizontal);
}

TEST_CASE("avoidance logic prevents the head-on collision") {
    EncounterConfig cfg;
    cfg.noise.vertical_accel_std = 0.0;
    cfg.noise.turn_rate_std = 0.0;
    cfg.noise.airspeed_accel_std = 0.0;
    cfg.init_seed = 1;

    EncounterSim sim(cfg);
    sim.initialize();
    bool nmac = false;
    bool alerted = false;
    bool same_sense = false;
    while (!sim.is_terminal()) {
        nmac = sim.step(0).event || nmac;
        nmac = nmac || any_nmac(sim.aircraft(), cfg);
        const int s0 = advisory_sense(sim.ra_states()[0].current);
        const int s1 = advisory_sense(sim.ra_states()[1].current);
        alerted = alerted || s0 != 0 || s1 != 0;
        same_sense = same_sense || (s0 != 0 && s0 == s1);
    }
    CHECK_FALSE(nmac);
    CHECK(alerted);
    CHECK_FALSE(same_sense);
    CHECK(sim.closest_approach() > 500.0);

    // Zero noise means every density factor is one.
    EncounterSim fresh(cfg);
    fresh.initialize();
    const StepOutput out = fresh.step(123);
    CHECK(out.likelihood == 1.0);
}

TEST_CASE("paired advisories stay coordinated under random seeds") {
    EncounterConfig cfg;
    std::mt19937_64 rng(17);
    for (int episode = 0; episode < 20; ++episode) {
        cfg.init_seed = rng();
        EncounterSim sim(cfg);
        sim.initialize();
        while (!sim.is_terminal()) {
            sim.step(rng());
            const int s0 = advisory_sense(sim.ra_states()[0].current);
            const int s1 = advisory_sense(sim.ra_states()[1].current);
            if (s0 != 0 && s1 != 0) CHECK(s0 != s1);
        }
    }
}

TEST_CASE("three-ship stars fall back to level-off when both senses are blocked") {
    EncounterConfig cfg;
    cfg.num_aircraft = 3;
    cfg.noise.vertical_accel_std = 0.0;
    cfg.noise.turn_rate_std = 0.0;
    cfg.noise.airspeed_accel_std = 0.0;
    cfg.init_seed = 2;

    EncounterSim sim(cfg);
    sim.initialize();
    bool saw_level_off = false;
    while (!sim.is_terminal()) {
        sim.step(0);
        for (const RaState& ra : sim.ra_states()) {
            saw_level_off = saw_level_off || ra.latest() == Advisory::level_off;
        }
    }
    CHECK(saw_level_off);
}

TEST_CASE("encounter likelihood multiplies only applied noise factors") {
    EncounterConfig cfg;
    cfg.noise.turn_rate_std = 0.0;
    cfg.noise.airspeed_accel_std = 0.0;
    cfg.cas.enabled = false;
    cfg.init_seed = 4;

    EncounterSim sim(cfg);
    sim.initialize();
    const Seed seed = 31337;
    const StepOutput out = sim.step(seed);

    double expected = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        SplitMix64 gen(derive_stream(seed, i));
        const double vertical = cfg.noise.vertical_accel_std * gen.next_normal();
        expected += log_normal_pdf(vertical, cfg.noise.vertical_accel_std);
    }
    CHECK(out.likelihood == doctest::Approx(std::exp(expected)).epsilon(1e-12));
}
