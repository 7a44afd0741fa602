#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bridgesim/bridge.hpp"

using namespace bridgesim;

namespace {

JointTrajectory ramp_traj(int dof, double T, double dt, double slope) {
    JointTrajectory traj;
    traj.dof = dof;
    for (double t = 0.0; t <= T + 1e-9; t += dt) {
        TrajectoryPoint p;
        p.t = t;
        for (int j = 0; j < dof; ++j) p.q.push_back(slope * t);
        traj.points.push_back(std::move(p));
    }
    return traj;
}

SimConfig quiet_config(double up_ms, double down_ms, uint64_t seed = 1) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.uplink = {up_ms, 0.0, 0.0};
    cfg.downlink = {down_ms, 0.0, 0.0};
    return cfg;
}

}  // namespace

TEST_CASE("base and gripper goals run concurrently, arm lane serializes") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    auto base = bridge.client().submit_base(GoalBase{0.2, 0.0, 0.0, 0.5});
    auto grip = bridge.client().submit_gripper(GoalGripper{Side::left, 1.0});

    bridge.run_for(0.1);
    CHECK(base->state == GoalState::active);
    CHECK(grip->state == GoalState::active);  // both lanes progress at once

    auto arm1 = bridge.client().send_single_trajectory(ramp_traj(7, 0.5, 0.1, 10.0), Side::left);
    auto arm2 = bridge.client().send_single_trajectory(ramp_traj(7, 0.5, 0.1, 10.0), Side::left);
    bridge.run_for(0.05);
    CHECK(arm1->state == GoalState::active);
    CHECK(arm2->state == GoalState::pending);  // waits on the same lane
    CHECK(arm2->goal_seq == 0);                // not sent yet

    bridge.run_for(2.0);
    CHECK(arm1->state == GoalState::succeeded);
    CHECK(arm2->state == GoalState::succeeded);
    CHECK(base->state == GoalState::succeeded);
    CHECK(grip->state == GoalState::succeeded);
}

TEST_CASE("submit on a closed link throws") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    bridge.client().close();
    CHECK_THROWS_AS(bridge.client().submit_base(GoalBase{}), std::runtime_error);
    CHECK_THROWS_AS(bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 1.0),
                                                    Side::left, 10.0, false),
                    std::runtime_error);
}

TEST_CASE("single trajectory sends exactly one goal frame") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    auto h = bridge.client().send_single_trajectory(ramp_traj(7, 0.3, 0.1, 5.0), Side::left);
    bridge.run_for(1.0);
    CHECK(h->state == GoalState::succeeded);
    CHECK(bridge.uplink().log().size() == 1);
}

TEST_CASE("nonzero result status fails the handle") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    JointTrajectory bad = ramp_traj(3, 0.3, 0.1, 5.0);  // wrong dof for the controller
    auto h = bridge.client().send_single_trajectory(bad, Side::left);
    bridge.run_for(0.5);
    CHECK(h->state == GoalState::failed);
    CHECK(h->fail_status == status_rejected);
}

TEST_CASE("await_result times out without a result") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    auto h = bridge.client().submit_base(GoalBase{0.1, 0.0, 0.0, 60.0});  // long goal
    CHECK(bridge.client().await_result(h, 0.5) == GoalState::timed_out);
}

TEST_CASE("stream emission cadence and count") {
    SUBCASE("10 Hz raw emits one sample per 100 ms") {
        VirtualBridge bridge(quiet_config(1.0, 1.0));
        bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 2.0), Side::left, 10.0, false);
        bridge.run_for(2.0);
        const auto& log = bridge.uplink().log();
        REQUIRE(log.size() == 11);  // floor(1.0 * 10) + 1
        for (size_t i = 1; i < log.size(); ++i)
            CHECK(log[i].t_send - log[i - 1].t_send == ms_to_ns(100.0));
    }
    SUBCASE("200 Hz interpolated emits one sample per 5 ms") {
        VirtualBridge bridge(quiet_config(1.0, 1.0));
        bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 2.0), Side::left, 200.0, true);
        bridge.run_for(2.0);
        const auto& log = bridge.uplink().log();
        REQUIRE(log.size() == 201);
        for (size_t i = 1; i < log.size(); ++i)
            CHECK(log[i].t_send - log[i - 1].t_send == ms_to_ns(5.0));
    }
    SUBCASE("empty trajectory rejected") {
        VirtualBridge bridge(quiet_config(1.0, 1.0));
        JointTrajectory empty;
        empty.dof = 7;
        CHECK_THROWS_AS(
            bridge.client().stream_arm_refs(empty, Side::left, 10.0, false),
            std::invalid_argument);
    }
    SUBCASE("non-positive rate rejected") {
        VirtualBridge bridge(quiet_config(1.0, 1.0));
        CHECK_THROWS_AS(bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 1.0),
                                                        Side::left, 0.0, false),
                        std::invalid_argument);
    }
}

TEST_CASE("emission count invariant across rates and durations") {
    Rng rng(3);
    for (int it = 0; it < 10; ++it) {
        const double rate = 5.0 * static_cast<double>(1 + bounded(rng, 60));
        const double T = 0.3 + 0.1 * static_cast<double>(bounded(rng, 30));
        VirtualBridge bridge(quiet_config(1.0, 1.0));
        bridge.client().stream_arm_refs(ramp_traj(7, T, 0.1, 1.0), Side::left, rate, false);
        bridge.run_for(T + 1.0);
        CHECK(bridge.uplink().log().size() ==
              static_cast<size_t>(std::floor(T * rate + 1e-9)) + 1);
    }
}

TEST_CASE("frames on one lane carry strictly increasing seq") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    bridge.client().stream_arm_refs(ramp_traj(7, 0.5, 0.1, 2.0), Side::left, 50.0, false);
    bridge.run_for(2.0);
    const auto& log = bridge.uplink().log();
    for (size_t i = 1; i < log.size(); ++i) CHECK(log[i].seq > log[i - 1].seq);
}

TEST_CASE("interpolated stream bounds consecutive position steps") {
    VirtualBridge bridge(quiet_config(1.0, 1.0));
    JointTrajectory traj = ramp_traj(7, 1.0, 0.1, 40.0);  // 40 deg/s slope
    bridge.client().stream_arm_refs(traj, Side::left, 200.0, true);
    bridge.run_for(2.0);

    // Reconstruct the emitted reference series from the controller log.
    const auto& log = bridge.controller().tick_log();
    double max_step = 0.0;
    bool active = false;
    double prev = 0.0;
    for (const auto& tl : log) {
        if (!tl.ref_active) continue;
        if (active) max_step = std::max(max_step, std::abs(tl.ref[0] - prev));
        prev = tl.ref[0];
        active = true;
    }
    CHECK(max_step <= 40.0 * 0.005 + 1e-9);

    // Raw mode at 10 Hz jumps by a full waypoint delta instead.
    VirtualBridge raw(quiet_config(1.0, 1.0));
    raw.client().stream_arm_refs(traj, Side::left, 10.0, false);
    raw.run_for(2.0);
    double max_raw = 0.0;
    active = false;
    for (const auto& tl : raw.controller().tick_log()) {
        if (!tl.ref_active) continue;
        if (active) max_raw = std::max(max_raw, std::abs(tl.ref[0] - prev));
        prev = tl.ref[0];
        active = true;
    }
    CHECK(max_raw > 3.9);
}

TEST_CASE("success window: constant RTT against the period") {
    SUBCASE("RTT 3 ms at 200 Hz succeeds everywhere") {
        VirtualBridge bridge(quiet_config(1.5, 1.5));
        auto h = bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 2.0),
                                                 Side::left, 200.0, true);
        bridge.run_for(2.0);
        CHECK(h->state == GoalState::succeeded);
        CHECK(h->issued == 201);
        CHECK(h->window_successes == 201);
        CHECK(h->success_rate() == 1.0);
    }
    SUBCASE("RTT 7 ms at 200 Hz fails everywhere") {
        VirtualBridge bridge(quiet_config(3.5, 3.5));
        auto h = bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 2.0),
                                                 Side::left, 200.0, true);
        bridge.run_for(2.0);
        CHECK(h->issued == 201);
        CHECK(h->window_successes == 0);
        CHECK(h->success_rate() == 0.0);
    }
    SUBCASE("RTT 7 ms at 100 Hz succeeds") {
        VirtualBridge bridge(quiet_config(3.5, 3.5));
        auto h = bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 2.0),
                                                 Side::left, 100.0, true);
        bridge.run_for(2.0);
        CHECK(h->success_rate() == 1.0);
    }
}

TEST_CASE("causality: no frame influences a tick before its handled tick") {
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        SimConfig cfg;
        cfg.seed = seed;
        cfg.uplink = {7.0, 0.3, 6.0};  // aggressive jitter
        cfg.downlink = {1.0, 0.0, 0.0};
        VirtualBridge bridge(cfg);
        bridge.client().stream_arm_refs(ramp_traj(7, 1.0, 0.1, 30.0), Side::left, 200.0, true);
        bridge.run_for(2.0);

        // Emitted positions increase with seq, so the reference at tick t can
        // be at most the largest sample already handled by t.
        const auto& lat = bridge.uplink().log();
        const auto& log = bridge.controller().tick_log();
        for (const auto& tl : log) {
            double allowed = 0.0;
            for (const auto& s : lat) {
                if (quantize_arrival(s.t_arrive, cfg.control_period()) <= tl.tick)
                    allowed = std::max(allowed, 30.0 * (static_cast<double>(s.seq - 1) * 0.005));
            }
            CHECK(tl.ref[0] <= allowed + 1e-9);
        }
    }
}
