#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thread>

#include "bridgesim/net.hpp"
#include "bridgesim/protocol.hpp"
#include "bridgesim/wallbridge.hpp"

using namespace bridgesim;

TEST_CASE("frames round-trip over a loopback tcp socket") {
    TcpListener listener = TcpListener::bind_loopback();

    Message goal;
    goal.seq = 1;
    goal.t_send_ns = 123;
    JointTrajectory traj;
    traj.dof = 2;
    traj.points = {{0.0, {1.0, 2.0}, {}, {}}, {0.5, {3.0, 4.0}, {}, {}}};
    goal.payload = GoalArmTrajectory{Side::right, traj};

    Message sample;
    sample.seq = 2;
    sample.payload = ArmRefSample{Side::left, {9.0, -9.0}};

    std::thread server([&] {
        TcpStream s = listener.accept_one();
        FrameParser parser;
        std::vector<Message> got;
        std::vector<uint8_t> buf(64);
        while (got.size() < 2) {
            const size_t n = s.read_some(buf);
            REQUIRE(n > 0);
            auto out = parser.feed(std::span<const uint8_t>(buf.data(), n));
            got.insert(got.end(), out.begin(), out.end());
        }
        CHECK(got[0] == goal);
        CHECK(got[1] == sample);
        // Echo a result back.
        Message res;
        res.seq = 1;
        res.payload = Result{goal.seq, status_ok};
        s.write_all(encode(res));
    });

    TcpStream client = TcpStream::connect("127.0.0.1", listener.port());
    client.write_all(encode(goal));
    client.write_all(encode(sample));

    FrameParser parser;
    std::vector<uint8_t> buf(64);
    std::vector<Message> got;
    while (got.empty()) {
        const size_t n = client.read_some(buf);
        REQUIRE(n > 0);
        auto out = parser.feed(std::span<const uint8_t>(buf.data(), n));
        got.insert(got.end(), out.begin(), out.end());
    }
    REQUIRE(got.size() == 1);
    CHECK(std::get<Result>(got[0].payload).goal_seq == goal.seq);
    server.join();
}

TEST_CASE("wall-clock bridge runs a short trajectory over tcp") {
    SimConfig cfg;
    cfg.clock = "wall";
    JointTrajectory traj;
    traj.dof = cfg.dof;
    for (int i = 0; i <= 5; ++i)
        traj.points.push_back({0.1 * i, JointVector(cfg.dof, 2.0 * i), {}, {}});

    SUBCASE("streamed mode") {
        const WallRunReport report = run_wall_tracking(cfg, "200hz_interp", traj);
        CHECK(report.frames_sent == 101);  // floor(0.5 * 200) + 1
        CHECK(report.first_active_tick >= 0);
        CHECK(report.results_received > 0);
        CHECK(report.log.size() >= 200);
        // The controller tracked the ramp: final reference near the target.
        CHECK(report.log.back().ref[0] == doctest::Approx(10.0).epsilon(0.05));
    }
    SUBCASE("single request") {
        const WallRunReport report = run_wall_tracking(cfg, "single_request", traj);
        CHECK(report.frames_sent == 1);
        CHECK(report.first_active_tick >= 0);
        CHECK(report.results_received == 1);
        CHECK(report.log.back().ref[0] == doctest::Approx(10.0));
        CHECK(report.log.back().meas[0] == doctest::Approx(10.0).epsilon(0.01));
    }
}
