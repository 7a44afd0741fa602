#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bridgesim/protocol.hpp"
#include "bridgesim/rng.hpp"

using namespace bridgesim;

namespace {

Message random_message(Rng& rng) {
    Message m;
    m.seq = static_cast<uint32_t>(rng());
    m.t_send_ns = rng();
    switch (bounded(rng, 7)) {
        case 0:
            m.payload = GoalBase{uniform(rng, -1, 1), uniform(rng, -1, 1),
                                 uniform(rng, -2, 2), uniform(rng, 0, 10)};
            break;
        case 1:
            m.payload = GoalGripper{bounded(rng, 2) ? Side::right : Side::left,
                                    uniform01(rng)};
            break;
        case 2: {
            GoalArmTrajectory g;
            g.side = bounded(rng, 2) ? Side::right : Side::left;
            g.traj.dof = 1 + static_cast<int>(bounded(rng, 7));
            const size_t n = 1 + bounded(rng, 5);
            double t = uniform(rng, 0, 0.1);
            for (size_t i = 0; i < n; ++i) {
                TrajectoryPoint p;
                p.t = t;
                for (int j = 0; j < g.traj.dof; ++j) p.q.push_back(uniform(rng, -180, 180));
                g.traj.points.push_back(std::move(p));
                t += uniform(rng, 0.01, 1.0);
            }
            m.payload = std::move(g);
            break;
        }
        case 3: {
            ArmRefSample s;
            s.side = bounded(rng, 2) ? Side::right : Side::left;
            const size_t dof = 1 + bounded(rng, 7);
            for (size_t j = 0; j < dof; ++j) s.q.push_back(uniform(rng, -180, 180));
            m.payload = std::move(s);
            break;
        }
        case 4:
            m.payload = Ack{static_cast<uint32_t>(rng()), static_cast<uint8_t>(bounded(rng, 3))};
            break;
        case 5:
            m.payload = Feedback{static_cast<uint32_t>(rng()), uniform01(rng)};
            break;
        default:
            m.payload = Result{static_cast<uint32_t>(rng()), static_cast<uint8_t>(bounded(rng, 3))};
            break;
    }
    return m;
}

}  // namespace

TEST_CASE("hand-encoded ack frame layout") {
    Message m;
    m.seq = 9;
    m.t_send_ns = 0;
    m.payload = Ack{7, 0};
    const std::vector<uint8_t> want = {
        0x12, 0x00, 0x00, 0x00,                          // length = 18
        0x05,                                            // msg_type ack
        0x09, 0x00, 0x00, 0x00,                          // seq
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // t_send_ns
        0x07, 0x00, 0x00, 0x00,                          // goal_seq
        0x00,                                            // status
    };
    CHECK(encode(m) == want);
}

TEST_CASE("round-trip identity under fuzzing") {
    Rng rng(1234);
    for (int i = 0; i < 10000; ++i) {
        const Message m = random_message(rng);
        const auto bytes = encode(m);
        const auto r = decode(bytes);
        REQUIRE(r.ok());
        CHECK(r.consumed == bytes.size());
        CHECK(r.msg == m);
    }
}

TEST_CASE("encode is injective on distinct messages") {
    Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        const Message a = random_message(rng);
        const Message b = random_message(rng);
        if (a == b) continue;
        CHECK(encode(a) != encode(b));
    }
}

TEST_CASE("encode rejects invalid messages") {
    Message m;
    m.payload = GoalArmTrajectory{};  // zero waypoints
    CHECK_THROWS_AS(encode(m), std::invalid_argument);

    Message g;
    g.payload = GoalGripper{Side::left, 1.5};  // out of range
    CHECK_THROWS_AS(encode(g), std::invalid_argument);
}

TEST_CASE("decode error kinds are distinct") {
    Message m;
    m.seq = 1;
    m.payload = GoalBase{0.1, 0.2, 0.3, 1.0};
    auto bytes = encode(m);

    SUBCASE("truncated frame") {
        bytes.resize(bytes.size() - 3);
        CHECK(decode(bytes).error == WireError::incomplete_frame);
    }
    SUBCASE("empty and tiny buffers") {
        CHECK(decode(std::vector<uint8_t>{}).error == WireError::incomplete_frame);
        CHECK(decode(std::vector<uint8_t>{0x10}).error == WireError::incomplete_frame);
    }
    SUBCASE("unknown type tag") {
        bytes[4] = 99;
        CHECK(decode(bytes).error == WireError::unknown_type);
    }
    SUBCASE("length larger than the payload needs") {
        bytes[0] += 1;
        bytes.push_back(0);
        CHECK(decode(bytes).error == WireError::length_mismatch);
    }
    SUBCASE("oversize length prefix") {
        bytes[2] = 0xff;
        bytes[3] = 0x7f;
        CHECK(decode(bytes).error == WireError::oversize);
    }
    SUBCASE("waypoint count inconsistent with frame length") {
        Message t;
        t.seq = 2;
        GoalArmTrajectory g;
        g.traj.dof = 2;
        g.traj.points = {{0.0, {1.0, 2.0}, {}, {}}, {1.0, {3.0, 4.0}, {}, {}}};
        t.payload = g;
        auto tb = encode(t);
        tb[4 + 1 + 4 + 8 + 1 + 2] = 9;  // n field
        CHECK(decode(tb).error == WireError::count_mismatch);
    }
    SUBCASE("bad side byte") {
        Message t;
        t.seq = 3;
        t.payload = ArmRefSample{Side::left, {1.0}};
        auto tb = encode(t);
        tb[4 + 1 + 4 + 8] = 2;  // side field
        CHECK(decode(tb).error == WireError::bad_value);
    }
}

TEST_CASE("frame_stream reassembles across arbitrary chunking") {
    Rng rng(555);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Message> msgs;
        std::vector<uint8_t> stream;
        const size_t n = 1 + bounded(rng, 20);
        for (size_t i = 0; i < n; ++i) {
            msgs.push_back(random_message(rng));
            const auto b = encode(msgs.back());
            stream.insert(stream.end(), b.begin(), b.end());
        }

        FrameParser parser;
        std::vector<Message> got;
        size_t off = 0;
        while (off < stream.size()) {
            const size_t len = std::min<size_t>(1 + bounded(rng, 7), stream.size() - off);
            auto out = parser.feed(std::span<const uint8_t>(stream).subspan(off, len));
            got.insert(got.end(), out.begin(), out.end());
            off += len;
        }
        REQUIRE(got.size() == msgs.size());
        for (size_t i = 0; i < n; ++i) CHECK(got[i] == msgs[i]);
        CHECK_FALSE(parser.broken());
    }
}

TEST_CASE("frame_stream in one-byte chunks") {
    Message a;
    a.seq = 1;
    a.payload = Ack{1, 0};
    Message b;
    b.seq = 2;
    b.payload = Feedback{1, 0.5};
    auto bytes = encode(a);
    auto bb = encode(b);
    bytes.insert(bytes.end(), bb.begin(), bb.end());

    FrameParser parser;
    std::vector<Message> got;
    for (uint8_t byte : bytes) {
        auto out = parser.feed(std::span<const uint8_t>(&byte, 1));
        got.insert(got.end(), out.begin(), out.end());
    }
    REQUIRE(got.size() == 2);
    CHECK(got[0] == a);
    CHECK(got[1] == b);
}

TEST_CASE("frame_stream surfaces an error on a garbage prefix") {
    // A plausible small length whose body does not parse consistently.
    std::vector<uint8_t> garbage = {0x0e, 0x00, 0x00, 0x00,              // length 14
                                    0x05, 0x01, 0x00, 0x00, 0x00,        // ack, seq
                                    0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // t_send
                                    0x00, 0x00, 0x01};
    FrameParser parser;
    auto out = parser.feed(garbage);
    CHECK(out.empty());
    CHECK(parser.broken());
    CHECK(parser.error() == WireError::length_mismatch);

    // Once broken, further input is ignored.
    Message m;
    m.seq = 4;
    m.payload = Ack{4, 0};
    CHECK(parser.feed(encode(m)).empty());
}
