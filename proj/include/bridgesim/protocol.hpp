#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "bridgesim/trajmath.hpp"

namespace bridgesim {

// Frame layout, little-endian:
//   u32 length | u8 msg_type | u32 seq | u64 t_send_ns | payload
// where length covers everything after itself (type + seq + t_send + payload).
enum class MsgType : uint8_t {
    goal_base = 1,
    goal_gripper = 2,
    goal_arm_trajectory = 3,
    arm_ref_sample = 4,
    ack = 5,
    feedback = 6,
    result = 7,
};

enum class Side : uint8_t { left = 0, right = 1 };

enum Status : uint8_t {
    status_ok = 0,
    status_rejected = 1,
    status_preempted = 2,
};

struct GoalBase {
    double vx = 0.0;   // m/s
    double vy = 0.0;   // m/s
    double wz = 0.0;   // rad/s
    double duration = 0.0;  // s
    bool operator==(const GoalBase&) const = default;
};

struct GoalGripper {
    Side side = Side::left;
    double position = 0.0;  // 0..1
    bool operator==(const GoalGripper&) const = default;
};

// Only (t, q) pairs travel on the wire; v/a of the embedded trajectory are
// never transmitted.
struct GoalArmTrajectory {
    Side side = Side::left;
    JointTrajectory traj;
    bool operator==(const GoalArmTrajectory&) const = default;
};

struct ArmRefSample {
    Side side = Side::left;
    JointVector q;
    bool operator==(const ArmRefSample&) const = default;
};

struct Ack {
    uint32_t goal_seq = 0;
    uint8_t status = status_ok;
    bool operator==(const Ack&) const = default;
};

struct Feedback {
    uint32_t goal_seq = 0;
    double progress = 0.0;  // 0..1
    bool operator==(const Feedback&) const = default;
};

struct Result {
    uint32_t goal_seq = 0;
    uint8_t status = status_ok;
    bool operator==(const Result&) const = default;
};

using Payload = std::variant<GoalBase, GoalGripper, GoalArmTrajectory,
                             ArmRefSample, Ack, Feedback, Result>;

struct Message {
    uint32_t seq = 0;
    uint64_t t_send_ns = 0;
    Payload payload;

    MsgType type() const { return static_cast<MsgType>(payload.index() + 1); }
    bool operator==(const Message&) const = default;
};

enum class WireError {
    none,
    incomplete_frame,
    unknown_type,
    length_mismatch,
    count_mismatch,
    oversize,
    bad_value,
};
const char* to_string(WireError e);

constexpr size_t kFrameOverhead = 4 + 1 + 4 + 8;       // length prefix + header
constexpr size_t kMaxPayloadBytes = (1u << 24) - 1;

// Structural checks shared by encode and senders; nullopt means valid.
std::optional<WireError> validate(const Message& m);

// Throws std::invalid_argument when validate() rejects the message.
std::vector<uint8_t> encode(const Message& m);

struct DecodeResult {
    Message msg;
    WireError error = WireError::none;
    size_t consumed = 0;
    bool ok() const { return error == WireError::none; }
};

// Decodes one frame from the front of buf. incomplete_frame is returned when
// more bytes are needed; other errors indicate a malformed frame.
DecodeResult decode(std::span<const uint8_t> buf);

// Incremental parser tolerating arbitrary chunk boundaries; buffers at most
// one partial frame. Single-owner, not shared. Once a framing error occurs
// the stream cannot be resynchronized (no magic) and further input is dropped.
class FrameParser {
public:
    std::vector<Message> feed(std::span<const uint8_t> chunk);

    WireError error() const { return error_; }
    bool broken() const { return error_ != WireError::none; }

private:
    std::vector<uint8_t> buf_;
    WireError error_ = WireError::none;
};

}  // namespace bridgesim
