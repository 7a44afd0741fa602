#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "bridgesim/protocol.hpp"
#include "bridgesim/simkit.hpp"
#include "bridgesim/trajmath.hpp"

namespace bridgesim {

// Arrivals map to the first control tick at or after them; an arrival exactly
// on a boundary belongs to that boundary's tick.
int64_t quantize_arrival(TimeNs t_arrival, TimeNs control_period);

enum class Entity { base = 0, gripper = 1, arm = 2 };

// Latest-value handoff slot between the ingestion task and the control task.
// Stale (lower-seq) writes are ignored; a message becomes visible to the
// control task from its handled tick onward. In wall-clock mode this is the
// only state the two tasks share.
class Mailbox {
public:
    void put(Entity e, Message msg, int64_t handled_tick);
    std::optional<Message> take_if_due(Entity e, int64_t tick);

    uint64_t stale_drops() const { return stale_drops_; }

private:
    struct Slot {
        std::optional<Message> msg;
        uint32_t seq = 0;
        int64_t handled_tick = -1;
    };
    mutable std::mutex mu_;
    std::array<Slot, 3> slots_;
    std::atomic<uint64_t> stale_drops_ = 0;
};

// Second-order joint model theta'' = wn^2 (ref - theta) - 2 zeta wn theta',
// integrated semi-implicitly with substeps per motor period.
struct JointServo {
    std::vector<double> theta;      // deg
    std::vector<double> theta_dot;  // deg/s

    void reset(int dof) {
        theta.assign(dof, 0.0);
        theta_dot.assign(dof, 0.0);
    }
};

void motor_step(JointServo& servo, std::span<const double> reference, double dt,
                const ServoParams& params);

struct BaseState {
    double x = 0.0, y = 0.0, yaw = 0.0;
    double vx = 0.0, vy = 0.0, wz = 0.0;  // commanded body-frame velocity
};

// Integrates the commanded body velocity; linear speed is clamped to
// max_speed (3.5 km/h platform limit).
void base_step(BaseState& s, double dt, double max_speed);

// Slews position toward target at the given rate, clamped to [0, 1].
void gripper_step(double& position, double target, double rate, double dt);

struct RobotState {
    JointServo arm[2];  // left, right
    BaseState base;
    double gripper[2] = {0.0, 0.0};
};

struct ControllerParams {
    int dof = 7;
    TimeNs control_period = ms_to_ns(5.0);
    TimeNs motor_period = ms_to_ns(1.0);
    ServoParams servo;
    double base_max_speed = 0.972;
    double gripper_rate = 2.0;
    Side logged_side = Side::left;
};

struct TickLog {
    int64_t tick = 0;
    std::vector<double> ref;   // per-tick arm reference, deg
    std::vector<double> meas;  // measured joint angles after the motor substeps
    bool ref_active = false;
};

// The RT side: tick-quantized ingestion into the mailbox, the 200 Hz motion
// tick with spline resampling, the 1 kHz motor loop, and the base/gripper
// plants. Ingestion (on_frame/on_bytes) and run_tick may run on different
// tasks; the mailbox is the only shared state.
class MotionController {
public:
    using Sender = std::function<void(Payload)>;

    MotionController(const ControllerParams& p, Sender send);

    // Ingestion side. Decode problems are counted, never thrown.
    void on_bytes(std::span<const uint8_t> chunk, TimeNs t_arrival);
    void on_frame(const Message& m, TimeNs t_arrival);

    // Control side. Ticks are expected in increasing order.
    void run_tick(int64_t tick);

    const RobotState& robot() const { return robot_; }
    const std::vector<TickLog>& tick_log() const { return log_; }
    int64_t first_active_tick() const { return first_active_tick_; }
    uint64_t decode_errors() const { return decode_errors_; }
    uint64_t stale_drops() const { return mailbox_.stale_drops(); }
    uint64_t ref_samples_received() const { return ref_samples_received_; }

private:
    struct ArmMotion {
        std::vector<double> ref;          // current per-tick reference
        std::vector<double> prev_ref;     // previous tick, for 1 kHz upsampling
        std::optional<QuinticSpline> spline;
        int64_t spline_start_tick = 0;
        uint32_t goal_seq = 0;
        bool streaming = false;
        bool driven = false;
    };

    void ingest_goal(const Message& m, int64_t handled_tick);
    void arm_tick(ArmMotion& am, JointServo& servo, int64_t tick);
    void base_tick();
    void gripper_tick(int side);

    ControllerParams p_;
    Sender send_;
    Mailbox mailbox_;
    FrameParser parser_;
    RobotState robot_;
    ArmMotion arm_motion_[2];

    std::optional<Message> base_goal_;
    int64_t base_ticks_left_ = 0;
    int64_t base_ticks_total_ = 0;
    std::optional<Message> gripper_goal_[2];
    double gripper_target_[2] = {0.0, 0.0};
    double gripper_gap_[2] = {0.0, 0.0};

    std::vector<TickLog> log_;
    int64_t first_active_tick_ = -1;
    std::atomic<uint64_t> decode_errors_ = 0;
    std::atomic<uint64_t> ref_samples_received_ = 0;
};

}  // namespace bridgesim
