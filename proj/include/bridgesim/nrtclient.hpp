#pragma once

#include <deque>
#include <map>
#include <memory>

#include "bridgesim/protocol.hpp"
#include "bridgesim/simkit.hpp"
#include "bridgesim/trajmath.hpp"

namespace bridgesim {

enum class GoalState { pending, active, succeeded, failed, timed_out };
const char* to_string(GoalState s);

enum class Lane { base = 0, gripper = 1, arm = 2 };

struct GoalHandle {
    uint32_t goal_seq = 0;   // wire seq of the goal frame (0 until sent)
    GoalState state = GoalState::pending;
    uint8_t fail_status = status_ok;
    TimeNs t_submit = 0;

    // streaming accounting (action-window rule)
    bool is_stream = false;
    uint64_t issued = 0;
    uint64_t window_successes = 0;

    bool terminal() const {
        return state == GoalState::succeeded || state == GoalState::failed ||
               state == GoalState::timed_out;
    }
    double success_rate() const {
        return issued == 0 ? 0.0 : static_cast<double>(window_successes) / static_cast<double>(issued);
    }
};
using GoalHandlePtr = std::shared_ptr<GoalHandle>;

// The NRT ("vision PC") side: one lane per entity so base, gripper, and arm
// goals progress independently; goals on the same lane are serialized.
// Single-threaded, driven by the virtual clock.
class NrtClient {
public:
    NrtClient(VirtualClock& clock, SimChannel& uplink, TimeNs control_period);

    // Wired by the harness to the downlink channel.
    void on_frame(const Message& m, TimeNs t_arrive);

    GoalHandlePtr submit_base(const GoalBase& goal);
    GoalHandlePtr submit_gripper(const GoalGripper& goal);
    GoalHandlePtr send_single_trajectory(const JointTrajectory& traj, Side side);

    // Emits per-tick reference samples at rate_hz. With interpolate set the
    // trajectory is first linear-resampled onto the controller period grid;
    // otherwise the raw waypoints are held between emissions. A sample's
    // window succeeds when its Result arrives before the next issuance on
    // the lane (track_results=false models fire-and-forget topics).
    GoalHandlePtr stream_arm_refs(const JointTrajectory& traj, Side side, double rate_hz,
                                  bool interpolate, bool track_results = true);

    // Pumps the clock until the handle is terminal or timeout elapses; a
    // handle still pending at the deadline is marked timed_out.
    GoalState await_result(const GoalHandlePtr& h, double timeout_s);

    void close() { closed_ = true; }
    bool connected() const { return !closed_; }

private:
    struct LaneState {
        GoalHandlePtr active;
        std::deque<std::pair<GoalHandlePtr, Payload>> waiting;
    };

    GoalHandlePtr submit(Lane lane, Payload payload);
    void send_now(LaneState& lane, const GoalHandlePtr& h, Payload payload);
    void pump(LaneState& lane);
    void emit_stream_sample(const GoalHandlePtr& h, size_t index);
    void check_open() const;

    VirtualClock& clock_;
    SimChannel& uplink_;
    TimeNs control_period_;
    bool closed_ = false;

    LaneState lanes_[3];
    std::map<uint32_t, GoalHandlePtr> by_seq_;  // goal frames awaiting results

    struct StreamState {
        GoalHandlePtr handle;
        Side side;
        std::vector<TrajectoryPoint> samples;  // prepared emission source
        TimeNs t0 = 0;
        TimeNs period = 0;
        double rate_hz = 0.0;
        size_t total = 0;
        size_t emitted = 0;
        bool track_results = true;
        std::map<uint32_t, TimeNs> window_deadline;  // sample seq -> deadline
        uint64_t pending_windows = 0;
        bool emissions_done = false;
    };
    std::map<GoalHandle*, std::shared_ptr<StreamState>> streams_;
    std::map<uint32_t, std::shared_ptr<StreamState>> stream_by_seq_;

    void finalize_stream_if_done(const std::shared_ptr<StreamState>& st);
};

}  // namespace bridgesim
