#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "bridgesim/protocol.hpp"
#include "bridgesim/rng.hpp"

namespace bridgesim {

using TimeNs = int64_t;

inline TimeNs ms_to_ns(double ms) { return static_cast<TimeNs>(llround(ms * 1e6)); }
inline double ns_to_ms(TimeNs t) { return static_cast<double>(t) / 1e6; }
inline TimeNs s_to_ns(double s) { return static_cast<TimeNs>(llround(s * 1e9)); }
inline double ns_to_s(TimeNs t) { return static_cast<double>(t) / 1e9; }

// Deterministic discrete-event clock. Events dispatch in (time, insertion)
// order; time never decreases. Strictly single-owner.
class VirtualClock {
public:
    TimeNs now() const { return now_; }

    void schedule(TimeNs t, std::function<void()> fn);
    void schedule_after(TimeNs dt, std::function<void()> fn) { schedule(now_ + dt, std::move(fn)); }

    // Dispatches every event with t <= t_end, then advances now to t_end.
    size_t run_until(TimeNs t_end);

    // Dispatches the single earliest event if its time is <= t_max.
    bool step(TimeNs t_max);

    size_t run_all(size_t max_events = 100'000'000);

    bool empty() const { return queue_.empty(); }
    TimeNs next_time() const;

private:
    struct Event {
        TimeNs t;
        uint64_t order;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.t != b.t ? a.t > b.t : a.order > b.order;
        }
    };

    void dispatch();

    TimeNs now_ = 0;
    uint64_t next_order_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

// Two-point transit-time mixture: base_ms with probability 1 - tail_prob,
// base_ms + tail_extra_ms otherwise.
struct JitterModel {
    double base_ms = 22.0;
    double tail_prob = 0.1;
    double tail_extra_ms = 5.0;
};

double sample_latency_ms(const JitterModel& m, Rng& rng);

struct LatencySample {
    uint32_t seq = 0;
    TimeNs t_send = 0;
    TimeNs t_arrive = 0;
    int64_t handled_tick = -1;  // filled in by the receiver when quantized
    double end_to_end_ms() const { return ns_to_ms(t_arrive - t_send); }
};

// One direction of an in-process stream link. Frames are encoded on send,
// delayed by the jitter model, and delivered in order (a later frame never
// overtakes an earlier one, like a byte stream would behave).
class SimChannel {
public:
    SimChannel(VirtualClock& clock, const JitterModel& jitter, uint64_t seed);

    using Receiver = std::function<void(const Message&, TimeNs t_arrive)>;
    void set_receiver(Receiver r) { receiver_ = std::move(r); }

    // Assigns the next wire seq, stamps t_send = now, encodes and enqueues.
    uint32_t send(Payload payload);

    // Delivers any queued arrivals with t_arrive <= t; the receiving side
    // calls this at a tick boundary so boundary arrivals count toward that
    // tick before its control step runs.
    void flush_due(TimeNs t);

    const std::vector<LatencySample>& log() const { return log_; }
    std::vector<LatencySample>& log() { return log_; }
    uint64_t delivered() const { return delivered_; }
    uint32_t next_seq() const { return next_seq_; }

private:
    struct Pending {
        TimeNs t_arrive;
        std::vector<uint8_t> bytes;
        uint32_t seq;
        TimeNs t_send;
    };

    void deliver_front();

    VirtualClock& clock_;
    JitterModel jitter_;
    Rng rng_;
    Receiver receiver_;
    std::deque<Pending> pending_;
    FrameParser parser_;
    std::vector<LatencySample> log_;
    uint32_t next_seq_ = 1;
    TimeNs last_arrive_ = 0;
    uint64_t delivered_ = 0;
};

struct ServoParams {
    double omega_n = 450.0;  // rad/s
    double zeta = 1.0;
    int substeps = 10;       // integrator substeps per motor period
};

struct SimConfig {
    std::string clock = "virtual";  // "virtual" | "wall"
    uint64_t seed = 1;
    double control_period_ms = 5.0;  // 200 Hz motion tick
    double motor_period_ms = 1.0;    // 1 kHz motor loop
    int dof = 7;
    JitterModel uplink{22.0, 0.1, 5.0};
    JitterModel downlink{1.0, 0.0, 0.0};
    ServoParams servo;
    double base_max_speed = 0.972;  // m/s (3.5 km/h)
    double gripper_rate = 2.0;      // full strokes per second

    TimeNs control_period() const { return ms_to_ns(control_period_ms); }
    TimeNs motor_period() const { return ms_to_ns(motor_period_ms); }

    std::string to_json() const;                    // stable key order
    static SimConfig from_json(const std::string&); // partial objects allowed
};

}  // namespace bridgesim
