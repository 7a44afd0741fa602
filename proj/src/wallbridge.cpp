#include "bridgesim/wallbridge.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bridgesim/net.hpp"

namespace bridgesim {

namespace {

using SteadyClock = std::chrono::steady_clock;

TimeNs since(SteadyClock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(SteadyClock::now() - t0).count();
}

struct FrameSender {
    TcpStream* stream;
    std::mutex mu;
    uint32_t next_seq = 1;
    SteadyClock::time_point t0;

    uint32_t send(Payload payload) {
        Message m;
        std::lock_guard lock(mu);
        m.seq = next_seq++;
        m.t_send_ns = static_cast<uint64_t>(since(t0));
        m.payload = std::move(payload);
        const auto bytes = encode(m);
        stream->write_all(bytes);
        return m.seq;
    }
};

}  // namespace

WallRunReport run_wall_tracking(const SimConfig& cfg, const std::string& mode,
                                const JointTrajectory& traj) {
    traj.validate();
    const bool single = mode == "single_request";
    double rate_hz = 1e3 / cfg.control_period_ms;
    bool interpolate = true;
    if (mode == "10hz_raw") {
        rate_hz = 10.0;
        interpolate = false;
    } else if (!single && mode != "200hz_interp") {
        throw std::invalid_argument("unknown tracking mode: " + mode);
    }

    TcpListener listener = TcpListener::bind_loopback();
    const auto t0 = SteadyClock::now();

    ControllerParams cp;
    cp.dof = cfg.dof;
    cp.control_period = cfg.control_period();
    cp.motor_period = cfg.motor_period();
    cp.servo = cfg.servo;
    cp.base_max_speed = cfg.base_max_speed;
    cp.gripper_rate = cfg.gripper_rate;

    TcpStream server_stream;  // controller -> client frames
    FrameSender server_sender{&server_stream, {}, 1, t0};
    MotionController ctrl(cp, [&server_sender](Payload p) {
        if (server_sender.stream->valid()) server_sender.send(std::move(p));
    });

    std::atomic<bool> stop{false};

    // Ingestion task: socket bytes into the mailbox, stamped on arrival.
    std::thread ingest([&] {
        server_stream = listener.accept_one();
        std::vector<uint8_t> buf(4096);
        while (!stop.load(std::memory_order_relaxed)) {
            const size_t n = server_stream.read_some(buf);
            if (n == 0) break;
            ctrl.on_bytes(std::span<const uint8_t>(buf.data(), n), since(t0));
        }
    });

    // Control task: fixed 5 ms cadence, best effort on a desktop OS.
    const double run_s = traj.duration() + 1.0;
    const auto ticks = static_cast<int64_t>(run_s * 1e3 / cfg.control_period_ms);
    std::thread control([&] {
        const auto period = std::chrono::nanoseconds(cfg.control_period());
        auto next = SteadyClock::now();
        for (int64_t tick = 0; tick < ticks && !stop.load(std::memory_order_relaxed); ++tick) {
            ctrl.run_tick(tick);
            next += period;
            std::this_thread::sleep_until(next);
        }
        stop.store(true, std::memory_order_relaxed);
    });

    // Client side.
    WallRunReport report;
    TcpStream client = TcpStream::connect("127.0.0.1", listener.port());
    FrameSender client_sender{&client, {}, 1, t0};

    std::mutex windows_mu;
    std::map<uint32_t, TimeNs> window_deadline;
    std::thread reader([&] {
        FrameParser parser;
        std::vector<uint8_t> buf(4096);
        while (true) {
            const size_t n = client.read_some(buf);
            if (n == 0) break;
            for (const auto& m : parser.feed(std::span<const uint8_t>(buf.data(), n))) {
                if (const auto* res = std::get_if<Result>(&m.payload)) {
                    std::lock_guard lock(windows_mu);
                    ++report.results_received;
                    auto it = window_deadline.find(res->goal_seq);
                    if (it != window_deadline.end() && since(t0) < it->second &&
                        res->status == status_ok)
                        ++report.window_successes;
                }
            }
        }
    });

    if (single) {
        client_sender.send(GoalArmTrajectory{Side::left, traj});
        report.frames_sent = 1;
    } else {
        const auto samples = interpolate && traj.points.size() > 1
                                 ? linear_resample(traj, ns_to_s(cfg.control_period()))
                                 : traj.points;
        const auto period = std::chrono::nanoseconds(static_cast<TimeNs>(llround(1e9 / rate_hz)));
        const size_t total = static_cast<size_t>(traj.duration() * rate_hz + 1e-9) + 1;
        auto next = SteadyClock::now();
        const auto stream_t0 = next;
        for (size_t k = 0; k < total; ++k) {
            const double t_rel =
                std::chrono::duration<double>(next - stream_t0).count() + traj.points.front().t;
            size_t idx = 0;
            while (idx + 1 < samples.size() && samples[idx + 1].t <= t_rel + 1e-9) ++idx;
            const uint32_t seq = client_sender.send(ArmRefSample{Side::left, samples[idx].q});
            {
                std::lock_guard lock(windows_mu);
                window_deadline[seq] = since(t0) + period.count();
            }
            ++report.frames_sent;
            next += period;
            std::this_thread::sleep_until(next);
        }
    }

    control.join();
    stop.store(true);
    client.shutdown_write();  // ingest sees EOF and exits
    ingest.join();
    server_stream.close();    // reader sees EOF and exits
    reader.join();
    client.close();

    report.log = ctrl.tick_log();
    report.first_active_tick = ctrl.first_active_tick();
    return report;
}

}  // namespace bridgesim
