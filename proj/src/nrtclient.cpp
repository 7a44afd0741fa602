#include "bridgesim/nrtclient.hpp"

#include <cmath>
#include <stdexcept>

namespace bridgesim {

const char* to_string(GoalState s) {
    switch (s) {
        case GoalState::pending: return "pending";
        case GoalState::active: return "active";
        case GoalState::succeeded: return "succeeded";
        case GoalState::failed: return "failed";
        case GoalState::timed_out: return "timed_out";
    }
    return "?";
}

NrtClient::NrtClient(VirtualClock& clock, SimChannel& uplink, TimeNs control_period)
    : clock_(clock), uplink_(uplink), control_period_(control_period) {}

void NrtClient::check_open() const {
    if (closed_) throw std::runtime_error("link closed");
}

GoalHandlePtr NrtClient::submit(Lane lane, Payload payload) {
    check_open();
    auto h = std::make_shared<GoalHandle>();
    h->t_submit = clock_.now();
    LaneState& ls = lanes_[static_cast<size_t>(lane)];
    if (ls.active) {
        ls.waiting.emplace_back(h, std::move(payload));
    } else {
        send_now(ls, h, std::move(payload));
    }
    return h;
}

void NrtClient::send_now(LaneState& lane, const GoalHandlePtr& h, Payload payload) {
    h->goal_seq = uplink_.send(std::move(payload));
    by_seq_[h->goal_seq] = h;
    lane.active = h;
}

void NrtClient::pump(LaneState& lane) {
    lane.active.reset();
    if (lane.waiting.empty()) return;
    auto [h, payload] = std::move(lane.waiting.front());
    lane.waiting.pop_front();
    send_now(lane, h, std::move(payload));
}

GoalHandlePtr NrtClient::submit_base(const GoalBase& goal) {
    return submit(Lane::base, goal);
}

GoalHandlePtr NrtClient::submit_gripper(const GoalGripper& goal) {
    return submit(Lane::gripper, goal);
}

GoalHandlePtr NrtClient::send_single_trajectory(const JointTrajectory& traj, Side side) {
    traj.validate();
    return submit(Lane::arm, GoalArmTrajectory{side, traj});
}

GoalHandlePtr NrtClient::stream_arm_refs(const JointTrajectory& traj, Side side, double rate_hz,
                                         bool interpolate, bool track_results) {
    check_open();
    if (!(rate_hz > 0.0)) throw std::invalid_argument("stream rate must be positive");
    traj.validate();

    auto st = std::make_shared<StreamState>();
    st->handle = std::make_shared<GoalHandle>();
    st->handle->t_submit = clock_.now();
    st->handle->is_stream = true;
    st->side = side;
    st->track_results = track_results;
    st->samples = interpolate && traj.points.size() > 1
                      ? linear_resample(traj, ns_to_s(control_period_))
                      : traj.points;
    st->t0 = clock_.now();
    st->period = static_cast<TimeNs>(llround(1e9 / rate_hz));
    st->rate_hz = rate_hz;
    st->total = static_cast<size_t>(std::floor(traj.duration() * rate_hz + 1e-9)) + 1;

    LaneState& lane = lanes_[static_cast<size_t>(Lane::arm)];
    if (lane.active) throw std::runtime_error("arm lane busy");
    lane.active = st->handle;
    st->handle->state = GoalState::active;
    streams_[st->handle.get()] = st;

    for (size_t k = 0; k < st->total; ++k) {
        // Emission instants rounded per index so cadence error never
        // accumulates for rates that do not divide 1e9 ns.
        const TimeNs offset = static_cast<TimeNs>(llround(1e9 * static_cast<double>(k) / rate_hz));
        clock_.schedule(st->t0 + offset, [this, st, k, offset] {
            const double t_rel = ns_to_s(offset);
            const double t = st->samples.front().t + t_rel;
            // Most recent prepared sample at or before the emission time.
            size_t idx = 0;
            while (idx + 1 < st->samples.size() && st->samples[idx + 1].t <= t + 1e-12) ++idx;

            const uint32_t seq = uplink_.send(ArmRefSample{st->side, st->samples[idx].q});
            st->handle->issued++;
            st->emitted++;
            if (st->track_results) {
                // Window closes at the next issuance instant (one period
                // after the final sample).
                const TimeNs deadline =
                    st->t0 + static_cast<TimeNs>(llround(1e9 * static_cast<double>(k + 1) /
                                                         st->rate_hz));
                st->window_deadline[seq] = deadline;
                st->pending_windows++;
                stream_by_seq_[seq] = st;
                clock_.schedule(deadline, [this, st, seq] {
                    auto it = st->window_deadline.find(seq);
                    if (it == st->window_deadline.end()) return;
                    st->window_deadline.erase(it);
                    stream_by_seq_.erase(seq);
                    st->pending_windows--;
                    finalize_stream_if_done(st);
                });
            }
            if (st->emitted == st->total) {
                st->emissions_done = true;
                finalize_stream_if_done(st);
            }
        });
    }
    return st->handle;
}

void NrtClient::finalize_stream_if_done(const std::shared_ptr<StreamState>& st) {
    if (!st->emissions_done || st->pending_windows > 0) return;
    if (st->handle->terminal()) return;
    st->handle->state = GoalState::succeeded;
    LaneState& lane = lanes_[static_cast<size_t>(Lane::arm)];
    if (lane.active == st->handle) pump(lane);
    streams_.erase(st->handle.get());
}

void NrtClient::on_frame(const Message& m, TimeNs t_arrive) {
    if (const auto* ack = std::get_if<Ack>(&m.payload)) {
        auto it = by_seq_.find(ack->goal_seq);
        if (it != by_seq_.end() && it->second->state == GoalState::pending)
            it->second->state = GoalState::active;
        return;
    }
    if (std::get_if<Feedback>(&m.payload)) return;
    if (const auto* res = std::get_if<Result>(&m.payload)) {
        // Streamed-sample result: counts iff it beat the next issuance.
        auto sit = stream_by_seq_.find(res->goal_seq);
        if (sit != stream_by_seq_.end()) {
            auto st = sit->second;
            auto wit = st->window_deadline.find(res->goal_seq);
            if (wit != st->window_deadline.end()) {
                if (res->status == status_ok && t_arrive < wit->second)
                    st->handle->window_successes++;
                st->window_deadline.erase(wit);
                st->pending_windows--;
            }
            stream_by_seq_.erase(sit);
            finalize_stream_if_done(st);
            return;
        }
        auto it = by_seq_.find(res->goal_seq);
        if (it == by_seq_.end()) return;
        GoalHandlePtr h = it->second;
        by_seq_.erase(it);
        if (!h->terminal()) {
            if (res->status == status_ok) {
                h->state = GoalState::succeeded;
            } else {
                h->state = GoalState::failed;
                h->fail_status = res->status;
            }
        }
        for (auto& lane : lanes_)
            if (lane.active == h) pump(lane);
    }
}

GoalState NrtClient::await_result(const GoalHandlePtr& h, double timeout_s) {
    const TimeNs deadline = clock_.now() + s_to_ns(timeout_s);
    while (!h->terminal() && clock_.step(deadline)) {
    }
    if (!h->terminal()) {
        clock_.run_until(deadline);
        if (!h->terminal()) h->state = GoalState::timed_out;
    }
    return h->state;
}

}  // namespace bridgesim
