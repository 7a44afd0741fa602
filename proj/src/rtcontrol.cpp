#include "bridgesim/rtcontrol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bridgesim {

int64_t quantize_arrival(TimeNs t_arrival, TimeNs control_period) {
    if (control_period <= 0) throw std::invalid_argument("control period must be positive");
    if (t_arrival < 0) throw std::invalid_argument("arrival before time origin");
    return (t_arrival + control_period - 1) / control_period;
}

void Mailbox::put(Entity e, Message msg, int64_t handled_tick) {
    std::lock_guard lock(mu_);
    Slot& slot = slots_[static_cast<size_t>(e)];
    if (slot.msg && msg.seq < slot.seq) {
        ++stale_drops_;
        return;
    }
    slot.seq = msg.seq;
    slot.handled_tick = handled_tick;
    slot.msg = std::move(msg);
}

std::optional<Message> Mailbox::take_if_due(Entity e, int64_t tick) {
    std::lock_guard lock(mu_);
    Slot& slot = slots_[static_cast<size_t>(e)];
    if (!slot.msg || slot.handled_tick > tick) return std::nullopt;
    std::optional<Message> out = std::move(slot.msg);
    slot.msg.reset();
    return out;
}

void motor_step(JointServo& servo, std::span<const double> reference, double dt,
                const ServoParams& params) {
    const size_t dof = servo.theta.size();
    if (reference.size() != dof) throw std::invalid_argument("reference dof mismatch");
    const int sub = std::max(1, params.substeps);
    const double h = dt / sub;
    const double wn = params.omega_n;
    const double two_zw = 2.0 * params.zeta * wn;
    for (size_t j = 0; j < dof; ++j) {
        double th = servo.theta[j];
        double td = servo.theta_dot[j];
        for (int k = 0; k < sub; ++k) {
            const double acc = wn * wn * (reference[j] - th) - two_zw * td;
            td += acc * h;
            th += td * h;
        }
        servo.theta[j] = th;
        servo.theta_dot[j] = td;
    }
}

void base_step(BaseState& s, double dt, double max_speed) {
    double vx = s.vx, vy = s.vy;
    const double speed = std::hypot(vx, vy);
    if (speed > max_speed) {
        const double scale = max_speed / speed;
        vx *= scale;
        vy *= scale;
    }
    const double c = std::cos(s.yaw), sn = std::sin(s.yaw);
    s.x += (vx * c - vy * sn) * dt;
    s.y += (vx * sn + vy * c) * dt;
    s.yaw += s.wz * dt;
}

void gripper_step(double& position, double target, double rate, double dt) {
    target = std::clamp(target, 0.0, 1.0);
    const double step = rate * dt;
    if (position < target)
        position = std::min(position + step, target);
    else if (position > target)
        position = std::max(position - step, target);
}

MotionController::MotionController(const ControllerParams& p, Sender send)
    : p_(p), send_(std::move(send)) {
    robot_.arm[0].reset(p_.dof);
    robot_.arm[1].reset(p_.dof);
    for (auto& am : arm_motion_) {
        am.ref.assign(p_.dof, 0.0);
        am.prev_ref.assign(p_.dof, 0.0);
    }
}

void MotionController::on_bytes(std::span<const uint8_t> chunk, TimeNs t_arrival) {
    auto msgs = parser_.feed(chunk);
    if (parser_.broken()) ++decode_errors_;
    for (auto& m : msgs) on_frame(m, t_arrival);
}

void MotionController::on_frame(const Message& m, TimeNs t_arrival) {
    const int64_t handled = quantize_arrival(t_arrival, p_.control_period);
    switch (m.type()) {
        case MsgType::goal_base:
            mailbox_.put(Entity::base, m, handled);
            send_(Ack{m.seq, status_ok});
            break;
        case MsgType::goal_gripper:
            mailbox_.put(Entity::gripper, m, handled);
            send_(Ack{m.seq, status_ok});
            break;
        case MsgType::goal_arm_trajectory:
            mailbox_.put(Entity::arm, m, handled);
            send_(Ack{m.seq, status_ok});
            break;
        case MsgType::arm_ref_sample:
            // Streamed references are acknowledged on receipt; the reference
            // itself is applied from the handled tick onward.
            ++ref_samples_received_;
            mailbox_.put(Entity::arm, m, handled);
            send_(Result{m.seq, status_ok});
            break;
        default:
            ++decode_errors_;  // client-bound frame on the uplink
            break;
    }
}

void MotionController::ingest_goal(const Message& m, int64_t tick) {
    if (const auto* g = std::get_if<GoalArmTrajectory>(&m.payload)) {
        const int side = static_cast<int>(g->side);
        ArmMotion& am = arm_motion_[side];
        try {
            if (g->traj.dof != p_.dof) throw std::invalid_argument("dof mismatch");
            QuinticSpline spline = build_spline(assign_waypoint_derivatives(g->traj));
            if (am.spline) send_(Result{am.goal_seq, status_preempted});
            am.spline = std::move(spline);
            am.spline_start_tick = tick + 1;
            am.goal_seq = m.seq;
            am.streaming = false;
        } catch (const std::exception&) {
            ++decode_errors_;
            send_(Result{m.seq, status_rejected});
        }
    } else if (const auto* s = std::get_if<ArmRefSample>(&m.payload)) {
        const int side = static_cast<int>(s->side);
        ArmMotion& am = arm_motion_[side];
        if (static_cast<int>(s->q.size()) != p_.dof) {
            ++decode_errors_;
            return;
        }
        if (am.spline) {  // latest arm message wins, like the mailbox slot
            send_(Result{am.goal_seq, status_preempted});
            am.spline.reset();
        }
        am.ref = s->q;
        am.streaming = true;
        am.driven = true;
    }
}

void MotionController::arm_tick(ArmMotion& am, JointServo& servo, int64_t tick) {
    if (am.spline && tick >= am.spline_start_tick) {
        const double tau = ns_to_s((tick - am.spline_start_tick) * p_.control_period);
        const double dur = am.spline->duration();
        const double t = am.spline->start() + std::min(tau, dur);
        const TrajectoryPoint pt = am.spline->eval(t);
        am.ref = pt.q;
        am.driven = true;
        if (tau >= dur) {
            send_(Result{am.goal_seq, status_ok});
            am.spline.reset();
        } else {
            send_(Feedback{am.goal_seq, tau / dur});
        }
    }
    // 200 Hz reference linearly upsampled onto the 1 kHz grid.
    const int sub_ticks = static_cast<int>(p_.control_period / p_.motor_period);
    const double dt = ns_to_s(p_.motor_period);
    std::vector<double> r(p_.dof);
    for (int i = 1; i <= sub_ticks; ++i) {
        const double u = static_cast<double>(i) / sub_ticks;
        for (int j = 0; j < p_.dof; ++j)
            r[j] = am.prev_ref[j] + u * (am.ref[j] - am.prev_ref[j]);
        motor_step(servo, r, dt, p_.servo);
    }
    am.prev_ref = am.ref;
}

void MotionController::base_tick() {
    const double dt = ns_to_s(p_.control_period);
    if (base_goal_) {
        base_step(robot_.base, dt, p_.base_max_speed);
        --base_ticks_left_;
        if (base_ticks_left_ <= 0) {
            send_(Result{base_goal_->seq, status_ok});
            robot_.base.vx = robot_.base.vy = robot_.base.wz = 0.0;
            base_goal_.reset();
        } else {
            const double progress =
                1.0 - static_cast<double>(base_ticks_left_) / static_cast<double>(base_ticks_total_);
            send_(Feedback{base_goal_->seq, progress});
        }
    }
}

void MotionController::gripper_tick(int side) {
    const double dt = ns_to_s(p_.control_period);
    if (!gripper_goal_[side]) return;
    gripper_step(robot_.gripper[side], gripper_target_[side], p_.gripper_rate, dt);
    const double gap = std::abs(robot_.gripper[side] - gripper_target_[side]);
    if (gap <= 0.0) {
        send_(Result{gripper_goal_[side]->seq, status_ok});
        gripper_goal_[side].reset();
    } else if (gripper_gap_[side] > 0.0) {
        send_(Feedback{gripper_goal_[side]->seq, 1.0 - gap / gripper_gap_[side]});
    }
}

void MotionController::run_tick(int64_t tick) {
    if (auto m = mailbox_.take_if_due(Entity::base, tick)) {
        const auto& g = std::get<GoalBase>(m->payload);
        robot_.base.vx = g.vx;
        robot_.base.vy = g.vy;
        robot_.base.wz = g.wz;
        base_ticks_total_ = std::max<int64_t>(
            1, static_cast<int64_t>(std::ceil(g.duration * 1e9 / p_.control_period - 1e-9)));
        base_ticks_left_ = base_ticks_total_;
        base_goal_ = std::move(m);
    }
    if (auto m = mailbox_.take_if_due(Entity::gripper, tick)) {
        const auto& g = std::get<GoalGripper>(m->payload);
        const int side = static_cast<int>(g.side);
        gripper_target_[side] = g.position;
        gripper_gap_[side] = std::abs(robot_.gripper[side] - g.position);
        if (gripper_gap_[side] <= 0.0) {
            send_(Result{m->seq, status_ok});
        } else {
            gripper_goal_[side] = std::move(m);
        }
    }
    if (auto m = mailbox_.take_if_due(Entity::arm, tick)) ingest_goal(*m, tick);

    base_tick();
    gripper_tick(0);
    gripper_tick(1);
    arm_tick(arm_motion_[0], robot_.arm[0], tick);
    arm_tick(arm_motion_[1], robot_.arm[1], tick);

    const int side = static_cast<int>(p_.logged_side);
    const ArmMotion& am = arm_motion_[side];
    if (am.driven && first_active_tick_ < 0) first_active_tick_ = tick;
    log_.push_back(TickLog{tick, am.ref, robot_.arm[side].theta, am.driven});
}

}  // namespace bridgesim
