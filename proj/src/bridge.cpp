#include "bridgesim/bridge.hpp"

namespace bridgesim {

VirtualBridge::VirtualBridge(const SimConfig& cfg) : cfg_(cfg) {
    uplink_ = std::make_unique<SimChannel>(clock_, cfg.uplink, derive_seed(cfg.seed, 1));
    downlink_ = std::make_unique<SimChannel>(clock_, cfg.downlink, derive_seed(cfg.seed, 2));

    ControllerParams cp;
    cp.dof = cfg.dof;
    cp.control_period = cfg.control_period();
    cp.motor_period = cfg.motor_period();
    cp.servo = cfg.servo;
    cp.base_max_speed = cfg.base_max_speed;
    cp.gripper_rate = cfg.gripper_rate;
    controller_ = std::make_unique<MotionController>(
        cp, [this](Payload p) { downlink_->send(std::move(p)); });
    client_ = std::make_unique<NrtClient>(clock_, *uplink_, cfg.control_period());

    uplink_->set_receiver([this](const Message& m, TimeNs t) { controller_->on_frame(m, t); });
    downlink_->set_receiver([this](const Message& m, TimeNs t) { client_->on_frame(m, t); });
}

void VirtualBridge::schedule_next_tick() {
    if (tick_pending_) return;
    const TimeNs period = cfg_.control_period();
    const TimeNs t = next_tick_ * period;
    if (t > horizon_) return;
    tick_pending_ = true;
    clock_.schedule(t, [this] {
        tick_pending_ = false;
        const int64_t tick = next_tick_++;
        // Boundary arrivals belong to this tick; deliver them ahead of the
        // control step regardless of event insertion order.
        uplink_->flush_due(clock_.now());
        controller_->run_tick(tick);
        schedule_next_tick();
    });
}

void VirtualBridge::run_for(double seconds) {
    horizon_ += s_to_ns(seconds);
    schedule_next_tick();
    clock_.run_until(horizon_);
}

}  // namespace bridgesim
