#pragma once

#include <memory>

#include "bridgesim/nrtclient.hpp"
#include "bridgesim/rtcontrol.hpp"
#include "bridgesim/simkit.hpp"

namespace bridgesim {

// Client and controller wired over jittered in-process channels, all driven
// by one deterministic virtual clock. The controller tick chain runs lazily
// up to whatever horizon run_for() has extended.
class VirtualBridge {
public:
    explicit VirtualBridge(const SimConfig& cfg);

    VirtualClock& clock() { return clock_; }
    NrtClient& client() { return *client_; }
    MotionController& controller() { return *controller_; }
    SimChannel& uplink() { return *uplink_; }
    SimChannel& downlink() { return *downlink_; }
    const SimConfig& config() const { return cfg_; }

    // Extends the tick horizon by the given span and runs the clock there.
    void run_for(double seconds);

private:
    void schedule_next_tick();

    SimConfig cfg_;
    VirtualClock clock_;
    std::unique_ptr<SimChannel> uplink_;
    std::unique_ptr<SimChannel> downlink_;
    std::unique_ptr<MotionController> controller_;
    std::unique_ptr<NrtClient> client_;
    int64_t next_tick_ = 0;
    TimeNs horizon_ = 0;
    bool tick_pending_ = false;
};

}  // namespace bridgesim
