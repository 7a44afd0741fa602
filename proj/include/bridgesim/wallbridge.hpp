#pragma once

#include <string>

#include "bridgesim/rtcontrol.hpp"
#include "bridgesim/simkit.hpp"
#include "bridgesim/trajmath.hpp"

namespace bridgesim {

// One wall-clock demonstration run over a loopback TCP link. The controller
// runs an ingestion thread and a 200 Hz control thread that share only the
// mailbox; the client streams or sends the trajectory on its own cadence.
// Wall mode makes no deadline guarantee and its timings are not reproducible.
struct WallRunReport {
    std::vector<TickLog> log;
    int64_t first_active_tick = -1;
    uint64_t frames_sent = 0;
    uint64_t results_received = 0;
    uint64_t window_successes = 0;
};

// mode: "10hz_raw" | "200hz_interp" | "single_request".
WallRunReport run_wall_tracking(const SimConfig& cfg, const std::string& mode,
                                const JointTrajectory& traj);

}  // namespace bridgesim
