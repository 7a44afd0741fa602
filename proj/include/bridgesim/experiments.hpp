#pragma once

#include <string>
#include <vector>

#include "bridgesim/metrics.hpp"
#include "bridgesim/simkit.hpp"
#include "bridgesim/trajmath.hpp"

namespace bridgesim {

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "transport", "success_rate", "latency_modes", "tracking", "perception", "end_to_end"};
    return names;
}

struct ExperimentSpec {
    std::string name;
    uint64_t seed = 1;
    SimConfig config;     // resolved defaults + overrides; config.seed == seed
    std::string out_dir;
};

struct ExperimentResult {
    std::vector<std::string> files;  // paths written, relative to out_dir
    std::string summary;             // contents of summary.md
};

// Runs one experiment and writes its reports under out_dir. Throws
// std::invalid_argument for unknown names and std::runtime_error for
// unwritable output paths.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// The fixed 4 s, 7-dof trajectory the tracking experiments share: one
// cosine stroke per joint, waypoints on the 10 Hz grid.
JointTrajectory tracking_test_trajectory(int dof = 7, double duration_s = 4.0);

// Tracking comparison for one request mode over a virtual bridge.
struct TrackingRun {
    TrackingReport report;
    std::vector<std::vector<double>> desired;   // per tick, per joint
    std::vector<std::vector<double>> measured;
    int64_t start_tick = -1;
};
TrackingRun run_tracking_mode(const SimConfig& cfg, const std::string& mode,
                              const JointTrajectory& traj);

}  // namespace bridgesim
