#include "bridgesim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "bridgesim/bridge.hpp"
#include "bridgesim/io.hpp"
#include "bridgesim/perception.hpp"
#include "bridgesim/scene.hpp"
#include "bridgesim/wallbridge.hpp"

namespace bridgesim {

namespace {

namespace fs = std::filesystem;

struct Reporter {
    fs::path dir;
    ExperimentResult result;

    void write(const std::string& name, const std::string& content) {
        write_text_file((dir / name).string(), content);
        result.files.push_back(name);
    }
};

std::string config_echo(const ExperimentSpec& spec) {
    std::string out;
    out += "experiment: " + spec.name + "\n";
    out += "seed: " + std::to_string(spec.seed) + "\n\n";
    out += "```json\n" + spec.config.to_json() + "```\n";
    return out;
}

JointTrajectory constant_traj(int dof, double duration_s) {
    JointTrajectory traj;
    traj.dof = dof;
    traj.points.push_back({0.0, JointVector(dof, 0.0), {}, {}});
    traj.points.push_back({duration_s, JointVector(dof, 0.0), {}, {}});
    return traj;
}

// Streams refs at rate_hz over a fresh bridge; returns the finished handle.
struct StreamOutcome {
    GoalHandlePtr handle;
    uint64_t delivered = 0;
    std::vector<LatencySample> uplink_log;
};

StreamOutcome run_stream(const SimConfig& cfg, const JointTrajectory& traj, double rate_hz,
                         bool interpolate, bool track_results) {
    VirtualBridge bridge(cfg);
    StreamOutcome out;
    out.handle =
        bridge.client().stream_arm_refs(traj, Side::left, rate_hz, interpolate, track_results);
    bridge.run_for(traj.duration() + 1.0);
    out.delivered = bridge.controller().ref_samples_received();
    out.uplink_log = bridge.uplink().log();
    return out;
}

void run_transport(const ExperimentSpec& spec, Reporter& rep) {
    // 10000 reference frames at the 200 Hz request cadence.
    const double rate = 1e3 / spec.config.control_period_ms;
    const double duration = 9999.0 / rate;
    const auto out = run_stream(spec.config, constant_traj(spec.config.dof, duration), rate,
                                true, false);

    std::vector<double> transit_ms, rel_ms;
    std::string csv = "seq,transit_ms\n";
    for (const auto& s : out.uplink_log) {
        const double t = s.end_to_end_ms();
        transit_ms.push_back(t);
        rel_ms.push_back(t - spec.config.uplink.base_ms);
        csv += std::to_string(s.seq) + "," + dtos(t) + "\n";
    }
    rep.write("transit_ms.csv", csv);

    const Histogram h = histogram(transit_ms, 1.0);
    std::string hcsv = "bin_lo_ms,count\n";
    for (size_t i = 0; i < h.counts.size(); ++i)
        hcsv += dtos(h.bin_lo(i)) + "," + std::to_string(h.counts[i]) + "\n";
    rep.write("histogram.csv", hcsv);

    const double tail_fraction = fraction_at_least(rel_ms, 5.0);
    std::string md = "# transport\n\n" + config_echo(spec);
    md += "\nframes: " + std::to_string(transit_ms.size()) + "\n";
    md += "min transit: " + dtos(h.min) + " ms, max transit: " + dtos(h.max) + " ms\n";
    md += "fraction at least 5 ms over base transit: " + dtos(tail_fraction) + "\n";
    rep.write("summary.md", md);
    rep.result.summary = md;
}

void run_latency_modes(const ExperimentSpec& spec, Reporter& rep) {
    const double rate = 1e3 / spec.config.control_period_ms;
    const TimeNs period = spec.config.control_period();

    std::string csv = "seed,seq,send_ms,transit_ms,handled_ms\n";
    std::string modes_csv = "seed,mode_count,mode_lo_ms,mode_hi_ms,gap_ms\n";
    std::string md = "# latency_modes\n\n" + config_echo(spec) + "\n";
    md += "| seed | modes | gap_ms |\n|---|---|---|\n";

    for (uint64_t i = 0; i < 10; ++i) {
        SimConfig cfg = spec.config;
        cfg.seed = spec.seed + i;
        const auto out = run_stream(cfg, constant_traj(cfg.dof, 4.0), rate, true, false);

        std::vector<double> handled_ms;
        for (const auto& s : out.uplink_log) {
            const int64_t tick = quantize_arrival(s.t_arrive, period);
            const double handled = ns_to_ms(tick * period - s.t_send);
            handled_ms.push_back(handled);
            csv += std::to_string(cfg.seed) + "," + std::to_string(s.seq) + "," +
                   dtos(ns_to_ms(s.t_send)) + "," + dtos(s.end_to_end_ms()) + "," +
                   dtos(handled) + "\n";
        }
        const auto modes = value_counts(handled_ms);
        const double lo = modes.front().first;
        const double hi = modes.back().first;
        modes_csv += std::to_string(cfg.seed) + "," + std::to_string(modes.size()) + "," +
                     dtos(lo) + "," + dtos(hi) + "," + dtos(hi - lo) + "\n";
        md += "| " + std::to_string(cfg.seed) + " | " + std::to_string(modes.size()) + " | " +
              dtos(hi - lo) + " |\n";
    }
    rep.write("handled_ms.csv", csv);
    rep.write("modes.csv", modes_csv);
    rep.write("summary.md", md);
    rep.result.summary = md;
}

void run_success_rate(const ExperimentSpec& spec, Reporter& rep) {
    const std::vector<double> freqs = {10.0, 50.0, 100.0, 200.0, 250.0, 400.0};
    const double duration = 2.0;

    std::string csv = "series,rate_hz,issued,succeeded,rate,oracle\n";
    std::string md = "# success_rate\n\n" + config_echo(spec) + "\n";
    md += "| series | rate_hz | rate | oracle |\n|---|---|---|---|\n";

    auto emit = [&](const std::string& series, double f, uint64_t issued, uint64_t ok,
                    const std::string& oracle) {
        const double rate = issued ? static_cast<double>(ok) / static_cast<double>(issued) : 0.0;
        csv += series + "," + dtos(f) + "," + std::to_string(issued) + "," +
               std::to_string(ok) + "," + dtos(rate) + "," + oracle + "\n";
        md += "| " + series + " | " + dtos(f) + " | " + dtos(rate) + " | " + oracle + " |\n";
    };

    // Jittered sweep with a short transit so the collapse lands around the
    // 200 Hz control rate: action-window accounting vs fire-and-forget.
    SimConfig jcfg = spec.config;
    jcfg.uplink = {1.5, 0.1, 5.0};
    jcfg.downlink = {1.5, 0.0, 0.0};
    for (double f : freqs) {
        const auto traj = constant_traj(jcfg.dof, duration);
        const auto action = run_stream(jcfg, traj, f, true, true);
        emit("action_jitter", f, action.handle->issued, action.handle->window_successes, "-");
        const auto topic = run_stream(jcfg, traj, f, true, false);
        emit("topic_jitter", f, topic.handle->issued, topic.delivered, "-");
    }

    // Deterministic oracle cross-check on constant round trips.
    for (double rtt_ms : {7.0, 3.0}) {
        SimConfig dcfg = spec.config;
        dcfg.uplink = {rtt_ms / 2.0, 0.0, 0.0};
        dcfg.downlink = {rtt_ms / 2.0, 0.0, 0.0};
        for (double f : freqs) {
            const auto out =
                run_stream(dcfg, constant_traj(dcfg.dof, duration), f, true, true);
            // Window rule against a constant round trip: success iff the
            // result beats the next issuance.
            const bool want = 1e3 / f > rtt_ms;
            emit("action_rtt" + dtos(rtt_ms), f, out.handle->issued,
                 out.handle->window_successes, want ? "1" : "0");
        }
    }
    rep.write("success_rate.csv", csv);
    rep.write("summary.md", md);
    rep.result.summary = md;
}

std::string tracking_csv(const TrackingRun& run, int64_t start_tick) {
    std::string csv = "tick";
    const size_t dof = run.desired.front().size();
    for (size_t j = 0; j < dof; ++j) csv += ",ref_j" + std::to_string(j);
    for (size_t j = 0; j < dof; ++j) csv += ",meas_j" + std::to_string(j);
    csv += "\n";
    for (size_t i = 0; i < run.desired.size(); ++i) {
        csv += std::to_string(start_tick + static_cast<int64_t>(i));
        for (double v : run.desired[i]) csv += "," + dtos(v);
        for (double v : run.measured[i]) csv += "," + dtos(v);
        csv += "\n";
    }
    return csv;
}

void run_tracking(const ExperimentSpec& spec, Reporter& rep) {
    const JointTrajectory traj = tracking_test_trajectory(spec.config.dof);
    const std::vector<std::string> modes = {"10hz_raw", "200hz_interp", "single_request"};

    std::string report_csv = "mode";
    for (int j = 0; j < spec.config.dof; ++j) report_csv += ",std_j" + std::to_string(j);
    report_csv += ",worst_std,worst_max_abs\n";

    std::string md = "# tracking\n\n" + config_echo(spec) + "\n";
    md += "| mode | worst std (deg) | worst max abs (deg) |\n|---|---|---|\n";

    std::vector<TrackingReport> reports;
    for (const auto& mode : modes) {
        const TrackingRun run = run_tracking_mode(spec.config, mode, traj);
        reports.push_back(run.report);
        rep.write("tracking_" + mode + ".csv", tracking_csv(run, run.start_tick));
        report_csv += mode;
        for (double s : run.report.std_dev) report_csv += "," + dtos(s);
        report_csv += "," + dtos(run.report.worst_std()) + "," + dtos(run.report.worst_max_abs());
        report_csv += "\n";
        md += "| " + mode + " | " + dtos(run.report.worst_std()) + " | " +
              dtos(run.report.worst_max_abs()) + " |\n";
    }
    const double ratio_interp = reports[0].worst_std() / reports[1].worst_std();
    const double ratio_single = reports[0].worst_std() / reports[2].worst_std();
    md += "\nstd(10hz_raw) / std(200hz_interp): " + dtos(ratio_interp) + "\n";
    md += "std(10hz_raw) / std(single_request): " + dtos(ratio_single) + "\n";
    rep.write("report.csv", report_csv);
    rep.write("summary.md", md);
    rep.result.summary = md;
}

double center_error(const Detection& det, const GroundTruthBox& truth) {
    return (det.box->center.vec() - truth.center.vec()).norm();
}

void run_perception(const ExperimentSpec& spec, Reporter& rep) {
    const Catalog catalog = default_catalog();
    Rng rng(derive_seed(spec.seed, 0xbea));

    std::string csv = "category,pose,u,v,yaw,detected,center_err_m\n";
    size_t fits = 0, within = 0, detected = 0;
    double max_err = 0.0, sum_err = 0.0;

    for (const auto& cat : catalog.categories) {
        for (int pose = 0; pose < 10; ++pose) {
            SceneSpec scene_spec;
            scene_spec.noise_sigma = 0.002;
            scene_spec.outlier_fraction = 0.05;
            Scene scene;
            double u = 0, v = 0, yaw = 0;
            for (int attempt = 0;; ++attempt) {
                u = uniform(rng, -0.25, 0.25);
                v = uniform(rng, -0.10, 0.30);
                yaw = uniform(rng, 0.0, M_PI);
                scene_spec.objects = {{cat.name, u, v, yaw}};
                try {
                    scene = gen_scene(scene_spec, catalog, derive_seed(spec.seed, fits * 100 +
                                                                       static_cast<uint64_t>(attempt)));
                    break;
                } catch (const std::invalid_argument&) {
                    if (attempt > 50) throw;  // pose keeps projecting off-image
                }
            }

            DetectParams params;
            params.seed = derive_seed(spec.seed, 7000 + fits);
            // Clustering tolerance matched to the synthetic surface density;
            // the library default (2 cm) suits sparser real clouds.
            params.cluster_tol = 0.01;
            const auto out =
                detect_boxes(scene.cloud, scene.rois, scene_spec.intrinsics, catalog, params);
            const auto& det = out.detections.at(0);
            double err = std::nan("");
            if (det.ok()) {
                err = center_error(det, scene.truth[0]);
                ++detected;
                sum_err += err;
                max_err = std::max(max_err, err);
                if (err <= 0.01) ++within;
            }
            ++fits;
            csv += cat.name + "," + std::to_string(pose) + "," + dtos(u) + "," + dtos(v) +
                   "," + dtos(yaw) + "," + (det.ok() ? "1" : "0") + "," +
                   (det.ok() ? dtos(err) : "nan") + "\n";
        }
    }
    rep.write("fits.csv", csv);

    std::string md = "# perception\n\n" + config_echo(spec) + "\n";
    md += "fits: " + std::to_string(fits) + "\n";
    md += "detected: " + std::to_string(detected) + "\n";
    md += "within 1 cm: " + std::to_string(within) + " (" +
          dtos(static_cast<double>(within) / static_cast<double>(fits)) + ")\n";
    if (detected > 0) {
        md += "mean center error: " + dtos(sum_err / static_cast<double>(detected)) + " m\n";
        md += "max center error: " + dtos(max_err) + " m\n";
    }
    rep.write("summary.md", md);
    rep.result.summary = md;
}

JointVector pose_for_box(const Box3D& box, int dof) {
    // Fixed joint-space target per detected box; an arbitrary but
    // deterministic map in lieu of kinematics.
    const double x = box.center.x, y = box.center.y, z = box.center.z;
    JointVector q = {60.0 * x,          40.0 * (y - 0.2), 30.0 * (z - 1.0), -50.0 * x,
                     25.0 * (z - 1.0), -30.0 * (y - 0.2), 40.0 * x};
    q.resize(static_cast<size_t>(dof), 0.0);
    for (double& v : q) v = std::clamp(v, -50.0, 50.0);
    return q;
}

void run_end_to_end(const ExperimentSpec& spec, Reporter& rep) {
    const Catalog catalog = default_catalog();
    SceneSpec scene_spec;
    scene_spec.objects = {{"cracker_box", -0.18, 0.05, 0.4}, {"soda_can", 0.18, 0.10, 0.0}};
    const Scene scene = gen_scene(scene_spec, catalog, derive_seed(spec.seed, 0xe2e));

    DetectParams params;
    params.seed = derive_seed(spec.seed, 0xde7);
    const auto out = detect_boxes(scene.cloud, scene.rois, scene_spec.intrinsics, catalog, params);

    std::string det_csv = "roi,category,detected,center_err_m\n";
    std::string md = "# end_to_end\n\n" + config_echo(spec) + "\n";
    md += "| box | center err (m) | worst tracking std (deg) |\n|---|---|---|\n";

    size_t box_index = 0;
    for (const auto& det : out.detections) {
        const double err = det.ok() ? center_error(det, scene.truth[det.roi_index]) : std::nan("");
        det_csv += std::to_string(det.roi_index) + "," + scene.rois[det.roi_index].category +
                   "," + (det.ok() ? "1" : "0") + "," + (det.ok() ? dtos(err) : "nan") + "\n";
        if (!det.ok()) continue;

        // Straight-line joint trajectory from home toward the per-box pose.
        const JointVector target = pose_for_box(*det.box, spec.config.dof);
        JointTrajectory traj;
        traj.dof = spec.config.dof;
        for (int k = 0; k <= 20; ++k) {
            const double s = static_cast<double>(k) / 20.0;
            JointVector q(target.size());
            for (size_t j = 0; j < target.size(); ++j) q[j] = target[j] * s;
            traj.points.push_back({0.1 * static_cast<double>(k), std::move(q), {}, {}});
        }

        const TrackingRun run = run_tracking_mode(spec.config, "single_request", traj);
        rep.write("tracking_box" + std::to_string(box_index) + ".csv",
                  tracking_csv(run, run.start_tick));
        md += "| " + std::to_string(box_index) + " (" + det.box->category + ") | " + dtos(err) +
              " | " + dtos(run.report.worst_std()) + " |\n";
        ++box_index;
    }
    rep.write("detections.csv", det_csv);
    rep.write("summary.md", md);
    rep.result.summary = md;
}

}  // namespace

JointTrajectory tracking_test_trajectory(int dof, double duration_s) {
    const std::vector<double> amplitudes = {30.0, 25.0, 20.0, 35.0, 15.0, 28.0, 22.0};
    JointTrajectory traj;
    traj.dof = dof;
    const int n = static_cast<int>(std::lround(duration_s * 10.0));
    for (int i = 0; i <= n; ++i) {
        const double t = 0.1 * static_cast<double>(i);
        TrajectoryPoint p;
        p.t = t;
        for (int j = 0; j < dof; ++j) {
            const double a = amplitudes[static_cast<size_t>(j) % amplitudes.size()];
            p.q.push_back(a * 0.5 * (1.0 - std::cos(2.0 * M_PI * t / duration_s)));
        }
        traj.points.push_back(std::move(p));
    }
    return traj;
}

namespace {

// Desired series aligned at the tick where the controller first applied a
// reference from this request, against the measured joints from the log.
TrackingRun slice_tracking_run(const std::vector<TickLog>& log, int64_t start,
                               const SimConfig& cfg, const JointTrajectory& traj,
                               const std::string& mode) {
    if (start < 0) throw std::runtime_error("motion never started");
    const auto spline = build_spline(assign_waypoint_derivatives(traj));
    const auto ticks = static_cast<int64_t>(std::lround(traj.duration() * 1e3 /
                                                        cfg.control_period_ms));
    TrackingRun run;
    run.start_tick = start;
    for (int64_t k = 0; k <= ticks; ++k) {
        const auto& tl = log.at(static_cast<size_t>(start + k));
        const double t = std::min(spline.start() + ns_to_s(k * cfg.control_period()),
                                  spline.end());
        run.desired.push_back(spline.eval(t).q);
        run.measured.push_back(tl.meas);
    }
    run.report = tracking_std(run.desired, run.measured, mode);
    return run;
}

}  // namespace

TrackingRun run_tracking_mode(const SimConfig& cfg, const std::string& mode,
                              const JointTrajectory& traj) {
    if (cfg.clock == "wall") {
        const WallRunReport report = run_wall_tracking(cfg, mode, traj);
        return slice_tracking_run(report.log, report.first_active_tick, cfg, traj, mode);
    }
    VirtualBridge bridge(cfg);
    if (mode == "10hz_raw") {
        bridge.client().stream_arm_refs(traj, Side::left, 10.0, false);
    } else if (mode == "200hz_interp") {
        bridge.client().stream_arm_refs(traj, Side::left,
                                        1e3 / cfg.control_period_ms, true);
    } else if (mode == "single_request") {
        bridge.client().send_single_trajectory(traj, Side::left);
    } else {
        throw std::invalid_argument("unknown tracking mode: " + mode);
    }
    bridge.run_for(traj.duration() + 1.0);
    return slice_tracking_run(bridge.controller().tick_log(),
                              bridge.controller().first_active_tick(), cfg, traj, mode);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), spec.name) == names.end())
        throw std::invalid_argument("unknown experiment: " + spec.name);
    // Wall clock is a demonstration mode for the tracking run; measurement
    // experiments need the deterministic virtual clock.
    if (spec.config.clock != "virtual" && spec.name != "tracking")
        throw std::invalid_argument("experiment '" + spec.name + "' requires the virtual clock");

    Reporter rep;
    rep.dir = spec.out_dir;
    std::error_code ec;
    fs::create_directories(rep.dir, ec);
    if (ec) throw std::runtime_error("cannot create output dir: " + spec.out_dir);

    rep.write("config.json", spec.config.to_json());

    if (spec.name == "transport") run_transport(spec, rep);
    else if (spec.name == "success_rate") run_success_rate(spec, rep);
    else if (spec.name == "latency_modes") run_latency_modes(spec, rep);
    else if (spec.name == "tracking") run_tracking(spec, rep);
    else if (spec.name == "perception") run_perception(spec, rep);
    else run_end_to_end(spec, rep);

    return rep.result;
}

}  // namespace bridgesim
