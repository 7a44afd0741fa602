#pragma once

#include <string>
#include <vector>

#include "bridgesim/perception.hpp"

namespace bridgesim {

// Object pose in floor-plane coordinates: u along the floor's x axis,
// v along its depth axis, yaw about the floor normal.
struct ObjectPose {
    std::string category;
    double u = 0.0, v = 0.0;  // m
    double yaw = 0.0;         // rad
};

// Floor patch in the camera frame. tilt_deg models a camera pitched toward
// the ground by that angle, so the plane rises toward the horizon with
// depth; the patch spans x in [-x_half, x_half] and z in [z_min, z_max].
struct FloorSpec {
    double depth = 0.35;    // m below the camera at the patch center
    double tilt_deg = 20.0; // workspace camera pitch
    double x_half = 0.8;
    double z_min = 0.35;
    double z_max = 1.6;
};

struct SceneSpec {
    FloorSpec floor;
    std::vector<ObjectPose> objects;
    double density = 50000.0;        // surface points per m^2
    double noise_sigma = 0.002;      // m, isotropic
    double outlier_fraction = 0.05;  // extra uniform points, as a fraction
    CameraIntrinsics intrinsics;
    double roi_pad_px = 4.0;

    // Throws std::invalid_argument on non-positive density/sigma, unknown
    // categories, or overlapping object footprints.
    void validate(const Catalog& catalog) const;

    std::string to_json() const;
    static SceneSpec from_json(const std::string& text);
};

struct GroundTruthBox {
    std::string category;
    Point3 center;
    double yaw = 0.0;
    std::array<Point3, 8> corners;
};

struct Scene {
    PointCloud cloud;
    std::vector<Roi2D> rois;          // one per object, in spec order
    std::vector<GroundTruthBox> truth;
};

// Samples the floor patch and each cuboid's camera-visible faces, adds
// gaussian noise and uniform outliers, and derives RoIs from the projected
// ground-truth corners. Deterministic per (spec, seed).
Scene gen_scene(const SceneSpec& spec, const Catalog& catalog, uint64_t seed);

// Three convenience-store items used by the experiments.
Catalog default_catalog();

}  // namespace bridgesim
