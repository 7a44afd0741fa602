#include "bridgesim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "bridgesim/rng.hpp"

namespace bridgesim {

namespace {

// Floor frame in camera coordinates: origin at patch center, ex along
// camera x, ev into the scene along the tilted depth direction, n_up the
// camera-facing floor normal.
struct FloorFrame {
    Vec3 origin, ex, ev, up;

    Vec3 at(double u, double v) const { return origin + ex * u + ev * v; }
};

FloorFrame floor_frame(const FloorSpec& f) {
    // tilt_deg is the camera pitch toward the ground: in camera coordinates
    // the floor rises toward the horizon as depth grows.
    const double t = f.tilt_deg * M_PI / 180.0;
    FloorFrame fr;
    fr.origin = {0.0, f.depth, 0.5 * (f.z_min + f.z_max)};
    fr.ex = {1.0, 0.0, 0.0};
    fr.ev = {0.0, -std::sin(t), std::cos(t)};
    fr.up = fr.ex.cross(fr.ev);  // (0, -cos t, -sin t), toward the camera
    return fr;
}

double footprint_radius(const CategorySpec& c) { return 0.5 * std::hypot(c.w, c.d); }

struct Cuboid {
    // Bottom corners CCW in the floor frame, then matching top corners.
    std::array<Vec3, 8> corners;
    Vec3 center;
};

Cuboid make_cuboid(const FloorFrame& fr, const CategorySpec& spec, const ObjectPose& pose) {
    const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
    const Vec3 ax = fr.ex * c + fr.ev * s;
    const Vec3 ay = fr.ex * -s + fr.ev * c;
    const Vec3 base = fr.at(pose.u, pose.v);
    const std::array<std::pair<double, double>, 4> ring{
        std::pair{+spec.w / 2, +spec.d / 2},
        std::pair{-spec.w / 2, +spec.d / 2},
        std::pair{-spec.w / 2, -spec.d / 2},
        std::pair{+spec.w / 2, -spec.d / 2},
    };
    Cuboid box;
    for (int i = 0; i < 4; ++i) {
        const Vec3 bottom = base + ax * ring[i].first + ay * ring[i].second;
        box.corners[i] = bottom;
        box.corners[i + 4] = bottom + fr.up * spec.h;
    }
    box.center = base + fr.up * (spec.h / 2.0);
    return box;
}

// Uniform samples over the quad (o, o+a, o+a+b, o+b), kept only when the
// outward normal faces the camera at the sample point.
void sample_face(const Vec3& o, const Vec3& a, const Vec3& b, const Vec3& outward,
                 double density, Rng& rng, GaussianSampler& gauss, double sigma,
                 std::vector<Point3>& out) {
    const double area = a.cross(b).norm();
    const auto count = static_cast<size_t>(std::floor(area * density));
    for (size_t i = 0; i < count; ++i) {
        const Vec3 p = o + a * uniform01(rng) + b * uniform01(rng);
        if (outward.dot(p * -1.0) <= 0.0) continue;  // faces away from the camera
        out.push_back({p.x + sigma * gauss(rng), p.y + sigma * gauss(rng),
                       p.z + sigma * gauss(rng)});
    }
}

}  // namespace

void SceneSpec::validate(const Catalog& catalog) const {
    if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    if (outlier_fraction < 0.0 || outlier_fraction >= 1.0)
        throw std::invalid_argument("outlier fraction must be in [0, 1)");
    if (floor.z_max <= floor.z_min || floor.x_half <= 0.0)
        throw std::invalid_argument("bad floor extents");
    for (const auto& o : objects)
        if (!catalog.find(o.category))
            throw std::invalid_argument("unknown category: " + o.category);
    for (size_t i = 0; i < objects.size(); ++i)
        for (size_t j = i + 1; j < objects.size(); ++j) {
            const auto* a = catalog.find(objects[i].category);
            const auto* b = catalog.find(objects[j].category);
            const double dist = std::hypot(objects[i].u - objects[j].u,
                                           objects[i].v - objects[j].v);
            if (dist < footprint_radius(*a) + footprint_radius(*b))
                throw std::invalid_argument("overlapping objects in scene spec");
        }
}

Scene gen_scene(const SceneSpec& spec, const Catalog& catalog, uint64_t seed) {
    spec.validate(catalog);
    Rng rng(derive_seed(seed, 0x5ce2e));
    GaussianSampler gauss;
    const FloorFrame fr = floor_frame(spec.floor);

    Scene scene;
    auto& pts = scene.cloud.points;

    // Floor patch.
    const double width = 2.0 * spec.floor.x_half;
    const double depth_span = spec.floor.z_max - spec.floor.z_min;
    const auto floor_count = static_cast<size_t>(std::floor(width * depth_span * spec.density));
    for (size_t i = 0; i < floor_count; ++i) {
        const double u = uniform(rng, -spec.floor.x_half, spec.floor.x_half);
        const double v = uniform(rng, -depth_span / 2.0, depth_span / 2.0);
        const Vec3 p = fr.at(u, v);
        pts.push_back({p.x + spec.noise_sigma * gauss(rng), p.y + spec.noise_sigma * gauss(rng),
                       p.z + spec.noise_sigma * gauss(rng)});
    }

    // Objects: top face plus the camera-facing sides.
    for (const auto& pose : spec.objects) {
        const CategorySpec& cat = *catalog.find(pose.category);
        const Cuboid box = make_cuboid(fr, cat, pose);
        const auto& c = box.corners;
        const Vec3 up_h = fr.up * cat.h;
        // top face
        sample_face(c[4], c[5] - c[4], c[7] - c[4], fr.up, spec.density, rng, gauss,
                    spec.noise_sigma, pts);
        // four sides with outward normals
        for (int i = 0; i < 4; ++i) {
            const int j = (i + 1) % 4;
            const Vec3 edge = c[j] - c[i];
            const Vec3 outward = edge.cross(fr.up).normalized();
            sample_face(c[i], edge, up_h, outward, spec.density, rng, gauss,
                        spec.noise_sigma, pts);
        }

        GroundTruthBox truth;
        truth.category = pose.category;
        truth.yaw = pose.yaw;
        truth.center = {box.center.x, box.center.y, box.center.z};
        for (int i = 0; i < 8; ++i) truth.corners[i] = {c[i].x, c[i].y, c[i].z};
        scene.truth.push_back(truth);

        // RoI from the projected ground-truth corners, padded and clamped.
        double u_min = 1e9, u_max = -1e9, v_min = 1e9, v_max = -1e9;
        for (const auto& corner : box.corners) {
            const double u = spec.intrinsics.fx * corner.x / corner.z + spec.intrinsics.cx;
            const double v = spec.intrinsics.fy * corner.y / corner.z + spec.intrinsics.cy;
            u_min = std::min(u_min, u);
            u_max = std::max(u_max, u);
            v_min = std::min(v_min, v);
            v_max = std::max(v_max, v);
        }
        Roi2D roi;
        roi.category = pose.category;
        roi.u_min = std::max(0.0, u_min - spec.roi_pad_px);
        roi.v_min = std::max(0.0, v_min - spec.roi_pad_px);
        roi.u_max = std::min(static_cast<double>(spec.intrinsics.width - 1), u_max + spec.roi_pad_px);
        roi.v_max = std::min(static_cast<double>(spec.intrinsics.height - 1), v_max + spec.roi_pad_px);
        if (roi.u_min >= roi.u_max || roi.v_min >= roi.v_max)
            throw std::invalid_argument("object projects outside the image: " + pose.category);
        scene.rois.push_back(roi);
    }

    // Uniform outliers across the workspace box.
    const auto n_outliers =
        static_cast<size_t>(std::floor(spec.outlier_fraction * static_cast<double>(pts.size())));
    for (size_t i = 0; i < n_outliers; ++i) {
        pts.push_back({uniform(rng, -spec.floor.x_half, spec.floor.x_half),
                       uniform(rng, -0.05, spec.floor.depth + 0.1),
                       uniform(rng, std::max(0.05, spec.floor.z_min - 0.1), spec.floor.z_max)});
    }
    return scene;
}

Catalog default_catalog() {
    Catalog cat;
    cat.categories = {
        {"cracker_box", 0.162, 0.060, 0.213},
        {"soda_can", 0.066, 0.066, 0.122},
        {"juice_box", 0.105, 0.058, 0.177},
    };
    return cat;
}

std::string SceneSpec::to_json() const {
    nlohmann::json j;
    j["floor"] = {{"depth", floor.depth},
                  {"tilt_deg", floor.tilt_deg},
                  {"x_half", floor.x_half},
                  {"z_min", floor.z_min},
                  {"z_max", floor.z_max}};
    j["objects"] = nlohmann::json::array();
    for (const auto& o : objects)
        j["objects"].push_back({{"category", o.category}, {"u", o.u}, {"v", o.v}, {"yaw", o.yaw}});
    j["density"] = density;
    j["noise_sigma"] = noise_sigma;
    j["outlier_fraction"] = outlier_fraction;
    j["intrinsics"] = {{"fx", intrinsics.fx}, {"fy", intrinsics.fy}, {"cx", intrinsics.cx},
                       {"cy", intrinsics.cy}, {"width", intrinsics.width},
                       {"height", intrinsics.height}};
    j["roi_pad_px"] = roi_pad_px;
    return j.dump(2) + "\n";
}

SceneSpec SceneSpec::from_json(const std::string& text) {
    SceneSpec spec;
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("floor")) {
        const auto& f = j["floor"];
        if (f.contains("depth")) spec.floor.depth = f["depth"].get<double>();
        if (f.contains("tilt_deg")) spec.floor.tilt_deg = f["tilt_deg"].get<double>();
        if (f.contains("x_half")) spec.floor.x_half = f["x_half"].get<double>();
        if (f.contains("z_min")) spec.floor.z_min = f["z_min"].get<double>();
        if (f.contains("z_max")) spec.floor.z_max = f["z_max"].get<double>();
    }
    for (const auto& o : j.value("objects", nlohmann::json::array())) {
        ObjectPose pose;
        pose.category = o.at("category").get<std::string>();
        pose.u = o.value("u", 0.0);
        pose.v = o.value("v", 0.0);
        pose.yaw = o.value("yaw", 0.0);
        spec.objects.push_back(std::move(pose));
    }
    if (j.contains("density")) spec.density = j["density"].get<double>();
    if (j.contains("noise_sigma")) spec.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("outlier_fraction")) spec.outlier_fraction = j["outlier_fraction"].get<double>();
    if (j.contains("intrinsics")) {
        const auto& in = j["intrinsics"];
        if (in.contains("fx")) spec.intrinsics.fx = in["fx"].get<double>();
        if (in.contains("fy")) spec.intrinsics.fy = in["fy"].get<double>();
        if (in.contains("cx")) spec.intrinsics.cx = in["cx"].get<double>();
        if (in.contains("cy")) spec.intrinsics.cy = in["cy"].get<double>();
        if (in.contains("width")) spec.intrinsics.width = in["width"].get<int>();
        if (in.contains("height")) spec.intrinsics.height = in["height"].get<int>();
    }
    if (j.contains("roi_pad_px")) spec.roi_pad_px = j["roi_pad_px"].get<double>();
    return spec;
}

}  // namespace bridgesim
