#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bridgesim/geometry.hpp"

namespace bridgesim {

// Camera frame throughout: x right, y down, z forward, meters.
struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 vec() const { return {x, y, z}; }
    double norm() const { return vec().norm(); }
};

struct PointCloud {
    std::vector<Point3> points;

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct CameraIntrinsics {
    double fx = 600.0, fy = 600.0;   // px
    double cx = 320.0, cy = 240.0;   // px
    int width = 640, height = 480;
};

struct Roi2D {
    double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;  // px, inclusive
    std::string category;
};

// Plane n.x + d = 0 with |n| = 1; oriented so the camera origin lies on the
// non-negative side (d >= 0).
struct Plane {
    Vec3 n{0.0, 0.0, 1.0};
    double d = 0.0;

    double signed_distance(const Vec3& p) const { return n.dot(p) + d; }
};

struct CategorySpec {
    std::string name;
    double w = 0.0, d = 0.0, h = 0.0;  // footprint and height, meters
};

struct Catalog {
    std::vector<CategorySpec> categories;
    const CategorySpec* find(const std::string& name) const;
};

// In-plane pose; angle normalized to [0, pi/2) using rectangle symmetry.
struct OrientedRect {
    Vec2 center;
    double angle = 0.0;
    double w = 0.0;  // along angle
    double d = 0.0;  // perpendicular
};

struct Box3D {
    std::array<Point3, 8> corners;  // bottom CCW (viewed along +normal), then matching top
    Point3 center;
    std::string category;
};

// Keeps points with euclidean norm <= max_range (inclusive). Idempotent.
PointCloud range_filter(const PointCloud& cloud, double max_range = 1.5);

struct RansacResult {
    Plane plane;
    std::vector<size_t> inliers;
};

// Best plane over sampled point triples by inlier count at inlier_tol.
// Enumerates every triple when the iteration budget covers them all, so a
// sufficient budget matches exhaustive search exactly; otherwise samples
// triples from the seeded generator. Deterministic for a fixed seed.
// Throws on fewer than 3 points or fully collinear input.
RansacResult ransac_plane(const PointCloud& cloud, int iterations, double inlier_tol,
                          uint64_t seed);

// Keeps points whose pinhole projection (u = fx x/z + cx, v = fy y/z + cy)
// falls inside the RoI, edges inclusive; points with z <= 0 are dropped.
PointCloud crop_by_roi(const PointCloud& cloud, const Roi2D& roi,
                       const CameraIntrinsics& intr);

// Connected components linking points within tol; components smaller than
// min_size are dropped; output ordered by size descending.
std::vector<PointCloud> euclidean_cluster(const PointCloud& cloud, double tol,
                                          size_t min_size);

// Largest cluster; ties break toward the nearest centroid. Throws on empty.
const PointCloud& select_target_cluster(const std::vector<PointCloud>& clusters);

// Right-handed in-plane frame (e1, e2, n) derived deterministically from the
// normal; origin is the plane's foot point of the camera origin.
struct PlaneBasis {
    Vec3 origin, e1, e2, n;

    Vec2 to_plane(const Vec3& p) const;
    Vec3 from_plane(const Vec2& c) const;
};
PlaneBasis plane_basis(const Plane& plane);

std::vector<Vec2> project_to_plane(const PointCloud& cloud, const Plane& plane);

// Minimum-area enclosing rectangle of the convex hull gives center and
// angle; dims snap to the category footprint, longer fitted side onto
// max(w, d). Throws on collinear input.
OrientedRect fit_rectangle(const std::vector<Vec2>& points2d, const CategorySpec& category);

// Bottom corners on the plane, top corners offset by height along the
// camera-facing normal; center is the corner mean.
Box3D extrude_box(const OrientedRect& rect, const Plane& plane, double height,
                  const std::string& category);

// Least-squares plane through the given points (principal component of the
// scatter), keeping the orientation convention of `plane`.
Plane refine_plane(const PointCloud& cloud, const std::vector<size_t>& indices,
                   const Plane& plane);

struct DetectParams {
    double max_range = 1.5;          // m
    int ransac_iterations = 200;
    double ransac_tol = 0.005;       // m
    double floor_clearance = 0.012;  // m, floor band excluded from objects
    double cluster_tol = 0.02;       // m
    size_t cluster_min_size = 30;
    Vec3 down_axis{0.0, 1.0, 0.0};   // camera-frame "down"
    double floor_axis_tol_deg = 30.0;
    int max_plane_extractions = 3;
    uint64_t seed = 1;
};

struct Detection {
    size_t roi_index = 0;
    std::optional<Box3D> box;
    std::string failure;  // empty on success

    bool ok() const { return box.has_value(); }
};

struct DetectOutput {
    std::vector<Detection> detections;  // one per RoI, in RoI order
    Plane floor;
    bool floor_found = false;
};

// Full per-RoI pipeline: range filter, floor RANSAC once per cloud, RoI
// crop, clustering, plane projection, rectangle fit with known extents,
// extrusion. Per-RoI failures are recorded, never thrown.
DetectOutput detect_boxes(const PointCloud& cloud, const std::vector<Roi2D>& rois,
                          const CameraIntrinsics& intr, const Catalog& catalog,
                          const DetectParams& params = {});

// Cuboid sanity for tests and downstream checks: opposite faces congruent,
// edges orthogonal, center equal to the corner mean.
bool is_valid_cuboid(const Box3D& box, double tol = 1e-6);

}  // namespace bridgesim
