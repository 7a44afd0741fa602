#include "bridgesim/perception.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

#include "bridgesim/rng.hpp"

namespace bridgesim {

const CategorySpec* Catalog::find(const std::string& name) const {
    for (const auto& c : categories)
        if (c.name == name) return &c;
    return nullptr;
}

PointCloud range_filter(const PointCloud& cloud, double max_range) {
    if (!(max_range > 0.0)) throw std::invalid_argument("max_range must be positive");
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points)
        if (p.norm() <= max_range) out.points.push_back(p);
    return out;
}

namespace {

std::optional<Plane> plane_from_triple(const Point3& a, const Point3& b, const Point3& c) {
    const Vec3 n = (b.vec() - a.vec()).cross(c.vec() - a.vec());
    const double len = n.norm();
    // Degenerate triples span no area worth fitting.
    if (len < 1e-12) return std::nullopt;
    Plane pl;
    pl.n = {n.x / len, n.y / len, n.z / len};
    pl.d = -pl.n.dot(a.vec());
    return pl;
}

void orient_toward_origin(Plane& pl) {
    if (pl.d < 0.0) {
        pl.n = pl.n * -1.0;
        pl.d = -pl.d;
    } else if (pl.d == 0.0) {
        // Plane through the origin: fix the sign lexicographically.
        const double lead = pl.n.z != 0.0 ? pl.n.z : (pl.n.y != 0.0 ? pl.n.y : pl.n.x);
        if (lead < 0.0) pl.n = pl.n * -1.0;
    }
}

size_t count_inliers(const PointCloud& cloud, const Plane& pl, double tol) {
    size_t n = 0;
    for (const auto& p : cloud.points) n += std::abs(pl.signed_distance(p.vec())) <= tol;
    return n;
}

}  // namespace

RansacResult ransac_plane(const PointCloud& cloud, int iterations, double inlier_tol,
                          uint64_t seed) {
    const size_t n = cloud.size();
    if (n < 3) throw std::invalid_argument("need at least 3 points");
    if (iterations <= 0 || !(inlier_tol > 0.0))
        throw std::invalid_argument("iterations and tolerance must be positive");

    std::optional<Plane> best;
    size_t best_count = 0;

    auto consider = [&](size_t i, size_t j, size_t k) {
        auto pl = plane_from_triple(cloud.points[i], cloud.points[j], cloud.points[k]);
        if (!pl) return;
        const size_t count = count_inliers(cloud, *pl, inlier_tol);
        if (count > best_count) {
            best_count = count;
            best = *pl;
        }
    };

    // With a budget covering every triple, enumeration is both cheaper and
    // exact; random sampling could not promise full coverage.
    const uint64_t triples = n * (n - 1) * (n - 2) / 6;
    if (triples <= static_cast<uint64_t>(iterations)) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                for (size_t k = j + 1; k < n; ++k) consider(i, j, k);
    } else {
        Rng rng(seed);
        for (int it = 0; it < iterations; ++it) {
            const size_t i = bounded(rng, n);
            size_t j = bounded(rng, n);
            while (j == i) j = bounded(rng, n);
            size_t k = bounded(rng, n);
            while (k == i || k == j) k = bounded(rng, n);
            consider(i, j, k);
        }
    }
    if (!best) throw std::runtime_error("all sampled triples collinear");

    orient_toward_origin(*best);
    RansacResult out;
    out.plane = *best;
    for (size_t i = 0; i < n; ++i)
        if (std::abs(best->signed_distance(cloud.points[i].vec())) <= inlier_tol)
            out.inliers.push_back(i);
    return out;
}

PointCloud crop_by_roi(const PointCloud& cloud, const Roi2D& roi,
                       const CameraIntrinsics& intr) {
    PointCloud out;
    for (const auto& p : cloud.points) {
        if (p.z <= 0.0) continue;
        const double u = intr.fx * p.x / p.z + intr.cx;
        const double v = intr.fy * p.y / p.z + intr.cy;
        if (u >= roi.u_min && u <= roi.u_max && v >= roi.v_min && v <= roi.v_max)
            out.points.push_back(p);
    }
    return out;
}

std::vector<PointCloud> euclidean_cluster(const PointCloud& cloud, double tol,
                                          size_t min_size) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (min_size < 1) throw std::invalid_argument("min_size must be at least 1");

    // Hash grid with cell size tol: neighbors within tol sit in the 27
    // surrounding cells.
    const double inv = 1.0 / tol;
    auto cell_of = [&](const Point3& p) {
        return std::array<int64_t, 3>{static_cast<int64_t>(std::floor(p.x * inv)),
                                      static_cast<int64_t>(std::floor(p.y * inv)),
                                      static_cast<int64_t>(std::floor(p.z * inv))};
    };
    std::map<std::array<int64_t, 3>, std::vector<size_t>> grid;
    for (size_t i = 0; i < cloud.size(); ++i) grid[cell_of(cloud.points[i])].push_back(i);

    const double tol2 = tol * tol;
    std::vector<int> label(cloud.size(), -1);
    std::vector<std::vector<size_t>> components;

    for (size_t seed_idx = 0; seed_idx < cloud.size(); ++seed_idx) {
        if (label[seed_idx] >= 0) continue;
        const int comp = static_cast<int>(components.size());
        components.emplace_back();
        std::deque<size_t> frontier{seed_idx};
        label[seed_idx] = comp;
        while (!frontier.empty()) {
            const size_t i = frontier.front();
            frontier.pop_front();
            components[comp].push_back(i);
            const auto c = cell_of(cloud.points[i]);
            for (int dx = -1; dx <= 1; ++dx)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dz = -1; dz <= 1; ++dz) {
                        auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
                        if (it == grid.end()) continue;
                        for (size_t j : it->second) {
                            if (label[j] >= 0) continue;
                            const Vec3 diff = cloud.points[i].vec() - cloud.points[j].vec();
                            if (diff.dot(diff) <= tol2) {
                                label[j] = comp;
                                frontier.push_back(j);
                            }
                        }
                    }
        }
    }

    std::vector<size_t> order(components.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return components[a].size() > components[b].size();
    });

    std::vector<PointCloud> out;
    for (size_t idx : order) {
        if (components[idx].size() < min_size) continue;
        PointCloud c;
        c.points.reserve(components[idx].size());
        for (size_t i : components[idx]) c.points.push_back(cloud.points[i]);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

Vec3 centroid(const PointCloud& cloud) {
    Vec3 c;
    for (const auto& p : cloud.points) c = c + p.vec();
    return c * (1.0 / static_cast<double>(cloud.size()));
}

}  // namespace

const PointCloud& select_target_cluster(const std::vector<PointCloud>& clusters) {
    if (clusters.empty()) throw std::invalid_argument("no clusters");
    const PointCloud* best = &clusters.front();
    for (const auto& c : clusters) {
        if (c.size() > best->size()) {
            best = &c;
        } else if (c.size() == best->size() &&
                   centroid(c).norm() < centroid(*best).norm()) {
            best = &c;
        }
    }
    return *best;
}

PlaneBasis plane_basis(const Plane& plane) {
    PlaneBasis b;
    b.n = plane.n;
    b.origin = plane.n * -plane.d;  // foot point of the camera origin
    // Seed axis: the one least aligned with the normal, ties toward x.
    const double ax = std::abs(plane.n.x), ay = std::abs(plane.n.y), az = std::abs(plane.n.z);
    Vec3 seed{1.0, 0.0, 0.0};
    if (ay < ax || az < ax) seed = ay <= az ? Vec3{0.0, 1.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    b.e1 = plane.n.cross(seed).normalized();
    b.e2 = plane.n.cross(b.e1);  // e1 x e2 = n, right-handed
    return b;
}

Vec2 PlaneBasis::to_plane(const Vec3& p) const {
    const Vec3 rel = p - origin;
    return {rel.dot(e1), rel.dot(e2)};
}

Vec3 PlaneBasis::from_plane(const Vec2& c) const {
    return origin + e1 * c.x + e2 * c.y;
}

std::vector<Vec2> project_to_plane(const PointCloud& cloud, const Plane& plane) {
    const PlaneBasis basis = plane_basis(plane);
    std::vector<Vec2> out;
    out.reserve(cloud.size());
    for (const auto& p : cloud.points) out.push_back(basis.to_plane(p.vec()));
    return out;
}

OrientedRect fit_rectangle(const std::vector<Vec2>& points2d, const CategorySpec& category) {
    if (points2d.size() < 3) throw std::invalid_argument("need at least 3 points");
    const auto hull = convex_hull(points2d);
    if (hull.size() < 3) throw std::invalid_argument("collinear points");
    const MinAreaRect fit = min_area_rect(hull);

    OrientedRect rect;
    rect.center = fit.center;
    rect.angle = fit.angle;
    // Known-extents snapping: center and angle stay, dims come from the
    // catalog with the longer fitted side mapped onto max(w, d).
    const double big = std::max(category.w, category.d);
    const double small = std::min(category.w, category.d);
    if (fit.extent1 >= fit.extent2) {
        rect.w = big;
        rect.d = small;
    } else {
        rect.w = small;
        rect.d = big;
    }
    return rect;
}

Box3D extrude_box(const OrientedRect& rect, const Plane& plane, double height,
                  const std::string& category) {
    if (!(height > 0.0)) throw std::invalid_argument("height must be positive");
    const PlaneBasis basis = plane_basis(plane);
    const double c = std::cos(rect.angle), s = std::sin(rect.angle);
    const Vec2 ax{c, s}, ay{-s, c};
    // CCW in the (e1, e2) frame, which is CCW viewed along +normal.
    const std::array<Vec2, 4> local{
        Vec2{+rect.w / 2, +rect.d / 2},
        Vec2{-rect.w / 2, +rect.d / 2},
        Vec2{-rect.w / 2, -rect.d / 2},
        Vec2{+rect.w / 2, -rect.d / 2},
    };

    Box3D box;
    box.category = category;
    Vec3 sum;
    for (int i = 0; i < 4; ++i) {
        const Vec2 in_plane = rect.center + ax * local[i].x + ay * local[i].y;
        const Vec3 bottom = basis.from_plane(in_plane);
        const Vec3 top = bottom + plane.n * height;
        box.corners[i] = {bottom.x, bottom.y, bottom.z};
        box.corners[i + 4] = {top.x, top.y, top.z};
        sum = sum + bottom + top;
    }
    const Vec3 ctr = sum * (1.0 / 8.0);
    box.center = {ctr.x, ctr.y, ctr.z};
    return box;
}

Plane refine_plane(const PointCloud& cloud, const std::vector<size_t>& indices,
                   const Plane& plane) {
    if (indices.size() < 3) return plane;
    Vec3 mean;
    for (size_t i : indices) mean = mean + cloud.points[i].vec();
    mean = mean * (1.0 / static_cast<double>(indices.size()));

    // Scatter matrix; the normal is the eigenvector of the smallest
    // eigenvalue, found by inverse deflation: start from the current normal
    // and iterate (A - trace shift) ... a few power iterations on
    // (c*I - A) suffice at this scale.
    double a[3][3] = {};
    for (size_t i : indices) {
        const Vec3 d = cloud.points[i].vec() - mean;
        const double v[3] = {d.x, d.y, d.z};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a[r][c] += v[r] * v[c];
    }
    const double shift = a[0][0] + a[1][1] + a[2][2];
    double m[3][3];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[r][c] = (r == c ? shift : 0.0) - a[r][c];

    Vec3 n = plane.n;
    for (int it = 0; it < 32; ++it) {
        const Vec3 next{m[0][0] * n.x + m[0][1] * n.y + m[0][2] * n.z,
                        m[1][0] * n.x + m[1][1] * n.y + m[1][2] * n.z,
                        m[2][0] * n.x + m[2][1] * n.y + m[2][2] * n.z};
        const double len = next.norm();
        if (len == 0.0) break;
        n = next * (1.0 / len);
    }
    if (n.dot(plane.n) < 0.0) n = n * -1.0;

    Plane out;
    out.n = n;
    out.d = -n.dot(mean);
    return out;
}

DetectOutput detect_boxes(const PointCloud& cloud, const std::vector<Roi2D>& rois,
                          const CameraIntrinsics& intr, const Catalog& catalog,
                          const DetectParams& params) {
    DetectOutput out;
    const PointCloud filtered = range_filter(cloud, params.max_range);

    // Floor search: extract dominant planes until one faces camera-up
    // (within the cone around -down_axis); its inliers and any other large
    // planes pulled out along the way leave the object points behind.
    PointCloud remaining = filtered;
    const Vec3 up = params.down_axis * -1.0;
    const double cos_tol = std::cos(params.floor_axis_tol_deg * M_PI / 180.0);
    for (int round = 0; round < params.max_plane_extractions; ++round) {
        if (remaining.size() < 3) break;
        RansacResult r;
        try {
            r = ransac_plane(remaining, params.ransac_iterations, params.ransac_tol,
                             derive_seed(params.seed, static_cast<uint64_t>(round)));
        } catch (const std::exception&) {
            break;
        }
        const bool is_floor = r.plane.n.dot(up.normalized()) >= cos_tol;
        Plane cut_plane = r.plane;
        double cut_tol = params.ransac_tol;
        if (is_floor) {
            // Least-squares refit recenters the plane inside the noise band;
            // the wider clearance keeps floor-noise stragglers out of the
            // object clusters.
            cut_plane = refine_plane(remaining, r.inliers, r.plane);
            cut_tol = std::max(params.ransac_tol, params.floor_clearance);
        }
        PointCloud next;
        for (const auto& p : remaining.points)
            if (std::abs(cut_plane.signed_distance(p.vec())) > cut_tol)
                next.points.push_back(p);
        remaining = std::move(next);
        if (is_floor) {
            out.floor = cut_plane;
            out.floor_found = true;
            break;
        }
    }

    for (size_t i = 0; i < rois.size(); ++i) {
        Detection det;
        det.roi_index = i;
        if (!out.floor_found) {
            det.failure = "no-floor-plane";
            out.detections.push_back(std::move(det));
            continue;
        }
        const CategorySpec* spec = catalog.find(rois[i].category);
        if (!spec) {
            det.failure = "unknown-category";
            out.detections.push_back(std::move(det));
            continue;
        }
        const PointCloud cropped = crop_by_roi(remaining, rois[i], intr);
        if (cropped.empty()) {
            det.failure = "no-points-in-roi";
            out.detections.push_back(std::move(det));
            continue;
        }
        const auto clusters =
            euclidean_cluster(cropped, params.cluster_tol, params.cluster_min_size);
        if (clusters.empty()) {
            det.failure = "no-cluster";
            out.detections.push_back(std::move(det));
            continue;
        }
        try {
            const PointCloud& target = select_target_cluster(clusters);
            const auto coords = project_to_plane(target, out.floor);
            const OrientedRect rect = fit_rectangle(coords, *spec);
            det.box = extrude_box(rect, out.floor, spec->h, spec->name);
        } catch (const std::exception&) {
            det.failure = "degenerate-cluster";
        }
        out.detections.push_back(std::move(det));
    }
    return out;
}

bool is_valid_cuboid(const Box3D& box, double tol) {
    // Edge frame from corner 0: along the bottom ring and up to the top.
    const Vec3 ex = box.corners[1].vec() - box.corners[0].vec();
    const Vec3 ey = box.corners[3].vec() - box.corners[0].vec();
    const Vec3 ez = box.corners[4].vec() - box.corners[0].vec();
    if (std::abs(ex.dot(ey)) > tol * std::max(1.0, ex.norm() * ey.norm())) return false;
    if (std::abs(ex.dot(ez)) > tol * std::max(1.0, ex.norm() * ez.norm())) return false;
    if (std::abs(ey.dot(ez)) > tol * std::max(1.0, ey.norm() * ez.norm())) return false;

    // Every corner must be corner0 + a {0,1} combination of the edge frame.
    const std::array<std::array<int, 3>, 8> mix{{{0, 0, 0},
                                                 {1, 0, 0},
                                                 {1, 1, 0},
                                                 {0, 1, 0},
                                                 {0, 0, 1},
                                                 {1, 0, 1},
                                                 {1, 1, 1},
                                                 {0, 1, 1}}};
    for (int i = 0; i < 8; ++i) {
        const Vec3 want = box.corners[0].vec() + ex * mix[i][0] + ey * mix[i][1] + ez * mix[i][2];
        if ((box.corners[i].vec() - want).norm() > tol) return false;
    }

    Vec3 mean;
    for (const auto& c : box.corners) mean = mean + c.vec();
    mean = mean * (1.0 / 8.0);
    return (mean - box.center.vec()).norm() <= 1e-9;
}

}  // namespace bridgesim
