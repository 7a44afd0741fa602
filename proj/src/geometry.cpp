#include "bridgesim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace bridgesim {

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
    std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const Vec2& a, const Vec2& b) {
                                 return a.x == b.x && a.y == b.y;
                             }),
                 points.end());
    const size_t n = points.size();
    if (n < 3) return points;

    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {  // lower
        while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(points[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = points[i];
    }
    for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
        while (k >= t && (hull[k - 1] - hull[k - 2]).cross(points[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

MinAreaRect min_area_rect(const std::vector<Vec2>& hull) {
    if (hull.size() < 3) throw std::invalid_argument("degenerate hull");

    MinAreaRect best;
    double best_area = std::numeric_limits<double>::infinity();
    double best_angle = 0.0;
    constexpr double kAreaTie = 1e-12;

    for (size_t i = 0; i < hull.size(); ++i) {
        const Vec2 edge = hull[(i + 1) % hull.size()] - hull[i];
        const double len = edge.norm();
        if (len == 0.0) continue;
        const Vec2 e1{edge.x / len, edge.y / len};
        const Vec2 e2{-e1.y, e1.x};

        double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
        double lo2 = lo1, hi2 = -lo1;
        for (const Vec2& p : hull) {
            const double a = p.dot(e1), b = p.dot(e2);
            lo1 = std::min(lo1, a);
            hi1 = std::max(hi1, a);
            lo2 = std::min(lo2, b);
            hi2 = std::max(hi2, b);
        }
        const double area = (hi1 - lo1) * (hi2 - lo2);

        double angle = std::atan2(e1.y, e1.x);
        double ext1 = hi1 - lo1, ext2 = hi2 - lo2;
        // Normalize by the rectangle's quarter-turn symmetry.
        while (angle < 0.0) angle += M_PI;
        if (angle >= M_PI / 2) {
            angle -= M_PI / 2;
            std::swap(ext1, ext2);
        }

        const bool better = area < best_area - kAreaTie ||
                            (area < best_area + kAreaTie && angle < best_angle - 1e-12);
        if (better) {
            best_area = std::min(area, best_area);
            best_angle = angle;
            const double c1 = 0.5 * (lo1 + hi1), c2 = 0.5 * (lo2 + hi2);
            best.center = e1 * c1 + e2 * c2;
            best.angle = angle;
            best.extent1 = ext1;
            best.extent2 = ext2;
        }
    }
    if (!std::isfinite(best_area)) throw std::invalid_argument("degenerate hull");
    return best;
}

}  // namespace bridgesim
