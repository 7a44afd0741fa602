#pragma once

#include <cmath>
#include <vector>

namespace bridgesim {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
};

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(dot(*this)); }
};

// Andrew monotone chain; returns the hull counterclockwise without repeating
// the first vertex. Collinear input collapses to fewer than 3 vertices.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

struct MinAreaRect {
    Vec2 center;
    double angle = 0.0;     // radians, direction of the e1 extent
    double extent1 = 0.0;   // along angle
    double extent2 = 0.0;   // perpendicular
    double area() const { return extent1 * extent2; }
};

// Rotating calipers over the hull edges. Equal-area candidates resolve to
// the smallest angle normalized to [0, pi/2).
MinAreaRect min_area_rect(const std::vector<Vec2>& hull);

}  // namespace bridgesim
