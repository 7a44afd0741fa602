#pragma once

#include <array>
#include <vector>

namespace bridgesim {

// Joint angles in degrees, time in seconds throughout.
using JointVector = std::vector<double>;

struct TrajectoryPoint {
    double t = 0.0;
    JointVector q;
    JointVector v;  // empty means not set
    JointVector a;

    bool operator==(const TrajectoryPoint&) const = default;
};

struct JointTrajectory {
    std::vector<TrajectoryPoint> points;
    int dof = 0;

    double start() const { return points.empty() ? 0.0 : points.front().t; }
    double end() const { return points.empty() ? 0.0 : points.back().t; }
    double duration() const { return end() - start(); }

    // Throws std::invalid_argument: empty, dof mismatch, non-finite values,
    // non-increasing timestamps (duplicates are rejected, not merged).
    void validate() const;

    bool operator==(const JointTrajectory&) const = default;
};

struct PvaSample {
    double p = 0.0;
    double v = 0.0;
    double a = 0.0;
};

// Polynomial in local time tau = t - t0, one coefficient set per joint.
// The defining boundary conditions are kept alongside the coefficients so
// knot evaluation returns them exactly; for short segments the c3..c5 terms
// are too ill-conditioned to reproduce the boundary to float precision.
struct QuinticSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<std::array<double, 6>> coeffs;
    std::vector<PvaSample> lo;  // boundary at t0, per joint
    std::vector<PvaSample> hi;  // boundary at t1
};

struct QuinticSpline {
    std::vector<QuinticSegment> segments;
    int dof = 0;

    double start() const { return segments.empty() ? 0.0 : segments.front().t0; }
    double end() const { return segments.empty() ? 0.0 : segments.back().t1; }
    double duration() const { return end() - start(); }

    // Throws std::out_of_range for t outside [start, end].
    TrajectoryPoint eval(double t) const;
};

// Boundary-condition solve: c0 = p0, c1 = v0, c2 = a0/2 and (c3, c4, c5)
// from the unique 3x3 system for position/velocity/acceleration at T.
std::array<double, 6> quintic_coeffs(double p0, double v0, double a0,
                                     double p1, double v1, double a1, double T);

// Polynomial and its first two derivatives at local time tau.
PvaSample quintic_eval(const std::array<double, 6>& c, double tau);

// Segment evaluation at absolute time t in [t0, t1]; throws outside the span.
TrajectoryPoint quintic_eval(const QuinticSegment& seg, double t);

// Interior waypoints get central-difference velocities, then accelerations
// from those velocities; first/last default to zero (rest-to-rest).
// Waypoints that already carry v or a are preserved.
JointTrajectory assign_waypoint_derivatives(const JointTrajectory& traj);

// One segment per adjacent waypoint pair, sharing boundary (p, v, a) so the
// result is C2 across knots. Requires v and a at every waypoint.
QuinticSpline build_spline(const JointTrajectory& traj);

// Samples at start, start+period, ... through the end; the final knot is
// always emitted even when the span is not a period multiple.
std::vector<TrajectoryPoint> resample(const QuinticSpline& spline, double period);

// Piecewise-linear position on the period grid; v is the segment slope, a = 0.
std::vector<TrajectoryPoint> linear_resample(const JointTrajectory& traj, double period);

// Holds the most recent waypoint on the period grid; v = a = 0.
std::vector<TrajectoryPoint> zoh_resample(const JointTrajectory& traj, double period);

}  // namespace bridgesim
