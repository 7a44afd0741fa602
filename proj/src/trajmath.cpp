#include "bridgesim/trajmath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bridgesim {

namespace {

bool all_finite(const JointVector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Grid timestamps accumulate rounding; treat anything within a nanosecond
// of the end as the end.
constexpr double kTimeEps = 1e-9;

}  // namespace

void JointTrajectory::validate() const {
    if (points.empty()) throw std::invalid_argument("trajectory has no points");
    if (dof <= 0) throw std::invalid_argument("trajectory dof must be positive");
    if (points.front().t < 0.0) throw std::invalid_argument("trajectory starts before t=0");
    double prev = -1.0;
    for (const auto& p : points) {
        if (!std::isfinite(p.t)) throw std::invalid_argument("non-finite timestamp");
        if (p.t <= prev) throw std::invalid_argument("timestamps not strictly increasing");
        prev = p.t;
        if (static_cast<int>(p.q.size()) != dof) throw std::invalid_argument("waypoint dof mismatch");
        if (!p.v.empty() && static_cast<int>(p.v.size()) != dof)
            throw std::invalid_argument("velocity dof mismatch");
        if (!p.a.empty() && static_cast<int>(p.a.size()) != dof)
            throw std::invalid_argument("acceleration dof mismatch");
        if (!all_finite(p.q) || !all_finite(p.v) || !all_finite(p.a))
            throw std::invalid_argument("non-finite waypoint value");
    }
}

std::array<double, 6> quintic_coeffs(double p0, double v0, double a0,
                                     double p1, double v1, double a1, double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("segment duration must be positive");
    for (double x : {p0, v0, a0, p1, v1, a1})
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite boundary condition");

    const double T2 = T * T;
    const double T3 = T2 * T;
    const double T4 = T3 * T;
    const double T5 = T4 * T;

    std::array<double, 6> c{};
    c[0] = p0;
    c[1] = v0;
    c[2] = 0.5 * a0;
    c[3] = (20.0 * (p1 - p0) - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T2) / (2.0 * T3);
    c[4] = (30.0 * (p0 - p1) + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T2) / (2.0 * T4);
    c[5] = (12.0 * (p1 - p0) - 6.0 * (v1 + v0) * T - (a0 - a1) * T2) / (2.0 * T5);
    return c;
}

PvaSample quintic_eval(const std::array<double, 6>& c, double tau) {
    PvaSample s;
    s.p = ((((c[5] * tau + c[4]) * tau + c[3]) * tau + c[2]) * tau + c[1]) * tau + c[0];
    s.v = (((5.0 * c[5] * tau + 4.0 * c[4]) * tau + 3.0 * c[3]) * tau + 2.0 * c[2]) * tau + c[1];
    s.a = ((20.0 * c[5] * tau + 12.0 * c[4]) * tau + 6.0 * c[3]) * tau + 2.0 * c[2];
    return s;
}

TrajectoryPoint quintic_eval(const QuinticSegment& seg, double t) {
    if (t < seg.t0 - kTimeEps || t > seg.t1 + kTimeEps)
        throw std::out_of_range("evaluation time outside segment span");
    const double tau = std::clamp(t, seg.t0, seg.t1) - seg.t0;
    const double T = seg.t1 - seg.t0;
    const bool at_lo = tau <= 0.0 && seg.lo.size() == seg.coeffs.size();
    const bool at_hi = tau >= T && seg.hi.size() == seg.coeffs.size();
    TrajectoryPoint out;
    out.t = t;
    out.q.reserve(seg.coeffs.size());
    out.v.reserve(seg.coeffs.size());
    out.a.reserve(seg.coeffs.size());
    for (size_t j = 0; j < seg.coeffs.size(); ++j) {
        const PvaSample s = at_lo   ? seg.lo[j]
                            : at_hi ? seg.hi[j]
                                    : quintic_eval(seg.coeffs[j], tau);
        out.q.push_back(s.p);
        out.v.push_back(s.v);
        out.a.push_back(s.a);
    }
    return out;
}

JointTrajectory assign_waypoint_derivatives(const JointTrajectory& traj) {
    traj.validate();
    if (traj.points.size() < 2) throw std::invalid_argument("need at least 2 waypoints");

    JointTrajectory out = traj;
    const size_t n = out.points.size();
    const int dof = out.dof;

    for (size_t i = 0; i < n; ++i) {
        auto& p = out.points[i];
        if (!p.v.empty()) continue;
        p.v.assign(dof, 0.0);
        if (i > 0 && i + 1 < n) {
            const auto& prev = out.points[i - 1];
            const auto& next = out.points[i + 1];
            const double dt = next.t - prev.t;
            for (int j = 0; j < dof; ++j) p.v[j] = (next.q[j] - prev.q[j]) / dt;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        auto& p = out.points[i];
        if (!p.a.empty()) continue;
        p.a.assign(dof, 0.0);
        if (i > 0 && i + 1 < n) {
            const auto& prev = out.points[i - 1];
            const auto& next = out.points[i + 1];
            const double dt = next.t - prev.t;
            for (int j = 0; j < dof; ++j) p.a[j] = (next.v[j] - prev.v[j]) / dt;
        }
    }
    return out;
}

QuinticSpline build_spline(const JointTrajectory& traj) {
    traj.validate();
    if (traj.points.size() < 2) throw std::invalid_argument("need at least 2 waypoints");
    for (const auto& p : traj.points)
        if (p.v.empty() || p.a.empty())
            throw std::invalid_argument("waypoint missing velocity or acceleration");

    QuinticSpline spline;
    spline.dof = traj.dof;
    spline.segments.reserve(traj.points.size() - 1);
    for (size_t i = 0; i + 1 < traj.points.size(); ++i) {
        const auto& lo = traj.points[i];
        const auto& hi = traj.points[i + 1];
        QuinticSegment seg;
        seg.t0 = lo.t;
        seg.t1 = hi.t;
        seg.coeffs.reserve(traj.dof);
        const double T = hi.t - lo.t;
        for (int j = 0; j < traj.dof; ++j) {
            seg.coeffs.push_back(quintic_coeffs(lo.q[j], lo.v[j], lo.a[j],
                                                hi.q[j], hi.v[j], hi.a[j], T));
            seg.lo.push_back({lo.q[j], lo.v[j], lo.a[j]});
            seg.hi.push_back({hi.q[j], hi.v[j], hi.a[j]});
        }
        spline.segments.push_back(std::move(seg));
    }
    return spline;
}

TrajectoryPoint QuinticSpline::eval(double t) const {
    if (segments.empty()) throw std::out_of_range("empty spline");
    if (t < start() - kTimeEps || t > end() + kTimeEps)
        throw std::out_of_range("evaluation time outside spline span");
    t = std::clamp(t, start(), end());
    // First segment whose t1 covers t; knots evaluate on the later segment's
    // start so they come out exactly as the stored boundary conditions.
    auto it = std::lower_bound(segments.begin(), segments.end(), t,
                               [](const QuinticSegment& s, double x) { return s.t1 < x; });
    if (it == segments.end()) it = segments.end() - 1;
    if (it + 1 != segments.end() && t >= (it + 1)->t0) ++it;
    return quintic_eval(*it, t);
}

namespace {

// Shared grid walk: emits start, start+period, ..., then the final time when
// the span is not a period multiple.
template <typename EmitFn>
void walk_grid(double t_begin, double t_end, double period, EmitFn&& emit) {
    double last = t_begin - period;
    for (size_t k = 0;; ++k) {
        double t = t_begin + static_cast<double>(k) * period;
        if (t > t_end + kTimeEps) break;
        t = std::min(t, t_end);
        emit(t);
        last = t;
    }
    if (t_end - last > kTimeEps) emit(t_end);
}

}  // namespace

std::vector<TrajectoryPoint> resample(const QuinticSpline& spline, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    if (spline.segments.empty()) throw std::invalid_argument("empty spline");
    std::vector<TrajectoryPoint> out;
    walk_grid(spline.start(), spline.end(), period,
              [&](double t) { out.push_back(spline.eval(t)); });
    return out;
}

std::vector<TrajectoryPoint> linear_resample(const JointTrajectory& traj, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    traj.validate();
    const auto& pts = traj.points;
    std::vector<TrajectoryPoint> out;
    if (pts.size() == 1) {
        TrajectoryPoint p = pts.front();
        p.v.assign(traj.dof, 0.0);
        p.a.assign(traj.dof, 0.0);
        out.push_back(std::move(p));
        return out;
    }
    size_t seg = 0;
    walk_grid(traj.start(), traj.end(), period, [&](double t) {
        while (seg + 2 < pts.size() && t >= pts[seg + 1].t) ++seg;
        const auto& lo = pts[seg];
        const auto& hi = pts[seg + 1];
        const double T = hi.t - lo.t;
        const double u = std::clamp((t - lo.t) / T, 0.0, 1.0);
        TrajectoryPoint p;
        p.t = t;
        p.q.resize(traj.dof);
        p.v.resize(traj.dof);
        p.a.assign(traj.dof, 0.0);
        for (int j = 0; j < traj.dof; ++j) {
            p.q[j] = lo.q[j] + u * (hi.q[j] - lo.q[j]);
            p.v[j] = (hi.q[j] - lo.q[j]) / T;
        }
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<TrajectoryPoint> zoh_resample(const JointTrajectory& traj, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    traj.validate();
    const auto& pts = traj.points;
    std::vector<TrajectoryPoint> out;
    size_t idx = 0;
    walk_grid(traj.start(), traj.end(), period, [&](double t) {
        while (idx + 1 < pts.size() && pts[idx + 1].t <= t + kTimeEps) ++idx;
        TrajectoryPoint p;
        p.t = t;
        p.q = pts[idx].q;
        p.v.assign(traj.dof, 0.0);
        p.a.assign(traj.dof, 0.0);
        out.push_back(std::move(p));
    });
    return out;
}

}  // namespace bridgesim
