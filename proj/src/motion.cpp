#include "gantry/motion.hpp"

#include "gantry/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gantry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

void require_in_workspace(const JointStated& q, const WorkspaceLimits& workspace, const char* what) {
    const auto violations = validate_workspace(q, workspace);
    if (violations.empty()) return;
    std::string msg = std::string(what) + " outside workspace:";
    for (const auto& v : violations)
        msg += " " + std::string(kAxisNames[v.axis]) + " by " + std::to_string(v.exceedance) + " m";
    throw Error(ErrorCode::WorkspaceViolation, msg);
}

}  // namespace

void AxisLimits::validate() const {
    if (!(vmax > 0.0) || !std::isfinite(vmax)) throw Error(ErrorCode::InvalidArgument, "vmax must be > 0");
    if (!(amax > 0.0) || !std::isfinite(amax)) throw Error(ErrorCode::InvalidArgument, "amax must be > 0");
}

MotionProfile plan_trapezoid(double distance, const AxisLimits& limits, double start) {
    limits.validate();
    MotionProfile p;
    p.start = start;
    p.distance = distance;
    const double d = std::abs(distance);
    if (d == 0.0) return p;

    p.accel = limits.amax;
    // Ramps up to vmax and back down need vmax^2 / amax of travel.
    if (limits.vmax * limits.vmax / limits.amax <= d) {
        p.v_peak = limits.vmax;
        p.t_accel = p.t_decel = limits.vmax / limits.amax;
        p.t_cruise = (d - limits.vmax * limits.vmax / limits.amax) / limits.vmax;
    } else {
        p.v_peak = std::sqrt(limits.amax * d);
        p.t_accel = p.t_decel = p.v_peak / limits.amax;
        p.t_cruise = 0.0;
    }
    return p;
}

MotionProfile profile_for_duration(double distance, double duration, double accel_fraction, double start) {
    if (!(duration >= 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be >= 0");
    if (!(accel_fraction > 0.0 && accel_fraction <= 0.5))
        throw Error(ErrorCode::InvalidArgument, "accel_fraction must be in (0, 0.5]");
    MotionProfile p;
    p.start = start;
    p.distance = distance;
    if (distance == 0.0 || duration == 0.0) {
        if (distance != 0.0) throw Error(ErrorCode::InvalidArgument, "nonzero distance in zero time");
        p.t_cruise = duration;
        return p;
    }
    p.t_accel = p.t_decel = accel_fraction * duration;
    p.t_cruise = duration - 2.0 * p.t_accel;
    if (p.t_cruise < 0.0) p.t_cruise = 0.0;
    p.v_peak = std::abs(distance) / (duration - p.t_accel);
    p.accel = p.v_peak / p.t_accel;
    return p;
}

MotionProfile stretch_to_duration(const MotionProfile& profile, double duration) {
    const double own = profile.duration();
    if (duration < own) throw Error(ErrorCode::InvalidArgument, "cannot compress a minimal-time profile");
    if (profile.distance == 0.0) {
        MotionProfile p;
        p.start = profile.start;
        p.t_cruise = duration;
        return p;
    }
    if (duration == own) return profile;
    return profile_for_duration(profile.distance, duration, profile.t_accel / own, profile.start);
}

ProfileSample sample(const MotionProfile& p, double t) {
    const double total = p.duration();
    if (p.distance == 0.0) return {p.start, 0.0, 0.0};
    if (t >= total) return {p.end(), 0.0, 0.0};
    if (t < 0.0) t = 0.0;

    const double s = sign_of(p.distance);
    if (t < p.t_accel) {
        return {p.start + s * 0.5 * p.accel * t * t, s * p.accel * t, s * p.accel};
    }
    if (t < p.t_accel + p.t_cruise) {
        const double tc = t - p.t_accel;
        return {p.start + s * (0.5 * p.accel * p.t_accel * p.t_accel + p.v_peak * tc), s * p.v_peak, 0.0};
    }
    // Deceleration is written relative to the end point so the final position is exact.
    const double remaining = total - t;
    return {p.end() - s * 0.5 * p.accel * remaining * remaining, s * p.accel * remaining, -s * p.accel};
}

std::array<MotionProfile, 6> plan_coordinated(const JointStated& from, const JointStated& to,
                                              const AxisLimitSet& limits, const WorkspaceLimits& workspace) {
    require_in_workspace(from, workspace, "start state");
    require_in_workspace(to, workspace, "goal state");

    std::array<MotionProfile, 6> out;
    double duration = 0.0;
    for (int i = 0; i < 6; ++i) {
        out[i] = plan_trapezoid(to[i] - from[i], limits[i], from[i]);
        duration = std::max(duration, out[i].duration());
    }
    for (auto& p : out) p = stretch_to_duration(p, duration);
    return out;
}

AxisLimitSet apply_accel_cap(AxisLimitSet limits, std::optional<double> cap) {
    if (!cap) return limits;
    if (!(*cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "accel_cap must be > 0");
    for (int i = X; i <= Z; ++i) limits[i].amax = std::min(limits[i].amax, *cap);
    return limits;
}

// ---------------------------------------------------------------------------
// Lemniscate

LemniscatePath::LemniscatePath(const LemniscateSpec& spec)
    : spec_(spec), phase_law_(profile_for_duration(kTwoPi, spec.period, spec.ramp_fraction)) {
    if (!(spec.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "lemniscate scale must be > 0");
    if (!(spec.period > 0.0)) throw Error(ErrorCode::InvalidArgument, "lemniscate period must be > 0");
}

double LemniscatePath::extent_y() { return 1.0 / (2.0 * std::numbers::sqrt2); }

Eigen::Vector3d LemniscatePath::point(double phase) const {
    const double s = std::sin(phase), c = std::cos(phase);
    const double denom = 1.0 + s * s;
    const double z = spec_.multi_plane ? spec_.height + spec_.z_amplitude * s : spec_.height;
    return {spec_.center.x() + spec_.scale * c / denom, spec_.center.y() + spec_.scale * s * c / denom, z};
}

JointSample LemniscatePath::sample(double t) const {
    const auto law = gantry::sample(phase_law_, t);
    // Curve derivatives by central differences in the phase; the curve is smooth
    // and this only feeds the plant forcing term.
    constexpr double h = 1e-4;
    const Eigen::Vector3d p = point(law.position);
    const Eigen::Vector3d p_plus = point(law.position + h);
    const Eigen::Vector3d p_minus = point(law.position - h);
    const Eigen::Vector3d dp = (p_plus - p_minus) / (2.0 * h);
    const Eigen::Vector3d ddp = (p_plus - 2.0 * p + p_minus) / (h * h);

    JointSample out;
    out.position.head<3>() = p;
    out.velocity.head<3>() = dp * law.velocity;
    out.acceleration.head<3>() = ddp * law.velocity * law.velocity + dp * law.acceleration;
    return out;
}

LemniscatePath lemniscate_path(const LemniscateSpec& spec, const WorkspaceLimits& workspace) {
    LemniscatePath path(spec);
    const double half_x = spec.scale * LemniscatePath::kExtentX;
    const double half_y = spec.scale * LemniscatePath::extent_y();
    const double half_z = spec.multi_plane ? std::abs(spec.z_amplitude) : 0.0;
    const Eigen::Vector3d lo(spec.center.x() - half_x, spec.center.y() - half_y, spec.height - half_z);
    const Eigen::Vector3d hi(spec.center.x() + half_x, spec.center.y() + half_y, spec.height + half_z);
    for (int i = 0; i < 3; ++i) {
        if (lo[i] < workspace.lower[i] || hi[i] > workspace.upper[i]) {
            throw Error(ErrorCode::CurveExceedsWorkspace,
                        "lemniscate leaves the workspace along " + std::string(kAxisNames[i]));
        }
    }
    return path;
}

double lemniscate_length(double scale) {
    // Composite Simpson over one loop; the integrand is smooth and periodic.
    constexpr int n = 20000;
    LemniscatePath curve(LemniscateSpec{{0.0, 0.0}, scale, 0.0, false, 0.0, 1.0, 0.1});
    auto speed = [&](double phase) {
        constexpr double h = 1e-6;
        return ((curve.point(phase + h) - curve.point(phase - h)) / (2.0 * h)).norm();
    };
    const double step = kTwoPi / n;
    double sum = speed(0.0) + speed(kTwoPi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * speed(i * step);
    return sum * step / 3.0;
}

// ---------------------------------------------------------------------------
// Pick run

WaypointPath pick_run_path(const JointStated& start, const JointStated& pick, const JointStated& place,
                           const PickRunOptions& options, const WorkspaceLimits& workspace) {
    require_in_workspace(start, workspace, "start waypoint");
    require_in_workspace(pick, workspace, "pick waypoint");
    require_in_workspace(place, workspace, "place waypoint");
    if (options.retract_height < workspace.lower.z() || options.retract_height > workspace.upper.z())
        throw Error(ErrorCode::WorkspaceViolation, "retract height outside workspace");

    auto raised = [&](const JointStated& q) {
        Vector6d v = q.vector();
        v[Z] = options.retract_height;
        return JointStated(v);
    };

    WaypointPath path;
    auto& w = path.waypoints;
    w.push_back({start});
    w.push_back({raised(start)});
    w.push_back({raised(pick)});
    path.pick_index = w.size();
    w.push_back({pick, options.dwell, options.payload});
    w.push_back({raised(pick)});
    w.push_back({raised(place)});
    path.place_index = w.size();
    w.push_back({place, options.dwell, -options.payload});
    w.push_back({raised(place)});
    w.push_back({raised(start)});
    w.push_back({start});
    return path;
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(const Vector6d& start) : start_(start), end_(start) {}

void Trajectory::append_leg(const std::array<MotionProfile, 6>& leg) {
    const double d = leg[0].duration();
    segments_.push_back({duration_, d, Leg{leg}});
    duration_ += d;
    for (int i = 0; i < 6; ++i) end_[i] = leg[i].end();
}

void Trajectory::append_dwell(double duration) {
    if (!(duration >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dwell must be >= 0");
    if (duration == 0.0) return;
    segments_.push_back({duration_, duration, Dwell{end_}});
    duration_ += duration;
}

void Trajectory::append_curve(const LemniscatePath& curve) {
    const Eigen::Vector3d wrist = end_.tail<3>();
    segments_.push_back({duration_, curve.period(), Curve{curve, wrist}});
    duration_ += curve.period();
    end_.head<3>() = curve.sample(curve.period()).position.head<3>();
}

void Trajectory::add_payload_change(double mass_delta) {
    if (mass_delta != 0.0) payload_changes_.push_back({duration_, mass_delta});
}

JointSample Trajectory::sample(double t) const {
    JointSample out;
    if (segments_.empty()) {
        out.position = start_;
        return out;
    }
    if (t >= duration_) {
        out.position = end_;
        return out;
    }
    t = std::max(t, 0.0);
    // Last segment whose start is <= t.
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double value, const Segment& s) { return value < s.t0; });
    if (it != segments_.begin()) --it;
    const double local = t - it->t0;
    return std::visit(
        [&](const auto& body) -> JointSample {
            using T = std::decay_t<decltype(body)>;
            JointSample s;
            if constexpr (std::is_same_v<T, Leg>) {
                for (int i = 0; i < 6; ++i) {
                    const auto a = gantry::sample(body.axes[i], local);
                    s.position[i] = a.position;
                    s.velocity[i] = a.velocity;
                    s.acceleration[i] = a.acceleration;
                }
            } else if constexpr (std::is_same_v<T, Dwell>) {
                s.position = body.position;
            } else {
                s = body.path.sample(local);
                s.position.tail<3>() = body.wrist;
            }
            return s;
        },
        it->body);
}

Trajectory plan_path(const std::vector<Waypoint>& waypoints, const AxisLimitSet& limits,
                     const WorkspaceLimits& workspace) {
    if (waypoints.empty()) throw Error(ErrorCode::InvalidArgument, "path needs at least one waypoint");
    Trajectory traj(waypoints.front().q.vector());
    traj.add_payload_change(waypoints.front().payload_delta);
    traj.append_dwell(waypoints.front().dwell);
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        traj.append_leg(plan_coordinated(waypoints[i - 1].q, waypoints[i].q, limits, workspace));
        traj.add_payload_change(waypoints[i].payload_delta);
        traj.append_dwell(waypoints[i].dwell);
    }
    return traj;
}

}  // namespace gantry
