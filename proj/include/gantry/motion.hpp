#pragma once

#include "gantry/kinematics.hpp"

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace gantry {

/// Units are meters for linear axes and radians for the wrist.
struct AxisLimits {
    double vmax = 1.0;
    double amax = 1.0;

    void validate() const;
};

using AxisLimitSet = std::array<AxisLimits, 6>;

/// Constant-acceleration profile: accelerate, cruise, decelerate. `v_peak` and
/// `accel` are magnitudes; the direction comes from the sign of `distance`.
struct MotionProfile {
    double start = 0.0;
    double distance = 0.0;
    double t_accel = 0.0;
    double t_cruise = 0.0;
    double t_decel = 0.0;
    double v_peak = 0.0;
    double accel = 0.0;

    double duration() const { return t_accel + t_cruise + t_decel; }
    double end() const { return start + distance; }
    bool triangular() const { return t_cruise == 0.0 && distance != 0.0; }
};

struct ProfileSample {
    double position = 0.0;
    double velocity = 0.0;
    double acceleration = 0.0;
};

/// Minimal-time profile for a move of `distance` from `start`.
MotionProfile plan_trapezoid(double distance, const AxisLimits& limits, double start = 0.0);

/// Same displacement finished at `duration` (>= the profile's own duration) by
/// uniformly slowing it down; the accel/total time ratio is preserved.
MotionProfile stretch_to_duration(const MotionProfile& profile, double duration);

/// Profile covering `distance` in exactly `duration` seconds, spending
/// `accel_fraction` of it in each ramp (0 < accel_fraction <= 0.5).
MotionProfile profile_for_duration(double distance, double duration, double accel_fraction, double start = 0.0);

ProfileSample sample(const MotionProfile& profile, double t);

/// Synchronized move between two joint states: every axis ends at the
/// duration of the slowest axis's minimal-time profile.
std::array<MotionProfile, 6> plan_coordinated(const JointStated& from, const JointStated& to,
                                              const AxisLimitSet& limits,
                                              const WorkspaceLimits& workspace = {});

/// Linear axes get amax = min(amax, cap); the wrist is direct drive and untouched.
AxisLimitSet apply_accel_cap(AxisLimitSet limits, std::optional<double> cap);

/// Joint-space position, velocity and acceleration. Angles are not wrapped.
struct JointSample {
    Vector6d position = Vector6d::Zero();
    Vector6d velocity = Vector6d::Zero();
    Vector6d acceleration = Vector6d::Zero();
};

struct LemniscateSpec {
    Eigen::Vector2d center{0.6, 0.6};
    double scale = 0.4;        // half-width of the figure eight along x, m
    double height = 0.5;       // z of the drawing plane, m
    bool multi_plane = false;
    double z_amplitude = 0.0;  // sinusoidal z excursion when multi_plane, m
    double period = 10.0;      // s, one full traversal
    double ramp_fraction = 0.1;
};

/// Bernoulli lemniscate in the X-Y plane, traversed once over `period` with a
/// trapezoidal time law on the curve parameter so the path starts and ends at rest.
class LemniscatePath {
public:
    explicit LemniscatePath(const LemniscateSpec& spec);

    const LemniscateSpec& spec() const { return spec_; }
    double period() const { return spec_.period; }

    /// Point on the curve at parameter phase in [0, 2pi].
    Eigen::Vector3d point(double phase) const;
    JointSample sample(double t) const;

    /// Largest |x - cx| and |y - cy| per unit scale.
    static constexpr double kExtentX = 1.0;
    static double extent_y();

private:
    LemniscateSpec spec_;
    MotionProfile phase_law_;
};

/// Validates the curve against the workspace; throws CurveExceedsWorkspace.
LemniscatePath lemniscate_path(const LemniscateSpec& spec, const WorkspaceLimits& workspace = {});

/// Arc length of one loop of the (planar) lemniscate at the given scale.
double lemniscate_length(double scale);

struct Waypoint {
    JointStated q;
    double dwell = 0.0;          // seconds held after arrival
    double payload_delta = 0.0;  // kg added (or removed) on arrival
};

struct WaypointPath {
    std::vector<Waypoint> waypoints;
    std::size_t pick_index = 0;
    std::size_t place_index = 0;
};

struct PickRunOptions {
    double retract_height = 0.95;
    double payload = 1.0;
    double dwell = 0.5;
};

/// start -> pick -> place -> start, retracting Z to `retract_height` before
/// every horizontal translation.
WaypointPath pick_run_path(const JointStated& start, const JointStated& pick, const JointStated& place,
                           const PickRunOptions& options, const WorkspaceLimits& workspace = {});

struct PayloadChange {
    double time = 0.0;
    double mass_delta = 0.0;
};

/// Piecewise desired joint trajectory built from coordinated legs, dwells and
/// parametric curves, with payload events on the time axis.
class Trajectory {
public:
    explicit Trajectory(const Vector6d& start);

    void append_leg(const std::array<MotionProfile, 6>& leg);
    void append_dwell(double duration);
    void append_curve(const LemniscatePath& curve);
    void add_payload_change(double mass_delta);

    double duration() const { return duration_; }
    const Vector6d& final_position() const { return end_; }
    const std::vector<PayloadChange>& payload_changes() const { return payload_changes_; }

    /// Clamps to the end state for t >= duration(), to the start for t <= 0.
    JointSample sample(double t) const;

private:
    struct Leg { std::array<MotionProfile, 6> axes; };
    struct Dwell { Vector6d position; };
    struct Curve {
        LemniscatePath path;
        Eigen::Vector3d wrist;
    };
    using Body = std::variant<Leg, Dwell, Curve>;
    struct Segment {
        double t0;
        double duration;
        Body body;
    };

    Vector6d start_;
    Vector6d end_;
    double duration_ = 0.0;
    std::vector<Segment> segments_;
    std::vector<PayloadChange> payload_changes_;
};

/// Coordinated legs between consecutive waypoints, plus dwells and payload events.
Trajectory plan_path(const std::vector<Waypoint>& waypoints, const AxisLimitSet& limits,
                     const WorkspaceLimits& workspace = {});

}  // namespace gantry
