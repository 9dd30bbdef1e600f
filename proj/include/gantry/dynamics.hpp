#pragma once

#include "gantry/kinematics.hpp"
#include "gantry/motion.hpp"
#include "gantry/trace.hpp"
#include "gantry/transmission.hpp"

#include <limits>
#include <optional>

namespace gantry {

/// Lumped model of the flexible Z rails: the tip mass sits on a cantilever
/// whose free length grows as the carriage goes down.
struct PlantParams {
    double tip_mass = 2.0;          // kg
    double rail_ei = 120.0;         // N m^2; +inf gives a rigid plant
    double damping_ratio = 0.04;
    double z_mount_offset = 0.15;   // m of rail below the carriage at z = z_max
    double z_max = 1.0;             // m
    std::optional<double> accel_cap;  // m/s^2, belt slip limit on linear axes
    double settle_tolerance = 1e-3;   // m
    double min_extension = 1e-3;      // m

    bool rigid() const { return std::isinf(rail_ei); }
    void validate() const;

    static PlantParams rigid_plant() {
        PlantParams p;
        p.rail_ei = std::numeric_limits<double>::infinity();
        return p;
    }
};

/// Free rail length for carriage height z, clamped below at min_extension.
double pendulum_extension(double z, const PlantParams& params);

/// Tip-loaded cantilever: k = 3 EI / L^3. Throws NonPositiveExtension for L <= 0.
double cantilever_stiffness(double extension, const PlantParams& params);

/// Hz.
double natural_frequency(double stiffness, double mass);

struct PlantState {
    JointStated carriage;
    Eigen::Vector2d deflection = Eigen::Vector2d::Zero();
    Eigen::Vector2d deflection_rate = Eigen::Vector2d::Zero();
    double time = 0.0;
};

inline constexpr double kMaxPlantStep = 2e-3;

/// Advances the tip deflection by dt under the given carriage acceleration
/// (only x and y drive the rail). Throws StepTooLarge outside (0, 2 ms].
PlantState step(const PlantState& state, const Eigen::Vector3d& carriage_accel, double dt,
                const PlantParams& params);

/// 0.5 m v^2 + 0.5 k d^2 summed over both lateral axes at the current extension.
double deflection_energy(const PlantState& state, const PlantParams& params);

struct SimOptions {
    double sample_rate = 250.0;    // Hz
    double hold_time = 10.0;       // s recorded after the command completes
    double max_internal_dt = 1e-4;
    BeltParams belt;
    /// Motor B follows its command delayed by this many seconds.
    double desync_delay = 0.0;
};

/// Motor-B lag of a pure delay, linearized: -delay * d(theta_b)/dt.
DesyncProfile velocity_lag(const Trajectory& trajectory, const BeltParams& belt, double delay);

SimTrace simulate(const Trajectory& trajectory, const PlantParams& params, const SimOptions& options = {});

/// Plans the waypoint legs with the plant's acceleration cap and simulates them.
SimTrace simulate(const std::vector<Waypoint>& waypoints, const AxisLimitSet& limits, const PlantParams& params,
                  const SimOptions& options = {}, const WorkspaceLimits& workspace = {});

inline constexpr double kNeverSettles = std::numeric_limits<double>::infinity();

/// Time after motion_end from which the 3D tip error stays below tol until the
/// end of the trace; kNeverSettles otherwise.
double settle_time(const SimTrace& trace, double tol);

}  // namespace gantry
