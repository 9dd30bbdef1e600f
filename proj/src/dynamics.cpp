#include "gantry/dynamics.hpp"

#include "gantry/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gantry {

void PlantParams::validate() const {
    if (!(tip_mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "tip_mass must be > 0");
    if (!(rail_ei > 0.0)) throw Error(ErrorCode::InvalidArgument, "rail_ei must be > 0");
    if (!(damping_ratio >= 0.0 && damping_ratio < 1.0))
        throw Error(ErrorCode::InvalidArgument, "damping_ratio must be in [0, 1)");
    if (!(z_mount_offset >= 0.0)) throw Error(ErrorCode::InvalidArgument, "z_mount_offset must be >= 0");
    if (!(min_extension > 0.0)) throw Error(ErrorCode::InvalidArgument, "min_extension must be > 0");
    if (accel_cap && !(*accel_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "accel_cap must be > 0");
    if (!(settle_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "settle_tolerance must be > 0");
}

double pendulum_extension(double z, const PlantParams& params) {
    return std::max(params.z_mount_offset + (params.z_max - z), params.min_extension);
}

double cantilever_stiffness(double extension, const PlantParams& params) {
    if (!(extension > 0.0)) throw Error(ErrorCode::NonPositiveExtension, "cantilever extension must be > 0");
    const double L = std::max(extension, params.min_extension);
    return 3.0 * params.rail_ei / (L * L * L);
}

double natural_frequency(double stiffness, double mass) {
    if (!(stiffness > 0.0) || !(mass > 0.0))
        throw Error(ErrorCode::InvalidArgument, "stiffness and mass must be > 0");
    return std::sqrt(stiffness / mass) / (2.0 * std::numbers::pi);
}

PlantState step(const PlantState& state, const Eigen::Vector3d& carriage_accel, double dt,
                const PlantParams& params) {
    if (!(dt > 0.0 && dt <= kMaxPlantStep))
        throw Error(ErrorCode::StepTooLarge, "plant step must be in (0, 2 ms]");
    PlantState next = state;
    next.time = state.time + dt;
    if (params.rigid()) {
        next.deflection.setZero();
        next.deflection_rate.setZero();
        return next;
    }
    const double k = cantilever_stiffness(pendulum_extension(state.carriage.z(), params), params);
    const double omega2 = k / params.tip_mass;
    const double c = 2.0 * params.damping_ratio * std::sqrt(omega2);
    const Eigen::Vector2d base = carriage_accel.head<2>();
    auto accel = [&](const Eigen::Vector2d& d, const Eigen::Vector2d& v) -> Eigen::Vector2d {
        return -omega2 * d - c * v - base;
    };
    // Kick-drift-kick; symplectic and second order, damping handled explicitly.
    const Eigen::Vector2d v_half = state.deflection_rate + 0.5 * dt * accel(state.deflection, state.deflection_rate);
    next.deflection = state.deflection + dt * v_half;
    next.deflection_rate = v_half + 0.5 * dt * accel(next.deflection, v_half);
    return next;
}

double deflection_energy(const PlantState& state, const PlantParams& params) {
    if (params.rigid()) return 0.0;
    const double k = cantilever_stiffness(pendulum_extension(state.carriage.z(), params), params);
    return 0.5 * params.tip_mass * state.deflection_rate.squaredNorm() + 0.5 * k * state.deflection.squaredNorm();
}

DesyncProfile velocity_lag(const Trajectory& trajectory, const BeltParams& belt, double delay) {
    if (delay == 0.0) return DesyncProfile::none();
    return {[&trajectory, belt, delay](double t) {
        const auto s = trajectory.sample(t);
        const double rate_b = (s.velocity[Y] - belt.differential_sign * s.velocity[Z]) / belt.pulley_radius;
        return -delay * rate_b;
    }};
}

SimTrace simulate(const Trajectory& trajectory, const PlantParams& params, const SimOptions& options) {
    params.validate();
    options.belt.validate();
    if (!(options.sample_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample_rate must be > 0");
    if (!(options.hold_time >= 0.0)) throw Error(ErrorCode::InvalidArgument, "hold_time must be >= 0");

    const double record_dt = 1.0 / options.sample_rate;
    const int substeps = std::max(1, static_cast<int>(std::ceil(record_dt / options.max_internal_dt - 1e-9)));
    const double dt = record_dt / substeps;
    if (dt > kMaxPlantStep) throw Error(ErrorCode::StepTooLarge, "internal step exceeds 2 ms");

    const double end_time = trajectory.duration() + options.hold_time;
    const auto n_records = static_cast<std::size_t>(std::ceil(end_time * options.sample_rate - 1e-9)) + 1;

    const auto& events = trajectory.payload_changes();
    auto mass_at = [&](double t) {
        double m = params.tip_mass;
        for (const auto& e : events)
            if (e.time <= t) m += e.mass_delta;
        return m;
    };
    auto capped = [&](Eigen::Vector3d a) {
        if (params.accel_cap) a = a.cwiseMax(-*params.accel_cap).cwiseMin(*params.accel_cap);
        return a;
    };

    SimTrace trace;
    trace.sample_rate = options.sample_rate;
    trace.motion_end = trajectory.duration();
    trace.records.reserve(n_records);

    JointTrajectory commanded;
    commanded.reserve(n_records);

    PlantState state;
    state.carriage = JointStated(trajectory.sample(0.0).position);
    PlantParams local = params;
    for (std::size_t i = 0; i < n_records; ++i) {
        const double t = static_cast<double>(i) * record_dt;
        const auto desired = trajectory.sample(t);
        TraceRecord rec;
        rec.t = t;
        rec.desired = JointStated(desired.position);
        rec.carriage = rec.desired;
        rec.carriage_accel = capped(desired.acceleration.head<3>());
        rec.actual = forward_kinematics(rec.desired);
        rec.actual.position.head<2>() += state.deflection;
        trace.records.push_back(rec);
        commanded.push_back({t, rec.desired});

        if (i + 1 == n_records) break;
        for (int s = 0; s < substeps; ++s) {
            const double ts = t + s * dt;
            const auto cmd = trajectory.sample(ts);
            state.carriage = JointStated(cmd.position);
            local.tip_mass = mass_at(ts);
            state = step(state, capped(cmd.acceleration.head<3>()), dt, local);
        }
    }

    // Differential-pair desync moves the carriage itself, so it shifts the tip too.
    if (options.desync_delay != 0.0) {
        const auto actual = coupling_error(commanded, velocity_lag(trajectory, options.belt, options.desync_delay),
                                           options.belt);
        for (std::size_t i = 0; i < trace.records.size(); ++i) {
            auto& rec = trace.records[i];
            const Eigen::Vector3d shift = actual[i].q.position() - rec.carriage.position();
            rec.carriage = actual[i].q;
            rec.actual.position += shift;
        }
    }
    return trace;
}

SimTrace simulate(const std::vector<Waypoint>& waypoints, const AxisLimitSet& limits, const PlantParams& params,
                  const SimOptions& options, const WorkspaceLimits& workspace) {
    const auto trajectory = plan_path(waypoints, apply_accel_cap(limits, params.accel_cap), workspace);
    return simulate(trajectory, params, options);
}

double settle_time(const SimTrace& trace, double tol) {
    if (trace.records.empty()) return kNeverSettles;
    const double motion_end = std::isnan(trace.motion_end) ? trace.records.front().t : trace.motion_end;
    double settled = motion_end;
    for (std::size_t i = trace.records.size(); i-- > 0;) {
        const auto& r = trace.records[i];
        if (r.t < motion_end) break;
        const double err = (r.actual.position - r.desired.position()).norm();
        if (err >= tol) {
            if (i + 1 == trace.records.size()) return kNeverSettles;
            settled = std::max(motion_end, trace.records[i + 1].t);
            break;
        }
    }
    return settled;
}

}  // namespace gantry
