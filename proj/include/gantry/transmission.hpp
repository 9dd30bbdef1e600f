#pragma once

#include "gantry/error.hpp"
#include "gantry/kinematics.hpp"

#include <functional>
#include <vector>

namespace gantry {

/// Motor shaft angles in radians. The X motor drives through a rigid
/// transmission rod; motors A and B form the Y/Z differential belt pair; the
/// three wrist motors are direct drive through a fixed ratio.
template <typename Scalar>
struct MotorState {
    Scalar theta_x{0};
    Scalar theta_a{0};
    Scalar theta_b{0};
    Scalar theta_roll{0};
    Scalar theta_pitch{0};
    Scalar theta_yaw{0};
};

using MotorStated = MotorState<double>;

struct BeltParams {
    double pulley_radius = 0.02;  // m
    double x_gain = 0.02;         // m/rad
    int differential_sign = 1;    // +1 or -1
    double wrist_gear_ratio = 1.0;

    /// Throws Error(InvalidArgument) describing the first bad field.
    void validate() const {
        if (!(pulley_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "pulley_radius must be > 0");
        if (!(x_gain > 0.0)) throw Error(ErrorCode::InvalidArgument, "x_gain must be > 0");
        if (differential_sign != 1 && differential_sign != -1)
            throw Error(ErrorCode::InvalidArgument, "differential_sign must be +1 or -1");
        if (!(wrist_gear_ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "wrist_gear_ratio must be > 0");
    }
};

/// [theta_a; theta_b] = D * [y; z]. Co-rotation drives Y, counter-rotation drives Z.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 2, 2> differential_matrix(const BeltParams& bp) {
    const Scalar inv_r = Scalar(1) / Scalar(bp.pulley_radius);
    const Scalar s = Scalar(bp.differential_sign);
    Eigen::Matrix<Scalar, 2, 2> D;
    D << inv_r, s * inv_r,
         inv_r, -s * inv_r;
    return D;
}

template <typename Scalar>
MotorState<Scalar> joints_to_motors(const JointState<Scalar>& q, const BeltParams& bp) {
    const Scalar r = Scalar(bp.pulley_radius);
    const Scalar s = Scalar(bp.differential_sign);
    const Scalar g = Scalar(bp.wrist_gear_ratio);
    MotorState<Scalar> m;
    m.theta_x = q.x() / Scalar(bp.x_gain);
    m.theta_a = (q.y() + s * q.z()) / r;
    m.theta_b = (q.y() - s * q.z()) / r;
    m.theta_roll = q.roll() * g;
    m.theta_pitch = q.pitch() * g;
    m.theta_yaw = q.yaw() * g;
    return m;
}

template <typename Scalar>
JointState<Scalar> motors_to_joints(const MotorState<Scalar>& m, const BeltParams& bp) {
    const Scalar r = Scalar(bp.pulley_radius);
    const Scalar s = Scalar(bp.differential_sign);
    const Scalar g = Scalar(bp.wrist_gear_ratio);
    return JointState<Scalar>(m.theta_x * Scalar(bp.x_gain),
                              r * (m.theta_a + m.theta_b) / Scalar(2),
                              s * r * (m.theta_a - m.theta_b) / Scalar(2),
                              m.theta_roll / g, m.theta_pitch / g, m.theta_yaw / g);
}

struct TimedJointState {
    double t = 0.0;
    JointStated q;
};

using JointTrajectory = std::vector<TimedJointState>;

/// Offset (radians) added to motor B relative to its command, as a function of
/// time. Must satisfy lag(0) == 0 and stay bounded.
struct DesyncProfile {
    std::function<double(double)> lag;

    static DesyncProfile none() {
        return {[](double) { return 0.0; }};
    }
};

/// Replays a commanded joint series through the motors with motor B lagging,
/// returning the joint series the carriage actually follows.
inline JointTrajectory coupling_error(const JointTrajectory& commanded, const DesyncProfile& desync,
                                      const BeltParams& bp) {
    bp.validate();
    JointTrajectory actual;
    actual.reserve(commanded.size());
    for (const auto& sample : commanded) {
        auto m = joints_to_motors(sample.q, bp);
        const double lag = desync.lag ? desync.lag(sample.t) : 0.0;
        if (lag == 0.0) {
            actual.push_back(sample);
            continue;
        }
        m.theta_b += lag;
        // Only the differential pair is perturbed; x and the wrist pass through untouched.
        const auto mapped = motors_to_joints(m, bp);
        Vector6d v = sample.q.vector();
        v[Y] = mapped.y();
        v[Z] = mapped.z();
        actual.push_back({sample.t, JointStated(v)});
    }
    return actual;
}

}  // namespace gantry
