#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

namespace gantry {

template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;
using Vector6d = Vector6<double>;
using Matrix6d = Matrix6<double>;

/// Joint ordering used everywhere a 6-vector of axes appears.
enum Axis : int { X = 0, Y = 1, Z = 2, Roll = 3, Pitch = 4, Yaw = 5 };

inline constexpr std::array<std::string_view, 6> kAxisNames = {"x", "y", "z", "roll", "pitch", "yaw"};

inline constexpr bool is_linear(Axis axis) noexcept { return axis <= Z; }

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
    using std::remainder;
    constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar wrapped = remainder(angle, two_pi);
    if (wrapped <= -std::numbers::pi_v<Scalar>) wrapped += two_pi;
    return wrapped;
}

/// Configuration-space point of the gantry: three carriage positions in meters
/// followed by the wrist roll, pitch and yaw in radians. Wrist angles are kept
/// wrapped to (-pi, pi] so that equal orientations compare equal.
template <typename Scalar>
class JointState {
public:
    JointState() : values_(Vector6<Scalar>::Zero()) {}

    JointState(Scalar x, Scalar y, Scalar z, Scalar roll, Scalar pitch, Scalar yaw)
        : values_((Vector6<Scalar>() << x, y, z, roll, pitch, yaw).finished()) {
        normalize();
    }

    explicit JointState(const Vector6<Scalar>& values) : values_(values) { normalize(); }

    static JointState Zero() { return JointState(); }

    Scalar x() const { return values_[X]; }
    Scalar y() const { return values_[Y]; }
    Scalar z() const { return values_[Z]; }
    Scalar roll() const { return values_[Roll]; }
    Scalar pitch() const { return values_[Pitch]; }
    Scalar yaw() const { return values_[Yaw]; }

    Scalar operator[](int axis) const { return values_[axis]; }

    const Vector6<Scalar>& vector() const { return values_; }
    Eigen::Matrix<Scalar, 3, 1> position() const { return values_.template head<3>(); }
    Eigen::Matrix<Scalar, 3, 1> wrist() const { return values_.template tail<3>(); }

    friend bool operator==(const JointState& a, const JointState& b) { return a.values_ == b.values_; }

private:
    void normalize() {
        for (int i = Roll; i <= Yaw; ++i) values_[i] = wrap_angle(values_[i]);
    }

    Vector6<Scalar> values_;
};

using JointStated = JointState<double>;

/// End-effector pose. The orientation is stored as a rotation matrix and
/// serialized as a unit quaternion.
template <typename Scalar>
struct Pose {
    Eigen::Matrix<Scalar, 3, 1> position = Eigen::Matrix<Scalar, 3, 1>::Zero();
    Eigen::Matrix<Scalar, 3, 3> orientation = Eigen::Matrix<Scalar, 3, 3>::Identity();

    /// Quaternion with non-negative w, so serialization is unique.
    Eigen::Quaternion<Scalar> quaternion() const {
        Eigen::Quaternion<Scalar> q(orientation);
        q.normalize();
        if (q.w() < Scalar(0)) q.coeffs() = -q.coeffs();
        return q;
    }

    static Pose from_quaternion(const Eigen::Matrix<Scalar, 3, 1>& p, const Eigen::Quaternion<Scalar>& q) {
        return Pose{p, q.normalized().toRotationMatrix()};
    }
};

using Posed = Pose<double>;

/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rotation_zyx(Scalar roll, Scalar pitch, Scalar yaw) {
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
    using AngleAxis = Eigen::AngleAxis<Scalar>;
    return (AngleAxis(yaw, Vec3::UnitZ()) * AngleAxis(pitch, Vec3::UnitY()) * AngleAxis(roll, Vec3::UnitX()))
        .toRotationMatrix();
}

template <typename Scalar>
Pose<Scalar> forward_kinematics(const JointState<Scalar>& q) {
    return Pose<Scalar>{q.position(), rotation_zyx(q.roll(), q.pitch(), q.yaw())};
}

template <typename Scalar>
struct InverseKinematicsResult {
    JointState<Scalar> q;
    /// Set when |pitch| is within tolerance of pi/2; yaw is then pinned to 0
    /// and roll carries the remaining rotation about the aligned axes.
    bool gimbal_lock = false;
};

inline constexpr double kGimbalLockTolerance = 1e-9;

template <typename Scalar>
InverseKinematicsResult<Scalar> inverse_kinematics(const Pose<Scalar>& pose) {
    using std::atan2;
    using std::hypot;
    const auto& R = pose.orientation;
    const Scalar cos_pitch = hypot(R(0, 0), R(1, 0));
    InverseKinematicsResult<Scalar> out;
    if (cos_pitch < Scalar(kGimbalLockTolerance)) {
        constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / Scalar(2);
        const Scalar pitch = R(2, 0) < Scalar(0) ? half_pi : -half_pi;
        // With yaw = 0: pitch = +pi/2 leaves R(0,1) = sin(roll), R(1,1) = cos(roll);
        // pitch = -pi/2 leaves R(0,1) = -sin(roll).
        const Scalar roll = pitch > Scalar(0) ? atan2(R(0, 1), R(1, 1)) : atan2(-R(0, 1), R(1, 1));
        out.q = JointState<Scalar>(pose.position.x(), pose.position.y(), pose.position.z(), roll, pitch, Scalar(0));
        out.gimbal_lock = true;
        return out;
    }
    const Scalar pitch = atan2(-R(2, 0), cos_pitch);
    const Scalar roll = atan2(R(2, 1), R(2, 2));
    const Scalar yaw = atan2(R(1, 0), R(0, 0));
    out.q = JointState<Scalar>(pose.position.x(), pose.position.y(), pose.position.z(), roll, pitch, yaw);
    return out;
}

/// Maps ZYX Euler rates (roll, pitch, yaw) to world-frame angular velocity.
/// det = cos(pitch).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> euler_rate_matrix(Scalar pitch, Scalar yaw) {
    using std::cos;
    using std::sin;
    const Scalar cp = cos(pitch), sp = sin(pitch), cy = cos(yaw), sy = sin(yaw);
    Eigen::Matrix<Scalar, 3, 3> W;
    W << cy * cp, -sy, Scalar(0),
         sy * cp,  cy, Scalar(0),
         -sp, Scalar(0), Scalar(1);
    return W;
}

/// Geometric Jacobian: rows are (linear velocity, angular velocity), columns
/// are the joint rates in JointState order.
template <typename Scalar>
Matrix6<Scalar> jacobian(const JointState<Scalar>& q) {
    Matrix6<Scalar> J = Matrix6<Scalar>::Zero();
    J.template topLeftCorner<3, 3>().setIdentity();
    J.template bottomRightCorner<3, 3>() = euler_rate_matrix(q.pitch(), q.yaw());
    return J;
}

/// Twist-like difference `to ⊖ from`: position delta and the world-frame
/// rotation vector of to.R * from.R^T.
template <typename Scalar>
Vector6<Scalar> pose_difference(const Pose<Scalar>& from, const Pose<Scalar>& to) {
    Vector6<Scalar> d;
    d.template head<3>() = to.position - from.position;
    const Eigen::AngleAxis<Scalar> aa(Eigen::Matrix<Scalar, 3, 3>(to.orientation * from.orientation.transpose()));
    d.template tail<3>() = aa.angle() * aa.axis();
    return d;
}

struct WorkspaceLimits {
    Eigen::Vector3d lower = Eigen::Vector3d::Zero();
    Eigen::Vector3d upper{1.2, 1.2, 1.0};
    double vmax_linear = 1.0;   // m/s
    double vmax_angular = 1.0;  // rad/s
    double payload = 2.0;       // kg
};

struct WorkspaceViolation {
    Axis axis;
    /// Distance outside the bound, always positive.
    double exceedance;
};

/// Returns every linear axis outside its bound. Empty means in-workspace.
template <typename Scalar>
std::vector<WorkspaceViolation> validate_workspace(const JointState<Scalar>& q, const WorkspaceLimits& limits) {
    std::vector<WorkspaceViolation> out;
    for (int i = X; i <= Z; ++i) {
        const double v = static_cast<double>(q[i]);
        if (v < limits.lower[i]) {
            out.push_back({static_cast<Axis>(i), limits.lower[i] - v});
        } else if (v > limits.upper[i]) {
            out.push_back({static_cast<Axis>(i), v - limits.upper[i]});
        }
    }
    return out;
}

}  // namespace gantry
