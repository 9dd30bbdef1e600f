#pragma once

// Generators and independent reference implementations shared by the tests.
// Oracles here deliberately avoid the library code paths they check.

#include "gantry/error.hpp"
#include "gantry/eval.hpp"
#include "gantry/kinematics.hpp"
#include "gantry/motion.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testing {

inline constexpr double kPi = std::numbers::pi;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }

    /// In-workspace state with |pitch| below pi/2 - margin.
    gantry::JointStated joint_state(double pitch_margin = 0.05) {
        return {uniform(0.0, 1.2),
                uniform(0.0, 1.2),
                uniform(0.0, 1.0),
                uniform(-kPi + 1e-9, kPi),
                uniform(-kPi / 2 + pitch_margin, kPi / 2 - pitch_margin),
                uniform(-kPi + 1e-9, kPi)};
    }

    gantry::AxisLimits limits() { return {uniform(0.05, 3.0), uniform(0.05, 5.0)}; }

    Eigen::MatrixXd matrix(int rows, int cols) {
        Eigen::MatrixXd m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = uniform(-1.0, 1.0);
        return m;
    }

private:
    std::mt19937_64 rng_;
};

/// Homogeneous transform built from scratch, one elementary motion at a time.
inline Eigen::Matrix4d translate(double x, double y, double z) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T(0, 3) = x;
    T(1, 3) = y;
    T(2, 3) = z;
    return T;
}

inline Eigen::Matrix4d rot_x(double a) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T(1, 1) = std::cos(a);
    T(1, 2) = -std::sin(a);
    T(2, 1) = std::sin(a);
    T(2, 2) = std::cos(a);
    return T;
}

inline Eigen::Matrix4d rot_y(double a) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T(0, 0) = std::cos(a);
    T(0, 2) = std::sin(a);
    T(2, 0) = -std::sin(a);
    T(2, 2) = std::cos(a);
    return T;
}

inline Eigen::Matrix4d rot_z(double a) {
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T(0, 0) = std::cos(a);
    T(0, 1) = -std::sin(a);
    T(1, 0) = std::sin(a);
    T(1, 1) = std::cos(a);
    return T;
}

/// Gantry FK as a chain of six elementary transforms.
inline Eigen::Matrix4d gantry_fk_oracle(const gantry::JointStated& q) {
    return translate(q.x(), 0, 0) * translate(0, q.y(), 0) * translate(0, 0, q.z()) * rot_z(q.yaw()) *
           rot_y(q.pitch()) * rot_x(q.roll());
}

/// Position of a profile obtained by explicit Euler integration of its
/// piecewise-constant acceleration schedule. Steps are shrunk so each phase
/// boundary lands on a step; otherwise the velocity picks up an O(a dt) error
/// that a long cruise turns into a large position error.
inline double euler_profile_position(const gantry::MotionProfile& p, double t_end, double dt = 1e-5) {
    const double dir = p.distance < 0.0 ? -1.0 : 1.0;
    const double bounds[4] = {0.0, p.t_accel, p.t_accel + p.t_cruise, p.duration()};
    const double accel[3] = {dir * p.accel, 0.0, -dir * p.accel};
    double x = p.start, v = 0.0;
    for (int phase = 0; phase < 3; ++phase) {
        const double lo = bounds[phase], hi = std::min(bounds[phase + 1], t_end);
        if (hi <= lo) continue;
        const auto steps = static_cast<long>(std::ceil((hi - lo) / dt));
        const double h = (hi - lo) / static_cast<double>(steps);
        for (long i = 0; i < steps; ++i) {
            x += v * h;
            v += accel[phase] * h;
        }
    }
    return x;
}

inline double svd_manipulability(const Eigen::MatrixXd& J) {
    if (J.rows() > J.cols()) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    double w = 1.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) w *= svd.singularValues()[i];
    return w;
}

/// Straight loops over raw arrays: mean |e|, population std of signed e, rest mean |e|.
struct BruteStats {
    double mean = 0.0, std_dev = 0.0, rest = 0.0;
};

inline BruteStats brute_stats(const std::vector<double>& t, const std::vector<double>& desired,
                              const std::vector<double>& measured, double motion_end, double scale) {
    double s = 0.0, sa = 0.0, rest = 0.0;
    int n = 0, nr = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double e = (measured[i] - desired[i]) * scale;
        if (t[i] < motion_end) {
            s += e;
            sa += std::fabs(e);
            ++n;
        } else {
            rest += std::fabs(e);
            ++nr;
        }
    }
    const double mu = s / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= motion_end) continue;
        const double e = (measured[i] - desired[i]) * scale;
        ss += (e - mu) * (e - mu);
    }
    return {sa / n, std::sqrt(ss / n), rest / nr};
}

}  // namespace testing
