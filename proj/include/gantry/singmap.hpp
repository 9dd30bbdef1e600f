#pragma once

#include "gantry/error.hpp"
#include "gantry/kinematics.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace gantry {

enum class JointKind { Revolute, Prismatic };

/// Standard DH link: T = Rz(theta) * Tz(d) * Tx(a) * Rx(alpha), with the joint
/// variable added to theta (revolute) or d (prismatic).
struct DhLink {
    double a = 0.0;
    double alpha = 0.0;
    double d = 0.0;
    double theta_offset = 0.0;
    JointKind kind = JointKind::Revolute;
    double lower = -std::numbers::pi;
    double upper = std::numbers::pi;
};

struct DhChain {
    std::string name;
    std::vector<DhLink> links;
    Eigen::Isometry3d base = Eigen::Isometry3d::Identity();
    Eigen::Isometry3d tool = Eigen::Isometry3d::Identity();

    Eigen::Index dof() const { return static_cast<Eigen::Index>(links.size()); }

    void validate() const {
        if (links.empty()) throw Error(ErrorCode::InvalidArgument, "chain needs at least one link");
        for (std::size_t i = 0; i < links.size(); ++i) {
            if (!(links[i].lower <= links[i].upper))
                throw Error(ErrorCode::InvalidArgument, "link " + std::to_string(i) + ": lower > upper");
        }
    }
};

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix6X = Eigen::Matrix<Scalar, 6, Eigen::Dynamic>;

template <typename Scalar>
Eigen::Transform<Scalar, 3, Eigen::Isometry> dh_transform(const DhLink& link, Scalar q) {
    using std::cos;
    using std::sin;
    const Scalar theta = Scalar(link.theta_offset) + (link.kind == JointKind::Revolute ? q : Scalar(0));
    const Scalar d = Scalar(link.d) + (link.kind == JointKind::Prismatic ? q : Scalar(0));
    const Scalar ct = cos(theta), st = sin(theta);
    const Scalar ca = cos(Scalar(link.alpha)), sa = sin(Scalar(link.alpha));
    Eigen::Transform<Scalar, 3, Eigen::Isometry> T;
    T.matrix() << ct, -st * ca, st * sa, Scalar(link.a) * ct,
                  st, ct * ca, -ct * sa, Scalar(link.a) * st,
                  Scalar(0), sa, ca, d,
                  Scalar(0), Scalar(0), Scalar(0), Scalar(1);
    return T;
}

namespace detail {

inline void require_dof(const DhChain& chain, Eigen::Index n) {
    if (n != chain.dof())
        throw Error(ErrorCode::DimensionMismatch, "joint vector has " + std::to_string(n) + " entries, chain has " +
                                                      std::to_string(chain.dof()) + " links");
}

}  // namespace detail

template <typename Scalar>
Pose<Scalar> chain_fk(const DhChain& chain, const VectorX<Scalar>& q) {
    detail::require_dof(chain, q.size());
    Eigen::Transform<Scalar, 3, Eigen::Isometry> T = chain.base.cast<Scalar>();
    for (Eigen::Index i = 0; i < q.size(); ++i) T = T * dh_transform(chain.links[i], q[i]);
    T = T * chain.tool.cast<Scalar>();
    return Pose<Scalar>{T.translation(), T.linear()};
}

/// Geometric Jacobian at the tool point: rows (linear, angular) velocity in the
/// base frame of the chain's world.
template <typename Scalar>
Matrix6X<Scalar> chain_jacobian(const DhChain& chain, const VectorX<Scalar>& q) {
    detail::require_dof(chain, q.size());
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
    const Eigen::Index n = q.size();
    std::vector<Eigen::Transform<Scalar, 3, Eigen::Isometry>> frames;
    frames.reserve(n + 1);
    frames.push_back(chain.base.cast<Scalar>());
    for (Eigen::Index i = 0; i < n; ++i) frames.push_back(frames.back() * dh_transform(chain.links[i], q[i]));
    const Vec3 tip = (frames.back() * chain.tool.cast<Scalar>()).translation();

    Matrix6X<Scalar> J(6, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 axis = frames[i].linear().col(2);
        if (chain.links[i].kind == JointKind::Prismatic) {
            J.col(i) << axis, Vec3::Zero();
        } else {
            J.col(i) << axis.cross(tip - frames[i].translation()), axis;
        }
    }
    return J;
}

/// sqrt(det(J J^T)); zero when J has more rows than columns or loses rank.
double manipulability(const Eigen::MatrixXd& J);

/// Ratio of extreme singular values; +inf at a singularity.
double condition_number(const Eigen::MatrixXd& J);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& J, const std::vector<int>& rows);

/// The gantry as a DH chain. Joint order is x, y, z, yaw, pitch, roll so the
/// wrist composes as Rz * Ry * Rx; see to_cartman_joints().
DhChain cartman_chain(const WorkspaceLimits& workspace = {});
Eigen::VectorXd to_cartman_joints(const JointStated& q);

struct IkOptions {
    double damping = 0.01;
    int max_iterations = 200;
    double tolerance = 1e-6;  // m
    /// Rows of the Jacobian used for the manipulability score.
    std::vector<int> task_rows{0, 1, 2};
};

struct IkSolution {
    Eigen::VectorXd q;
    double manipulability = 0.0;
    double residual = 0.0;
    std::size_t seed_index = 0;
};

/// Damped-least-squares position IK from each seed; returns the converged
/// solution with the highest manipulability, or nullopt if none converges.
std::optional<IkSolution> ik_scan(const DhChain& chain, const Eigen::Vector3d& target,
                                  const std::vector<Eigen::VectorXd>& seeds, const IkOptions& options = {});

/// Deterministic seeds: the joint-limit midpoint, then a Halton sequence over the limits.
std::vector<Eigen::VectorXd> default_seeds(const DhChain& chain, std::size_t count);

struct WorkspaceGrid {
    Eigen::Vector3d lower = Eigen::Vector3d::Zero();
    Eigen::Vector3d upper{1.2, 1.2, 1.0};
    std::array<int, 3> cells{50, 50, 20};

    void validate() const;
    std::size_t size() const { return static_cast<std::size_t>(cells[0]) * cells[1] * cells[2]; }
    Eigen::Vector3d cell_size() const;
    /// x varies fastest, then y, then z.
    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) + static_cast<std::size_t>(cells[0]) * (iy + static_cast<std::size_t>(cells[1]) * iz);
    }
    Eigen::Vector3d center(int ix, int iy, int iz) const;
};

struct MapCell {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double manipulability = 0.0;
    double condition_number = std::numeric_limits<double>::infinity();
    bool reachable = false;
    bool boundary = false;
};

struct DisconMap {
    WorkspaceGrid grid;
    double threshold = 0.0;
    std::vector<MapCell> cells;
    std::vector<std::size_t> boundary;  // ascending cell indices
};

struct MapOptions {
    /// Absolute manipulability threshold; when unset, relative_threshold times
    /// the median manipulability over reachable cells.
    std::optional<double> threshold;
    double relative_threshold = 0.01;
    std::vector<int> task_rows{0, 1, 2};
    IkOptions ik;
    std::vector<Eigen::VectorXd> seeds;  // empty: default_seeds(chain, seed_count)
    std::size_t seed_count = 8;
    unsigned threads = 1;
};

DisconMap build_map(const DhChain& chain, const WorkspaceGrid& grid, const MapOptions& options = {});

}  // namespace gantry
