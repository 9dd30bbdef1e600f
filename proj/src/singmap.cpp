#include "gantry/singmap.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <thread>

namespace gantry {

double manipulability(const Eigen::MatrixXd& J) {
    if (J.rows() == 0) return 0.0;
    if (J.rows() > J.cols()) return 0.0;
    // J J^T = R^T R for J^T = Q R, so sqrt(det) = |prod diag(R)|.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(J.transpose());
    const Eigen::MatrixXd& packed = qr.matrixQR();
    double w = 1.0;
    for (Eigen::Index i = 0; i < J.rows(); ++i) w *= packed(i, i);
    return std::abs(w);
}

double condition_number(const Eigen::MatrixXd& J) {
    if (J.size() == 0) return std::numeric_limits<double>::infinity();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& s = svd.singularValues();
    const Eigen::Index rank_needed = std::min(J.rows(), J.cols());
    if (J.rows() > J.cols()) return std::numeric_limits<double>::infinity();
    const double smax = s[0];
    const double smin = s[rank_needed - 1];
    if (!(smin > smax * 1e-14)) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& J, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), J.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= J.rows())
            throw Error(ErrorCode::DimensionMismatch, "task row " + std::to_string(rows[i]) + " out of range");
        out.row(static_cast<Eigen::Index>(i)) = J.row(rows[i]);
    }
    return out;
}

DhChain cartman_chain(const WorkspaceLimits& workspace) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    DhChain chain;
    chain.name = "cartman";
    // Base z axis along world x for the first prismatic joint.
    chain.base.linear() = Eigen::AngleAxisd(half_pi, Eigen::Vector3d::UnitY()).toRotationMatrix();
    auto prismatic = [](double theta, double alpha, double lo, double hi) {
        return DhLink{0.0, alpha, 0.0, theta, JointKind::Prismatic, lo, hi};
    };
    auto revolute = [](double theta, double alpha) {
        return DhLink{0.0, alpha, 0.0, theta, JointKind::Revolute, -std::numbers::pi, std::numbers::pi};
    };
    chain.links = {
        prismatic(0.0, -half_pi, workspace.lower.x(), workspace.upper.x()),
        prismatic(-half_pi, half_pi, workspace.lower.y(), workspace.upper.y()),
        prismatic(0.0, 0.0, workspace.lower.z(), workspace.upper.z()),
        revolute(0.0, -half_pi),      // yaw about world z
        revolute(-half_pi, -half_pi), // pitch about the yawed y axis
        revolute(0.0, 0.0),           // roll about the tool x axis
    };
    // Tool frame undoes the DH frame orientation at the zero configuration.
    const Pose<double> zero = chain_fk<double>(chain, Eigen::VectorXd::Zero(6));
    chain.tool.linear() = zero.orientation.transpose();
    return chain;
}

Eigen::VectorXd to_cartman_joints(const JointStated& q) {
    Eigen::VectorXd out(6);
    out << q.x(), q.y(), q.z(), q.yaw(), q.pitch(), q.roll();
    return out;
}

std::optional<IkSolution> ik_scan(const DhChain& chain, const Eigen::Vector3d& target,
                                  const std::vector<Eigen::VectorXd>& seeds, const IkOptions& options) {
    if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "ik_scan needs at least one seed");
    const Eigen::Index n = chain.dof();
    const double lambda2 = options.damping * options.damping;

    std::optional<IkSolution> best;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        Eigen::VectorXd q = seeds[s];
        detail::require_dof(chain, q.size());
        double residual = 0.0;
        bool converged = false;
        for (int iter = 0; iter <= options.max_iterations; ++iter) {
            const Eigen::Vector3d err = target - chain_fk<double>(chain, q).position;
            residual = err.norm();
            if (residual < options.tolerance) {
                converged = true;
                break;
            }
            if (iter == options.max_iterations) break;
            const Eigen::Matrix<double, 3, Eigen::Dynamic> Jp = chain_jacobian<double>(chain, q).topRows<3>();
            const Eigen::Matrix3d A = Jp * Jp.transpose() + lambda2 * Eigen::Matrix3d::Identity();
            q += Jp.transpose() * A.ldlt().solve(err);
            for (Eigen::Index i = 0; i < n; ++i)
                q[i] = std::clamp(q[i], chain.links[i].lower, chain.links[i].upper);
        }
        if (!converged) continue;
        const double w = manipulability(select_rows(chain_jacobian<double>(chain, q), options.task_rows));
        if (!best || w > best->manipulability) best = IkSolution{q, w, residual, s};
    }
    return best;
}

namespace {

double radical_inverse(std::size_t index, unsigned base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::vector<Eigen::VectorXd> default_seeds(const DhChain& chain, std::size_t count) {
    const Eigen::Index n = chain.dof();
    if (n > static_cast<Eigen::Index>(std::size(kPrimes)))
        throw Error(ErrorCode::InvalidArgument, "default seeds support at most 16 joints");
    std::vector<Eigen::VectorXd> seeds;
    seeds.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Eigen::VectorXd q(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& link = chain.links[i];
            const double u = k == 0 ? 0.5 : radical_inverse(k, kPrimes[i]);
            q[i] = link.lower + u * (link.upper - link.lower);
        }
        seeds.push_back(std::move(q));
    }
    return seeds;
}

void WorkspaceGrid::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (!(upper[i] > lower[i])) throw Error(ErrorCode::InvalidArgument, "grid extent must be positive");
        if (cells[i] < 1) throw Error(ErrorCode::InvalidArgument, "grid resolution must be >= 1");
    }
}

Eigen::Vector3d WorkspaceGrid::cell_size() const {
    return (upper - lower).cwiseQuotient(Eigen::Vector3d(cells[0], cells[1], cells[2]));
}

Eigen::Vector3d WorkspaceGrid::center(int ix, int iy, int iz) const {
    return lower + (Eigen::Vector3d(ix, iy, iz).array() + 0.5).matrix().cwiseProduct(cell_size());
}

DisconMap build_map(const DhChain& chain, const WorkspaceGrid& grid, const MapOptions& options) {
    chain.validate();
    grid.validate();
    IkOptions ik = options.ik;
    ik.task_rows = options.task_rows;
    const auto seeds = options.seeds.empty() ? default_seeds(chain, options.seed_count) : options.seeds;

    DisconMap map;
    map.grid = grid;
    map.cells.resize(grid.size());

    auto evaluate = [&](std::size_t idx) {
        const int ix = static_cast<int>(idx % grid.cells[0]);
        const int iy = static_cast<int>((idx / grid.cells[0]) % grid.cells[1]);
        const int iz = static_cast<int>(idx / (static_cast<std::size_t>(grid.cells[0]) * grid.cells[1]));
        MapCell cell;
        cell.center = grid.center(ix, iy, iz);
        if (const auto sol = ik_scan(chain, cell.center, seeds, ik)) {
            const Eigen::MatrixXd J = select_rows(chain_jacobian<double>(chain, sol->q), options.task_rows);
            cell.reachable = true;
            cell.manipulability = sol->manipulability;
            cell.condition_number = condition_number(J);
        }
        map.cells[idx] = cell;
    };

    const unsigned threads = std::max(1u, options.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < map.cells.size(); ++i) evaluate(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < map.cells.size(); i += threads) evaluate(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    if (options.threshold) {
        map.threshold = *options.threshold;
    } else {
        std::vector<double> values;
        for (const auto& c : map.cells)
            if (c.reachable) values.push_back(c.manipulability);
        if (!values.empty()) {
            const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
            std::nth_element(values.begin(), mid, values.end());
            double median = *mid;
            if (values.size() % 2 == 0) {
                median = 0.5 * (median + *std::max_element(values.begin(), mid));
            }
            map.threshold = options.relative_threshold * median;
        }
    }

    auto reachable = [&](int ix, int iy, int iz) {
        if (ix < 0 || iy < 0 || iz < 0 || ix >= grid.cells[0] || iy >= grid.cells[1] || iz >= grid.cells[2])
            return true;  // outside the grid is not a transition
        return map.cells[grid.index(ix, iy, iz)].reachable;
    };
    for (int iz = 0; iz < grid.cells[2]; ++iz) {
        for (int iy = 0; iy < grid.cells[1]; ++iy) {
            for (int ix = 0; ix < grid.cells[0]; ++ix) {
                const std::size_t idx = grid.index(ix, iy, iz);
                auto& cell = map.cells[idx];
                if (!cell.reachable) continue;
                const bool transition = !reachable(ix - 1, iy, iz) || !reachable(ix + 1, iy, iz) ||
                                        !reachable(ix, iy - 1, iz) || !reachable(ix, iy + 1, iz) ||
                                        !reachable(ix, iy, iz - 1) || !reachable(ix, iy, iz + 1);
                cell.boundary = transition || cell.manipulability < map.threshold;
                if (cell.boundary) map.boundary.push_back(idx);
            }
        }
    }
    return map;
}

}  // namespace gantry
