#pragma once

#include "gantry/kinematics.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace gantry {

struct TraceRecord {
    double t = 0.0;
    JointStated desired;
    Posed actual;  // tip pose including rail deflection
    JointStated carriage;
    Eigen::Vector3d carriage_accel = Eigen::Vector3d::Zero();
};

/// Uniformly sampled desired/actual series produced by one simulation run.
struct SimTrace {
    double sample_rate = 250.0;
    /// Completion time of the commanded motion; NaN when unknown (external traces).
    double motion_end = std::numeric_limits<double>::quiet_NaN();
    std::vector<TraceRecord> records;

    /// Actual tip as a JointState-shaped vector (position, ZYX angles).
    static Vector6d actual_vector(const TraceRecord& r);
};

inline constexpr const char* kTraceCsvHeader =
    "t,des_x,des_y,des_z,des_roll,des_pitch,des_yaw,act_x,act_y,act_z,act_roll,act_pitch,act_yaw";

/// Writes the trace CSV: fixed header, 9 significant digits, '\n' line endings.
void write_trace_csv(std::ostream& out, const SimTrace& trace);
void write_trace_csv(const std::string& path, const SimTrace& trace);

/// Reads a trace CSV. The carriage is set equal to the desired state and the
/// sample rate is inferred from the first interval.
SimTrace read_trace_csv(std::istream& in);
SimTrace read_trace_csv(const std::string& path);

}  // namespace gantry
