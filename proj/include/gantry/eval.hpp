#pragma once

#include "gantry/kinematics.hpp"
#include "gantry/trace.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace gantry {

/// Time-ordered multichannel samples; one row of `values` per time stamp.
struct Series {
    std::vector<double> t;
    Eigen::MatrixXd values;
};

/// Desired and measured channels on the measured time stamps.
struct PairedSeries {
    std::vector<double> t;
    Eigen::MatrixXd desired;
    Eigen::MatrixXd measured;
};

/// Linearly interpolates `desired` onto the measured time stamps, dropping
/// measured samples outside the desired span. Throws NoOverlap.
PairedSeries align(const Series& desired, const Series& measured);

/// How a paired sample turns into a scalar error.
struct ErrorMetric {
    enum class Kind { Axis, Euclidean };
    Kind kind = Kind::Axis;
    std::vector<int> columns{0};
    double unit_scale = 1000.0;  // m -> mm
    bool angular = false;        // wrap differences into (-pi, pi]
    bool absolute_std = false;   // std of |e| instead of signed e
    std::string unit = "mm";

    static ErrorMetric axis(Axis a) {
        ErrorMetric m;
        m.columns = {a};
        if (!is_linear(a)) {
            m.unit_scale = 1.0;
            m.angular = true;
            m.unit = "rad";
        }
        return m;
    }
    static ErrorMetric position3d() {
        ErrorMetric m;
        m.kind = Kind::Euclidean;
        m.columns = {X, Y, Z};
        return m;
    }
};

struct ErrorStats {
    double std_dev = 0.0;
    double mean_error = 0.0;
    double static_error = 0.0;
    double motion_end = 0.0;
};

/// Signed per-sample error (measured - desired), scaled. Euclidean metrics
/// yield the non-negative norm.
std::vector<double> sample_errors(const PairedSeries& paired, const ErrorMetric& metric);

/// In-motion (t < motion_end) mean |e| and std of e, and the mean |e| at rest
/// (t >= motion_end). Throws EmptyWindow if either window has no samples.
ErrorStats error_stats(const PairedSeries& paired, double motion_end, const ErrorMetric& metric);

struct SpeedRecord {
    std::string axis;
    double commanded = 0.0;
    double achieved = 0.0;
    int percent_error = 0;
};

/// round(100 (commanded - achieved) / commanded), half away from zero.
SpeedRecord speed_error(const std::string& axis, double commanded, double achieved);

/// Peak |v| of the actual signal: central differences, then a 5-sample median filter.
double achieved_speed(const SimTrace& trace, Axis axis);
double achieved_speed(const std::vector<double>& t, const std::vector<double>& x);

/// Fallback when the command completion time is unknown: the time from which
/// every desired axis speed stays below 1 mm/s (or 1 mrad/s) for at least 0.5 s.
double infer_motion_end(const SimTrace& trace);

Series desired_series(const SimTrace& trace);
Series actual_series(const SimTrace& trace);

struct RunInput {
    std::string name;
    SimTrace trace;
    ErrorMetric metric;
};

struct ErrorRow {
    std::string name;
    std::string unit;
    ErrorStats stats;
};

struct Report {
    std::vector<ErrorRow> rows;
    std::vector<SpeedRecord> speeds;
};

/// error_stats over the concatenated samples of several runs, each split at
/// its own motion end. The reported motion_end is the latest of them.
ErrorStats pooled_error_stats(const std::vector<RunInput>& runs, const ErrorMetric& metric);

Report summarize(const std::vector<RunInput>& runs, const std::vector<SpeedRecord>& speeds = {});

std::string report_json(const Report& report);
std::string report_text(const Report& report);

}  // namespace gantry
