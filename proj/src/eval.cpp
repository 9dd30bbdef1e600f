#include "gantry/eval.hpp"

#include "gantry/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace gantry {

PairedSeries align(const Series& desired, const Series& measured) {
    if (desired.t.empty() || measured.t.empty()) throw Error(ErrorCode::NoOverlap, "empty series");
    if (static_cast<Eigen::Index>(desired.t.size()) != desired.values.rows() ||
        static_cast<Eigen::Index>(measured.t.size()) != measured.values.rows())
        throw Error(ErrorCode::DimensionMismatch, "series time and value lengths differ");
    if (desired.values.cols() != measured.values.cols())
        throw Error(ErrorCode::DimensionMismatch, "series channel counts differ");

    const double lo = desired.t.front();
    const double hi = desired.t.back();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < measured.t.size(); ++i)
        if (measured.t[i] >= lo && measured.t[i] <= hi) keep.push_back(i);
    if (keep.empty()) throw Error(ErrorCode::NoOverlap, "desired and measured series do not overlap");

    PairedSeries out;
    const auto cols = desired.values.cols();
    out.t.reserve(keep.size());
    out.desired.resize(static_cast<Eigen::Index>(keep.size()), cols);
    out.measured.resize(static_cast<Eigen::Index>(keep.size()), cols);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        const double t = measured.t[keep[k]];
        out.t.push_back(t);
        out.measured.row(row) = measured.values.row(static_cast<Eigen::Index>(keep[k]));
        // First desired stamp strictly greater than t.
        const auto it = std::upper_bound(desired.t.begin(), desired.t.end(), t);
        if (it == desired.t.end()) {
            out.desired.row(row) = desired.values.row(desired.values.rows() - 1);
            continue;
        }
        const auto j1 = static_cast<Eigen::Index>(it - desired.t.begin());
        const Eigen::Index j0 = j1 - 1;
        const double t0 = desired.t[j0], t1 = desired.t[j1];
        const double u = (t - t0) / (t1 - t0);
        out.desired.row(row) = (1.0 - u) * desired.values.row(j0) + u * desired.values.row(j1);
    }
    return out;
}

std::vector<double> sample_errors(const PairedSeries& paired, const ErrorMetric& metric) {
    for (int c : metric.columns) {
        if (c < 0 || c >= paired.desired.cols() || c >= paired.measured.cols())
            throw Error(ErrorCode::DimensionMismatch, fmt::format("metric column {} outside the series", c));
    }
    if (metric.columns.empty()) throw Error(ErrorCode::InvalidArgument, "metric has no columns");
    std::vector<double> e(paired.t.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        if (metric.kind == ErrorMetric::Kind::Euclidean) {
            double sq = 0.0;
            for (int c : metric.columns) {
                const double d = paired.measured(row, c) - paired.desired(row, c);
                sq += d * d;
            }
            e[i] = std::sqrt(sq) * metric.unit_scale;
        } else {
            const int c = metric.columns.front();
            double d = paired.measured(row, c) - paired.desired(row, c);
            if (metric.angular) d = wrap_angle(d);
            e[i] = d * metric.unit_scale;
        }
    }
    return e;
}

namespace {

// Accumulates in-motion and at-rest errors across one or more runs.
struct StatsAccumulator {
    explicit StatsAccumulator(const ErrorMetric& m) : metric(m) {}

    const ErrorMetric& metric;
    std::vector<double> motion;  // signed (or absolute) in-motion errors
    double abs_sum = 0.0;
    double static_sum = 0.0;
    std::size_t n_static = 0;

    void add(const PairedSeries& paired, double motion_end) {
        const auto e = sample_errors(paired, metric);
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (paired.t[i] < motion_end) {
                motion.push_back(metric.absolute_std ? std::abs(e[i]) : e[i]);
                abs_sum += std::abs(e[i]);
            } else {
                static_sum += std::abs(e[i]);
                ++n_static;
            }
        }
    }

    ErrorStats finish(double motion_end) const {
        if (motion.empty()) throw Error(ErrorCode::EmptyWindow, "no samples before motion end");
        if (n_static == 0) throw Error(ErrorCode::EmptyWindow, "no samples after motion end");
        const auto n = static_cast<double>(motion.size());
        double sum = 0.0;
        for (double v : motion) sum += v;
        const double mean = sum / n;
        double var = 0.0;
        for (double v : motion) var += (v - mean) * (v - mean);
        ErrorStats s;
        s.mean_error = abs_sum / n;
        s.std_dev = std::sqrt(var / n);
        s.static_error = static_sum / static_cast<double>(n_static);
        s.motion_end = motion_end;
        return s;
    }
};

double motion_end_of(const SimTrace& trace) {
    return std::isnan(trace.motion_end) ? infer_motion_end(trace) : trace.motion_end;
}

}  // namespace

ErrorStats error_stats(const PairedSeries& paired, double motion_end, const ErrorMetric& metric) {
    StatsAccumulator acc(metric);
    acc.add(paired, motion_end);
    return acc.finish(motion_end);
}

ErrorStats pooled_error_stats(const std::vector<RunInput>& runs, const ErrorMetric& metric) {
    StatsAccumulator acc(metric);
    double longest = 0.0;
    for (const auto& run : runs) {
        const double motion_end = motion_end_of(run.trace);
        acc.add(align(desired_series(run.trace), actual_series(run.trace)), motion_end);
        longest = std::max(longest, motion_end);
    }
    return acc.finish(longest);
}

SpeedRecord speed_error(const std::string& axis, double commanded, double achieved) {
    if (!(commanded > 0.0)) throw Error(ErrorCode::InvalidArgument, "commanded speed must be > 0");
    // std::lround rounds halves away from zero.
    const long pct = std::lround(100.0 * (commanded - achieved) / commanded);
    return {axis, commanded, achieved, static_cast<int>(pct)};
}

double achieved_speed(const std::vector<double>& t, const std::vector<double>& x) {
    if (t.size() != x.size()) throw Error(ErrorCode::DimensionMismatch, "time and value lengths differ");
    const std::size_t n = t.size();
    if (n < 2) throw Error(ErrorCode::TooShort, "need at least two samples");
    std::vector<double> v(n);
    v[0] = (x[1] - x[0]) / (t[1] - t[0]);
    v[n - 1] = (x[n - 1] - x[n - 2]) / (t[n - 1] - t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (x[i + 1] - x[i - 1]) / (t[i + 1] - t[i - 1]);

    double peak = 0.0;
    std::vector<double> window;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i < 2 ? 0 : i - 2;
        const std::size_t hi = std::min(n, i + 3);
        window.assign(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi));
        const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        peak = std::max(peak, std::abs(*mid));
    }
    return peak;
}

double achieved_speed(const SimTrace& trace, Axis axis) {
    if (trace.records.size() < 2) throw Error(ErrorCode::TooShort, "need at least two samples");
    std::vector<double> t, x;
    t.reserve(trace.records.size());
    x.reserve(trace.records.size());
    double unwrap = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        const double value = SimTrace::actual_vector(r)[axis];
        if (!is_linear(axis)) {
            // Keep angles continuous across the +-pi seam.
            if (i > 0) unwrap += wrap_angle(value - prev);
            else unwrap = value;
            prev = value;
            x.push_back(unwrap);
        } else {
            x.push_back(value);
        }
        t.push_back(r.t);
    }
    return achieved_speed(t, x);
}

double infer_motion_end(const SimTrace& trace) {
    const auto& rec = trace.records;
    if (rec.size() < 2) throw Error(ErrorCode::TooShort, "need at least two samples");
    constexpr double kStill = 1e-3;
    std::size_t last_moving = 0;
    bool moved = false;
    for (std::size_t i = 1; i < rec.size(); ++i) {
        const double dt = rec[i].t - rec[i - 1].t;
        Vector6d d = rec[i].desired.vector() - rec[i - 1].desired.vector();
        for (int a = Roll; a <= Yaw; ++a) d[a] = wrap_angle(d[a]);
        if ((d.cwiseAbs() / dt).maxCoeff() >= kStill) {
            last_moving = i;
            moved = true;
        }
    }
    const double end = moved ? rec[last_moving].t : rec.front().t;
    if (rec.back().t - end < 0.5)
        throw Error(ErrorCode::EmptyWindow, "trace never rests for 0.5 s after motion");
    return end;
}

Series desired_series(const SimTrace& trace) {
    Series s;
    s.values.resize(static_cast<Eigen::Index>(trace.records.size()), 6);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        s.t.push_back(trace.records[i].t);
        s.values.row(static_cast<Eigen::Index>(i)) = trace.records[i].desired.vector().transpose();
    }
    return s;
}

Series actual_series(const SimTrace& trace) {
    Series s;
    s.values.resize(static_cast<Eigen::Index>(trace.records.size()), 6);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        s.t.push_back(trace.records[i].t);
        s.values.row(static_cast<Eigen::Index>(i)) = SimTrace::actual_vector(trace.records[i]).transpose();
    }
    return s;
}

Report summarize(const std::vector<RunInput>& runs, const std::vector<SpeedRecord>& speeds) {
    Report report;
    for (const auto& run : runs) {
        const double motion_end = motion_end_of(run.trace);
        const auto paired = align(desired_series(run.trace), actual_series(run.trace));
        report.rows.push_back({run.name, run.metric.unit, error_stats(paired, motion_end, run.metric)});
    }
    report.speeds = speeds;
    return report;
}

std::string report_json(const Report& report) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["errors"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        doc["errors"].push_back({{"name", row.name},
                                 {"unit", row.unit},
                                 {"std_dev", row.stats.std_dev},
                                 {"mean_error", row.stats.mean_error},
                                 {"static_error", row.stats.static_error},
                                 {"motion_end", row.stats.motion_end}});
    }
    doc["speeds"] = nlohmann::ordered_json::array();
    for (const auto& s : report.speeds) {
        doc["speeds"].push_back({{"axis", s.axis},
                                 {"commanded", s.commanded},
                                 {"achieved", s.achieved},
                                 {"percent_error", s.percent_error}});
    }
    return doc.dump(2) + "\n";
}

std::string report_text(const Report& report) {
    std::string out;
    out += fmt::format("{:<20} {:>14} {:>14} {:>14}  {}\n", "run", "std_dev", "mean_error", "static_error", "unit");
    for (const auto& row : report.rows) {
        out += fmt::format("{:<20} {:>14.6g} {:>14.6g} {:>14.6g}  {}\n", row.name, row.stats.std_dev,
                           row.stats.mean_error, row.stats.static_error, row.unit);
    }
    if (!report.speeds.empty()) {
        out += "\n";
        out += fmt::format("{:<12} {:>10} {:>10} {:>8}\n", "axis", "commanded", "achieved", "% error");
        for (const auto& s : report.speeds) {
            out += fmt::format("{:<12} {:>10.3f} {:>10.3f} {:>7}%\n", s.axis, s.commanded, s.achieved,
                               s.percent_error);
        }
    }
    return out;
}

}  // namespace gantry
