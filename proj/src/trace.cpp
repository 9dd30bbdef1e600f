#include "gantry/trace.hpp"

#include "gantry/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace gantry {

Vector6d SimTrace::actual_vector(const TraceRecord& r) {
    const auto ik = inverse_kinematics(r.actual);
    return ik.q.vector();
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
    out << kTraceCsvHeader << '\n';
    fmt::memory_buffer buf;
    for (const auto& r : trace.records) {
        buf.clear();
        fmt::format_to(std::back_inserter(buf), "{:.9g}", r.t);
        const Vector6d& des = r.desired.vector();
        const Vector6d act = SimTrace::actual_vector(r);
        for (int i = 0; i < 6; ++i) fmt::format_to(std::back_inserter(buf), ",{:.9g}", des[i]);
        for (int i = 0; i < 6; ++i) fmt::format_to(std::back_inserter(buf), ",{:.9g}", act[i]);
        buf.push_back('\n');
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    write_trace_csv(out, trace);
    if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

SimTrace read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty trace file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader) throw Error(ErrorCode::Io, "unexpected trace header: " + line);

    SimTrace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double values[13];
        int n = 0;
        while (std::getline(row, cell, ',')) {
            if (n == 13) throw Error(ErrorCode::Io, fmt::format("line {}: too many columns", line_no));
            try {
                values[n++] = std::stod(cell);
            } catch (const std::exception&) {
                throw Error(ErrorCode::Io, fmt::format("line {}: bad number '{}'", line_no, cell));
            }
        }
        if (n != 13) throw Error(ErrorCode::Io, fmt::format("line {}: expected 13 columns", line_no));
        TraceRecord r;
        r.t = values[0];
        r.desired = JointStated(Vector6d(Eigen::Map<const Vector6d>(values + 1)));
        const JointStated act(Vector6d(Eigen::Map<const Vector6d>(values + 7)));
        r.actual = forward_kinematics(act);
        r.carriage = r.desired;
        trace.records.push_back(r);
    }
    if (trace.records.size() >= 2) {
        const double dt = trace.records[1].t - trace.records[0].t;
        if (dt > 0.0) trace.sample_rate = 1.0 / dt;
    }
    return trace;
}

SimTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return read_trace_csv(in);
}

}  // namespace gantry
