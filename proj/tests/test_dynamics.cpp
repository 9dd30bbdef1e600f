#include "support.hpp"

#include "gantry/dynamics.hpp"
#include "gantry/trace.hpp"

#include <doctest.h>

#include <sstream>

using namespace gantry;

namespace {

SimOptions hold(double seconds) {
    SimOptions o;
    o.hold_time = seconds;
    return o;
}

PlantParams undamped() {
    PlantParams p;
    p.damping_ratio = 0.0;
    return p;
}

// Mean period from linearly interpolated upward zero crossings of d(t).
double crossing_frequency(const std::vector<double>& t, const std::vector<double>& d) {
    std::vector<double> up;
    for (std::size_t i = 1; i < d.size(); ++i)
        if (d[i - 1] < 0.0 && d[i] >= 0.0) up.push_back(t[i - 1] + (t[i] - t[i - 1]) * (-d[i - 1]) / (d[i] - d[i - 1]));
    REQUIRE(up.size() >= 3);
    return static_cast<double>(up.size() - 1) / (up.back() - up.front());
}

double free_frequency(const PlantParams& params, double z, double mass) {
    PlantParams p = params;
    p.tip_mass = mass;
    PlantState s;
    s.carriage = JointStated(0.6, 0.6, z, 0, 0, 0);
    s.deflection = {0.002, 0.0};
    std::vector<double> t, d;
    for (int i = 0; i < 50000; ++i) {
        s = step(s, Eigen::Vector3d::Zero(), 1e-4, p);
        t.push_back(s.time);
        d.push_back(s.deflection.x());
    }
    return crossing_frequency(t, d);
}

Trajectory y_move(double z, double speed, const PlantParams&) {
    const JointStated a(0.6, 0.1, z, 0, 0, 0), b(0.6, 1.1, z, 0, 0, 0);
    AxisLimitSet lims;
    lims.fill({speed, 2.0});
    Trajectory traj(a.vector());
    traj.append_leg(plan_coordinated(a, b, lims));
    return traj;
}

double peak_deflection(const SimTrace& trace) {
    double peak = 0.0;
    for (const auto& r : trace.records)
        peak = std::max(peak, (r.actual.position - forward_kinematics(r.carriage).position).norm());
    return peak;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("cantilever stiffness follows the cubic law") {
    PlantParams p;
    p.rail_ei = 100.0;
    CHECK(cantilever_stiffness(0.5, p) == doctest::Approx(2400.0).epsilon(1e-12));
    CHECK(cantilever_stiffness(0.5, p) / cantilever_stiffness(1.0, p) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK_THROWS_AS(cantilever_stiffness(0.0, p), Error);
    CHECK_THROWS_AS(cantilever_stiffness(-0.1, p), Error);
    // Below the floor the extension is clamped, so stiffness stays finite.
    CHECK(std::isfinite(cantilever_stiffness(1e-6, p)));
    CHECK(cantilever_stiffness(1e-6, p) == cantilever_stiffness(p.min_extension, p));
}

TEST_CASE("extension grows as the carriage goes down") {
    PlantParams p;
    CHECK(pendulum_extension(p.z_max, p) == doctest::Approx(p.z_mount_offset));
    CHECK(pendulum_extension(0.0, p) == doctest::Approx(p.z_mount_offset + p.z_max));
    p.z_mount_offset = 0.0;
    CHECK(pendulum_extension(p.z_max, p) == p.min_extension);
}

TEST_CASE("natural frequency") {
    CHECK(natural_frequency(2400.0, 2.0) == doctest::Approx(std::sqrt(1200.0) / (2 * testing::kPi)).epsilon(1e-12));
    CHECK(natural_frequency(2400.0, 2.0) == doctest::Approx(5.513).epsilon(1e-4));
    CHECK(natural_frequency(100.0, 4.0) == doctest::Approx(natural_frequency(100.0, 1.0) / 2).epsilon(1e-12));
    CHECK(natural_frequency(1.0, 1.0) == doctest::Approx(1.0 / (2 * testing::kPi)).epsilon(1e-12));
}

TEST_CASE("equilibrium is preserved") {
    PlantState s;
    s.carriage = JointStated(0.6, 0.6, 0.5, 0, 0, 0);
    const auto next = step(s, Eigen::Vector3d::Zero(), 1e-3, PlantParams{});
    CHECK(next.deflection == Eigen::Vector2d::Zero());
    CHECK(next.deflection_rate == Eigen::Vector2d::Zero());
    CHECK(next.time == 1e-3);
}

TEST_CASE("step size is bounded") {
    CHECK_THROWS_AS(step(PlantState{}, Eigen::Vector3d::Zero(), 3e-3, PlantParams{}), Error);
    CHECK_THROWS_AS(step(PlantState{}, Eigen::Vector3d::Zero(), 0.0, PlantParams{}), Error);
    CHECK_NOTHROW(step(PlantState{}, Eigen::Vector3d::Zero(), kMaxPlantStep, PlantParams{}));
}

TEST_CASE("undamped free oscillation conserves energy") {
    for (double z : {0.0, 0.5, 0.95}) {
        const auto p = undamped();
        PlantState s;
        s.carriage = JointStated(0.6, 0.6, z, 0, 0, 0);
        s.deflection = {0.003, -0.001};
        const double e0 = deflection_energy(s, p);
        double worst = 0.0;
        for (int i = 0; i < 100000; ++i) {
            s = step(s, Eigen::Vector3d::Zero(), 1e-4, p);
            worst = std::max(worst, std::abs(deflection_energy(s, p) - e0) / e0);
        }
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("damped energy never increases without input") {
    PlantState s;
    s.carriage = JointStated(0.6, 0.6, 0.2, 0, 0, 0);
    s.deflection = {0.003, 0.001};
    const PlantParams p;
    double prev = deflection_energy(s, p);
    for (int i = 0; i < 20000; ++i) {
        s = step(s, Eigen::Vector3d::Zero(), 1e-4, p);
        const double e = deflection_energy(s, p);
        REQUIRE(e <= prev * (1 + 1e-12));
        prev = e;
    }
}

TEST_CASE("free oscillation frequency matches sqrt(k/m)/2pi") {
    const auto p = undamped();
    for (double z : {0.0, 0.5, 0.9}) {
        const double k = cantilever_stiffness(pendulum_extension(z, p), p);
        const double expect = natural_frequency(k, p.tip_mass);
        CHECK(free_frequency(p, z, p.tip_mass) == doctest::Approx(expect).epsilon(0.02));
    }
}

TEST_CASE("an impulse of carriage acceleration rings at the natural frequency") {
    const auto p = undamped();
    PlantState s;
    s.carriage = JointStated(0.6, 0.6, 0.3, 0, 0, 0);
    std::vector<double> t, d;
    for (int i = 0; i < 40000; ++i) {
        const Eigen::Vector3d a = i < 10 ? Eigen::Vector3d(5.0, 0, 0) : Eigen::Vector3d::Zero();
        s = step(s, a, 1e-4, p);
        t.push_back(s.time);
        d.push_back(s.deflection.x());
    }
    const double k = cantilever_stiffness(pendulum_extension(0.3, p), p);
    CHECK(crossing_frequency(t, d) == doctest::Approx(natural_frequency(k, p.tip_mass)).epsilon(0.02));
    CHECK(std::abs(s.deflection.y()) == 0.0);
}

TEST_CASE("adding payload lowers the frequency by the square root of the mass ratio") {
    const auto p = undamped();
    const double m0 = p.tip_mass, m1 = p.tip_mass + 1.0;
    const double ratio = free_frequency(p, 0.3, m0) / free_frequency(p, 0.3, m1);
    CHECK(ratio == doctest::Approx(std::sqrt(m1 / m0)).epsilon(0.05));
}

TEST_CASE("rigid plant tracks the command exactly") {
    const auto p = PlantParams::rigid_plant();
    const auto traj = y_move(0.2, 0.5, p);
    const auto trace = simulate(traj, p, hold(1.0));
    for (const auto& r : trace.records) {
        REQUIRE((r.actual.position - forward_kinematics(r.desired).position).norm() < 1e-9);
        REQUIRE((r.actual.orientation - forward_kinematics(r.desired).orientation).cwiseAbs().maxCoeff() < 1e-9);
    }
    CHECK(settle_time(trace, p.settle_tolerance) == doctest::Approx(traj.duration()));
}

TEST_CASE("trace timing is uniform and covers the hold") {
    const PlantParams p;
    const auto traj = y_move(0.5, 0.5, p);
    SimOptions o = hold(2.0);
    o.sample_rate = 200.0;
    const auto trace = simulate(traj, p, o);
    CHECK(trace.sample_rate == 200.0);
    CHECK(trace.motion_end == traj.duration());
    for (std::size_t i = 1; i < trace.records.size(); ++i)
        REQUIRE(trace.records[i].t - trace.records[i - 1].t == doctest::Approx(1.0 / 200.0));
    CHECK(trace.records.back().t >= traj.duration() + 2.0 - 1e-9);
}

TEST_CASE("same Y move deflects more at low height") {
    const PlantParams p;
    const auto low = simulate(y_move(0.05, 0.5, p), p, hold(1.0));
    const auto high = simulate(y_move(0.95, 0.5, p), p, hold(1.0));
    CHECK(peak_deflection(low) > peak_deflection(high));
}

TEST_CASE("deflection amplitude is non-decreasing in extension") {
    const PlantParams p;
    double prev = 0.0;
    // z from high to low is extension from short to long.
    for (double z : {0.95, 0.75, 0.55, 0.35, 0.15}) {
        const double amp = peak_deflection(simulate(y_move(z, 0.5, p), p, hold(1.0)));
        CHECK(amp >= prev);
        prev = amp;
    }
}

TEST_CASE("damped amplitude envelope decays after the input stops") {
    const PlantParams p;
    const auto trace = simulate(y_move(0.2, 0.5, p), p, hold(20.0));
    // Peak per 2 s window after motion end.
    std::vector<double> peaks;
    double peak = 0.0, window_end = trace.motion_end + 2.0;
    for (const auto& r : trace.records) {
        if (r.t < trace.motion_end) continue;
        if (r.t >= window_end) {
            peaks.push_back(peak);
            peak = 0.0;
            window_end += 2.0;
        }
        peak = std::max(peak, (r.actual.position - forward_kinematics(r.carriage).position).norm());
    }
    REQUIRE(peaks.size() >= 5);
    for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] <= peaks[i - 1]);
}

TEST_CASE("settle time shrinks as damping grows and never comes undamped") {
    double prev = kNeverSettles;
    for (double zeta : {0.02, 0.05, 0.1}) {
        PlantParams p;
        p.damping_ratio = zeta;
        const auto trace = simulate(y_move(0.2, 0.5, p), p, hold(30.0));
        const double ts = settle_time(trace, p.settle_tolerance);
        CHECK(std::isfinite(ts));
        CHECK(ts >= trace.motion_end);
        CHECK(ts < prev);
        prev = ts;
    }
    PlantParams p = undamped();
    const auto trace = simulate(y_move(0.2, 0.5, p), p, hold(5.0));
    CHECK(settle_time(trace, p.settle_tolerance) == kNeverSettles);
}

TEST_CASE("acceleration cap bounds the carriage and sets the speed ceiling") {
    PlantParams p;
    p.accel_cap = 0.27;
    const JointStated a(0.0, 0.6, 0.95, 0, 0, 0), b(1.2, 0.6, 0.95, 0, 0, 0);
    AxisLimitSet lims;
    lims.fill({1.0, 2.0});
    const auto trace = simulate({{a}, {b}}, lims, p, hold(1.0));
    double vmax = 0.0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        REQUIRE(trace.records[i].carriage_accel.cwiseAbs().maxCoeff() <= 0.27 + 1e-9);
        if (i > 0)
            vmax = std::max(vmax, (trace.records[i].carriage.x() - trace.records[i - 1].carriage.x()) /
                                      (trace.records[i].t - trace.records[i - 1].t));
    }
    CHECK(vmax == doctest::Approx(0.57).epsilon(0.01 / 0.57));
}

TEST_CASE("desync leaves a transient in z and a clean end") {
    const PlantParams p = PlantParams::rigid_plant();
    SimOptions o = hold(1.0);
    o.desync_delay = 0.005;
    const auto trace = simulate(y_move(0.5, 0.5, p), p, o);
    double peak = 0.0;
    for (const auto& r : trace.records) {
        peak = std::max(peak, std::abs(r.actual.position.z() - 0.5));
        REQUIRE(r.actual.position.x() == r.desired.x());
    }
    CHECK(peak > 1e-4);
    CHECK(std::abs(trace.records.back().actual.position.z() - 0.5) < 1e-12);
}

TEST_CASE("trace CSV round trip") {
    const PlantParams p;
    SimOptions o = hold(0.5);
    o.sample_rate = 100.0;
    const auto trace = simulate(y_move(0.5, 0.5, p), p, o);
    std::stringstream ss;
    write_trace_csv(ss, trace);
    const std::string text = ss.str();
    CHECK(text.substr(0, text.find('\n')) == kTraceCsvHeader);
    const auto back = read_trace_csv(ss);
    REQUIRE(back.records.size() == trace.records.size());
    CHECK(back.sample_rate == doctest::Approx(100.0));
    CHECK(std::isnan(back.motion_end));
    for (std::size_t i = 0; i < back.records.size(); ++i) {
        REQUIRE(back.records[i].t == doctest::Approx(trace.records[i].t).epsilon(1e-8));
        REQUIRE((back.records[i].actual.position - trace.records[i].actual.position).norm() < 1e-8);
    }

    std::stringstream bad("t,x\n0,1\n");
    CHECK_THROWS_AS(read_trace_csv(bad), Error);
}

}  // TEST_SUITE
