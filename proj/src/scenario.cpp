#include "gantry/scenario.hpp"

#include "gantry/error.hpp"
#include "gantry/json_io.hpp"
#include "gantry/schema.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

namespace gantry {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 6> kAxisKeys{"x", "y", "z", "roll", "pitch", "yaw"};

Eigen::Vector3d vec3(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

JointStated joint6(const json& j) {
    Vector6d v;
    for (int i = 0; i < 6; ++i) v[i] = j[i].get<double>();
    return JointStated(v);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_optional(const json& obj, const char* key, std::optional<double>& out) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) out.reset();
    else out = obj.at(key).get<double>();
}

void read_speeds(const json& obj, std::array<double, 6>& out) {
    for (int a = 0; a < 6; ++a) read(obj, kAxisKeys[a], out[a]);
}

void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw ConfigError(path, message);
}

// Translates library validation failures into config errors that keep the
// original message.
template <typename F>
void check_with(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

void semantic_checks(const ScenarioConfig& c) {
    for (int i = 0; i < 3; ++i)
        require(c.workspace.lower[i] < c.workspace.upper[i], "$.workspace.upper",
                fmt::format("upper must exceed lower along {}", kAxisKeys[i]));
    check_with("$.transmission", [&] { c.belt.validate(); });
    check_with("$.plant", [&] { c.plant.validate(); });
    for (int i = 0; i < 3; ++i) {
        const double range = c.workspace.upper[i] - c.workspace.lower[i];
        require(2.0 * c.axis_margin < range, "$.axis_test.margin", "margin leaves no travel along " +
                                                                       std::string(kAxisKeys[i]));
    }
    const auto& wr = c.wrist_range;
    require(wr[0] < wr[1], "$.axis_test.wrist_range", "lower must be below upper");
    require(wr[0] > -std::numbers::pi && wr[1] <= std::numbers::pi, "$.axis_test.wrist_range",
            "must lie within (-pi, pi]");
    require(c.sample_rate * c.max_internal_dt <= 1.0, "$.sim.max_internal_dt",
            "must not exceed the record interval");

    const auto& lem = c.lemniscate;
    auto curve_check = [&](double height, bool multi) {
        LemniscateSpec spec;
        spec.center = lem.center;
        spec.scale = lem.scale;
        spec.height = height;
        spec.multi_plane = multi;
        spec.z_amplitude = multi ? lem.z_amplitude : 0.0;
        spec.ramp_fraction = lem.ramp_fraction;
        lemniscate_path(spec, c.workspace);
    };
    // Curve problems keep their own error code; the CLI treats them as config errors.
    for (double h : lem.heights) curve_check(h, false);
    curve_check(lem.multi_plane_height, true);

    const auto& pr = c.pick_run;
    check_with("$.pick_run", [&] {
        pick_run_path(pr.start, pr.pick, pr.place, {pr.retract_height, pr.payload, pr.dwell}, c.workspace);
    });

    const auto& sm = c.singmap;
    check_with("$.singmap.grid", [&] { sm.grid.validate(); });
    for (std::size_t i = 0; i < sm.chains.size(); ++i)
        require(std::filesystem::exists(sm.chains[i]), fmt::format("$.singmap.chains[{}]", i),
                "no such file: " + sm.chains[i].string());
}

unsigned clamp_threads(unsigned requested, std::size_t jobs) {
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(requested, jobs)));
}

// Runs f(i) for i in [0, n) on up to `threads` workers. Results go to
// caller-owned slots, so output order never depends on scheduling. The
// lowest-index failure is rethrown.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    threads = clamp_threads(threads, n);
    std::vector<std::exception_ptr> errors(n);
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        f(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct RunSpec {
    std::string name;
    Trajectory trajectory;
    ErrorMetric metric;
    PlantParams plant;
};

std::string trace_csv(const SimTrace& trace) {
    std::ostringstream out;
    write_trace_csv(out, trace);
    return out.str();
}

ordered_json summary_doc(const std::string& scenario, const Report& report) {
    const auto parsed = ordered_json::parse(report_json(report));
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["scenario"] = scenario;
    doc["errors"] = parsed.at("errors");
    doc["speeds"] = parsed.at("speeds");
    return doc;
}

void add_summary_files(ScenarioResult& result) {
    result.files.push_back({result.scenario + "/summary.json", result.summary.dump(2) + "\n"});
    result.files.push_back({result.scenario + "/summary.txt", report_text(result.report)});
}

// Simulates every spec, filling traces in spec order.
std::vector<SimTrace> simulate_all(const std::vector<RunSpec>& specs, const ScenarioConfig& config,
                                   const RunOptions& options) {
    std::vector<SimTrace> traces(specs.size());
    const auto sim = config.sim_options();
    parallel_for(specs.size(), options.threads,
                 [&](std::size_t i) { traces[i] = simulate(specs[i].trajectory, specs[i].plant, sim); });
    return traces;
}

ScenarioResult finish_runs(const std::string& scenario, const std::vector<RunSpec>& specs,
                           std::vector<SimTrace> traces) {
    ScenarioResult result;
    result.scenario = scenario;
    std::vector<RunInput> inputs;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        result.files.push_back({scenario + "/" + specs[i].name + ".csv", trace_csv(traces[i])});
        inputs.push_back({specs[i].name, traces[i], specs[i].metric});
        result.traces.emplace_back(specs[i].name, std::move(traces[i]));
    }
    result.report = summarize(inputs);
    return result;
}

JointStated with_axis(JointStated q, Axis axis, double value) {
    Vector6d v = q.vector();
    v[axis] = value;
    return JointStated(v);
}

Trajectory there_and_back(const JointStated& from, const JointStated& to, const AxisLimitSet& limits,
                          const WorkspaceLimits& workspace) {
    Trajectory t(from.vector());
    t.append_leg(plan_coordinated(from, to, limits, workspace));
    t.append_leg(plan_coordinated(to, from, limits, workspace));
    return t;
}

PlantParams plant_for(const ScenarioConfig& config) {
    PlantParams p = config.plant;
    p.z_max = config.workspace.upper.z();
    return p;
}

LemniscateSpec lemniscate_spec(const LemniscateConfig& lem, double height, bool multi, double speed) {
    LemniscateSpec spec;
    spec.center = lem.center;
    spec.scale = lem.scale;
    spec.height = height;
    spec.multi_plane = multi;
    spec.z_amplitude = multi ? lem.z_amplitude : 0.0;
    spec.ramp_fraction = lem.ramp_fraction;
    spec.period = lemniscate_length(lem.scale) / speed;
    return spec;
}

std::string fmt_num(double v) { return fmt::format("{:.9g}", v); }

// Axis inference for run_report: "x-high-fast" -> X, "roll-slow" -> Roll.
std::optional<Axis> axis_from_name(const std::string& name) {
    for (int a = 0; a < 6; ++a) {
        const std::string key = kAxisKeys[a];
        if (name.rfind(key + "-", 0) == 0) return static_cast<Axis>(a);
    }
    return std::nullopt;
}

}  // namespace

AxisLimitSet ScenarioConfig::limits(bool fast_set) const {
    const auto& v = fast_set ? fast : slow;
    AxisLimitSet out;
    for (int a = 0; a < 6; ++a) out[a] = {v[a], is_linear(static_cast<Axis>(a)) ? linear_amax : angular_amax};
    return apply_accel_cap(out, plant.accel_cap);
}

SimOptions ScenarioConfig::sim_options() const {
    SimOptions o;
    o.sample_rate = sample_rate;
    o.hold_time = hold_time;
    o.max_internal_dt = max_internal_dt;
    o.belt = belt;
    o.desync_delay = desync_delay;
    return o;
}

ScenarioConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    validate_schema(doc, scenario_schema());
    ScenarioConfig c;
    if (doc.contains("workspace")) {
        const auto& w = doc.at("workspace");
        if (w.contains("lower")) c.workspace.lower = vec3(w.at("lower"));
        if (w.contains("upper")) c.workspace.upper = vec3(w.at("upper"));
        read(w, "vmax_linear", c.workspace.vmax_linear);
        read(w, "vmax_angular", c.workspace.vmax_angular);
        read(w, "payload", c.workspace.payload);
    }
    if (doc.contains("transmission")) {
        const auto& t = doc.at("transmission");
        read(t, "pulley_radius", c.belt.pulley_radius);
        read(t, "x_gain", c.belt.x_gain);
        read(t, "differential_sign", c.belt.differential_sign);
        read(t, "wrist_gear_ratio", c.belt.wrist_gear_ratio);
    }
    read(doc, "desync_delay", c.desync_delay);
    if (doc.contains("plant")) {
        const auto& p = doc.at("plant");
        read(p, "tip_mass", c.plant.tip_mass);
        read(p, "rail_ei", c.plant.rail_ei);
        read(p, "damping_ratio", c.plant.damping_ratio);
        read(p, "z_mount_offset", c.plant.z_mount_offset);
        read_optional(p, "accel_cap", c.plant.accel_cap);
        read(p, "settle_tolerance", c.plant.settle_tolerance);
        read(p, "min_extension", c.plant.min_extension);
        if (p.value("rigid", false)) c.plant.rail_ei = std::numeric_limits<double>::infinity();
    }
    c.plant.z_max = c.workspace.upper.z();
    if (doc.contains("limits")) {
        const auto& l = doc.at("limits");
        read(l, "linear_amax", c.linear_amax);
        read(l, "angular_amax", c.angular_amax);
        if (l.contains("fast")) read_speeds(l.at("fast"), c.fast);
        if (l.contains("slow")) read_speeds(l.at("slow"), c.slow);
    }
    if (doc.contains("sim")) {
        const auto& s = doc.at("sim");
        read(s, "sample_rate", c.sample_rate);
        read(s, "hold_time", c.hold_time);
        read(s, "max_internal_dt", c.max_internal_dt);
    }
    if (doc.contains("axis_test")) {
        const auto& a = doc.at("axis_test");
        read(a, "margin", c.axis_margin);
        if (a.contains("wrist_range")) c.wrist_range = {a.at("wrist_range")[0], a.at("wrist_range")[1]};
    }
    if (doc.contains("lemniscate")) {
        const auto& l = doc.at("lemniscate");
        auto& lem = c.lemniscate;
        if (l.contains("center")) lem.center = {l.at("center")[0].get<double>(), l.at("center")[1].get<double>()};
        read(l, "scale", lem.scale);
        read(l, "heights", lem.heights);
        read(l, "multi_plane_height", lem.multi_plane_height);
        read(l, "z_amplitude", lem.z_amplitude);
        read(l, "fast_speed", lem.fast_speed);
        read(l, "slow_speed", lem.slow_speed);
        read(l, "ramp_fraction", lem.ramp_fraction);
    }
    if (doc.contains("pick_run")) {
        const auto& p = doc.at("pick_run");
        auto& pr = c.pick_run;
        if (p.contains("start")) pr.start = joint6(p.at("start"));
        if (p.contains("pick")) pr.pick = joint6(p.at("pick"));
        if (p.contains("place")) pr.place = joint6(p.at("place"));
        read(p, "retract_height", pr.retract_height);
        read(p, "payload", pr.payload);
        read(p, "dwell", pr.dwell);
        if (p.contains("speed")) pr.fast = p.at("speed") == "fast";
    }
    if (doc.contains("speed_verify")) {
        const auto& s = doc.at("speed_verify");
        read_optional(s, "accel_cap", c.speed_verify.accel_cap);
        read(s, "wrist_travel", c.speed_verify.wrist_travel);
    }
    if (doc.contains("singmap")) {
        const auto& s = doc.at("singmap");
        auto& sm = c.singmap;
        if (s.contains("grid")) {
            const auto& g = s.at("grid");
            if (g.contains("lower")) sm.grid.lower = vec3(g.at("lower"));
            if (g.contains("upper")) sm.grid.upper = vec3(g.at("upper"));
            if (g.contains("cells")) sm.grid.cells = g.at("cells").get<std::array<int, 3>>();
        }
        read(s, "include_cartman", sm.include_cartman);
        if (s.contains("chains")) {
            for (const auto& p : s.at("chains")) {
                std::filesystem::path path = p.get<std::string>();
                sm.chains.push_back(path.is_absolute() ? path : base_dir / path);
            }
        }
        read_optional(s, "threshold", sm.threshold);
        read(s, "relative_threshold", sm.relative_threshold);
        read(s, "task_rows", sm.task_rows);
        read(s, "seed_count", sm.seed_count);
    }
    if (doc.contains("mocap")) {
        const auto& m = doc.at("mocap");
        if (m.contains("columns")) c.mocap.columns = m.at("columns").get<std::map<std::string, std::string>>();
        read(m, "scale", c.mocap.scale);
        read(m, "time_offset", c.mocap.time_offset);
    }
    semantic_checks(c);
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc, path.parent_path());
}

unsigned threads_from_env() {
    const char* env = std::getenv("GANTRY_SIM_THREADS");
    if (env == nullptr) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) return 1;
    return static_cast<unsigned>(n);
}

ScenarioResult run_axis_test(const ScenarioConfig& config, const RunOptions& options) {
    const auto& ws = config.workspace;
    const double m = config.axis_margin;
    const Eigen::Vector3d lo = ws.lower.array() + m;
    const Eigen::Vector3d hi = ws.upper.array() - m;
    const Eigen::Vector3d mid = 0.5 * (ws.lower + ws.upper);
    const PlantParams plant = plant_for(config);

    std::vector<RunSpec> specs;
    for (int a = X; a <= Z; ++a) {
        const auto axis = static_cast<Axis>(a);
        for (const char* height : {"high", "low"}) {
            const bool high = std::string(height) == "high";
            for (const char* speed : {"fast", "slow"}) {
                const auto limits = config.limits(std::string(speed) == "fast");
                JointStated home(mid.x(), mid.y(), high ? hi.z() : lo.z(), 0.0, 0.0, 0.0);
                double from = lo[a], to = hi[a];
                if (axis == Z) {
                    // Z sweeps its upper or lower half instead of the full range.
                    from = high ? mid.z() : lo.z();
                    to = high ? hi.z() : mid.z();
                }
                specs.push_back({fmt::format("{}-{}-{}", kAxisKeys[a], height, speed),
                                 there_and_back(with_axis(home, axis, from), with_axis(home, axis, to), limits, ws),
                                 ErrorMetric::axis(axis), plant});
            }
        }
    }
    for (int a = Roll; a <= Yaw; ++a) {
        const auto axis = static_cast<Axis>(a);
        for (const char* speed : {"fast", "slow"}) {
            const auto limits = config.limits(std::string(speed) == "fast");
            const JointStated home(mid.x(), mid.y(), hi.z(), 0.0, 0.0, 0.0);
            specs.push_back({fmt::format("{}-{}", kAxisKeys[a], speed),
                             there_and_back(with_axis(home, axis, config.wrist_range[0]),
                                            with_axis(home, axis, config.wrist_range[1]), limits, ws),
                             ErrorMetric::axis(axis), plant});
        }
    }

    auto result = finish_runs("axis-test", specs, simulate_all(specs, config, options));
    result.summary = summary_doc(result.scenario, result.report);
    add_summary_files(result);
    return result;
}

ScenarioResult run_lemniscate(const ScenarioConfig& config, const RunOptions& options) {
    const auto& lem = config.lemniscate;
    const PlantParams plant = plant_for(config);
    std::vector<RunSpec> specs;
    auto add = [&](const std::string& name, double height, bool multi, double speed) {
        const auto path = lemniscate_path(lemniscate_spec(lem, height, multi, speed), config.workspace);
        Vector6d start = Vector6d::Zero();
        start.head<3>() = path.point(0.0);
        Trajectory t(start);
        t.append_curve(path);
        specs.push_back({name, std::move(t), ErrorMetric::position3d(), plant});
    };
    for (const char* speed : {"fast", "slow"}) {
        const double v = std::string(speed) == "fast" ? lem.fast_speed : lem.slow_speed;
        for (double h : lem.heights) add(fmt::format("plane-z{:.3f}-{}", h, speed), h, false, v);
        add(fmt::format("multi-plane-{}", speed), lem.multi_plane_height, true, v);
    }

    auto result = finish_runs("lemniscate", specs, simulate_all(specs, config, options));
    std::vector<RunInput> inputs;
    for (std::size_t i = 0; i < specs.size(); ++i)
        inputs.push_back({specs[i].name, result.traces[i].second, specs[i].metric});
    // Pooled 3D row over every lemniscate run.
    result.report.rows.push_back({"xyz", "mm", pooled_error_stats(inputs, ErrorMetric::position3d())});
    result.summary = summary_doc(result.scenario, result.report);
    add_summary_files(result);
    return result;
}

ScenarioResult run_pick_run(const ScenarioConfig& config, const RunOptions& options) {
    const auto& pr = config.pick_run;
    const PlantParams plant = plant_for(config);
    const auto path = pick_run_path(pr.start, pr.pick, pr.place, {pr.retract_height, pr.payload, pr.dwell},
                                    config.workspace);
    std::vector<RunSpec> specs;
    specs.push_back({"pick-run", plan_path(path.waypoints, config.limits(pr.fast), config.workspace),
                     ErrorMetric::position3d(), plant});

    auto result = finish_runs("pick-run", specs, simulate_all(specs, config, options));
    const auto& trace = result.traces.front().second;
    const Eigen::Vector3d home = forward_kinematics(pr.start).position;
    const double return_error = (trace.records.back().actual.position - home).norm() * 1000.0;

    result.summary = summary_doc(result.scenario, result.report);
    result.summary["return_error_mm"] = return_error;
    if (!plant.rigid()) {
        const double k = cantilever_stiffness(pendulum_extension(pr.pick.z(), plant), plant);
        result.summary["natural_frequency_hz"] = {{"z", pr.pick.z()},
                                                  {"before_pick", natural_frequency(k, plant.tip_mass)},
                                                  {"after_pick", natural_frequency(k, plant.tip_mass + pr.payload)}};
    }
    add_summary_files(result);
    return result;
}

ScenarioResult run_speed_verify(const ScenarioConfig& config, const RunOptions& options) {
    const auto& ws = config.workspace;
    const Eigen::Vector3d mid = 0.5 * (ws.lower + ws.upper);
    const double high_z = ws.upper.z() - config.axis_margin;
    PlantParams plant = plant_for(config);
    plant.accel_cap = config.speed_verify.accel_cap;

    AxisLimitSet limits;
    for (int a = 0; a < 6; ++a)
        limits[a] = {config.fast[a], is_linear(static_cast<Axis>(a)) ? config.linear_amax : config.angular_amax};
    limits = apply_accel_cap(limits, plant.accel_cap);

    std::vector<RunSpec> specs;
    for (int a = 0; a < 6; ++a) {
        const auto axis = static_cast<Axis>(a);
        // Lateral runs happen with Z retracted, where the rails are stiffest.
        JointStated home(mid.x(), mid.y(), high_z, 0.0, 0.0, 0.0);
        double from, to;
        if (is_linear(axis)) {
            from = ws.lower[a];
            to = ws.upper[a];
        } else {
            from = -0.5 * config.speed_verify.wrist_travel;
            to = 0.5 * config.speed_verify.wrist_travel;
        }
        const auto p0 = with_axis(home, axis, from), p1 = with_axis(home, axis, to);
        Trajectory t(p0.vector());
        t.append_leg(plan_coordinated(p0, p1, limits, ws));
        specs.push_back({fmt::format("{}-speed", kAxisKeys[a]), std::move(t), ErrorMetric::axis(axis), plant});
    }

    auto traces = simulate_all(specs, config, options);
    std::vector<SpeedRecord> speeds;
    for (int a = 0; a < 6; ++a)
        speeds.push_back(speed_error(kAxisKeys[a], config.fast[a], achieved_speed(traces[a], static_cast<Axis>(a))));

    auto result = finish_runs("speed-verify", specs, std::move(traces));
    result.report.speeds = speeds;
    result.summary = summary_doc(result.scenario, result.report);
    result.summary["accel_cap"] = plant.accel_cap ? json(*plant.accel_cap) : json(nullptr);
    add_summary_files(result);
    return result;
}

std::string map_csv(const DisconMap& map) {
    std::string out = "x,y,z,manipulability,condition_number,reachable,boundary\n";
    for (const auto& c : map.cells) {
        out += fmt::format("{},{},{},{},{},{},{}\n", fmt_num(c.center.x()), fmt_num(c.center.y()),
                           fmt_num(c.center.z()), fmt_num(c.manipulability), fmt_num(c.condition_number),
                           c.reachable ? 1 : 0, c.boundary ? 1 : 0);
    }
    return out;
}

namespace {

std::size_t interior_boundary_count(const DisconMap& map) {
    const auto& g = map.grid;
    std::size_t n = 0;
    for (int iz = 1; iz + 1 < g.cells[2]; ++iz)
        for (int iy = 1; iy + 1 < g.cells[1]; ++iy)
            for (int ix = 1; ix + 1 < g.cells[0]; ++ix)
                if (map.cells[g.index(ix, iy, iz)].boundary) ++n;
    return n;
}

}  // namespace

ScenarioResult run_singmap(const ScenarioConfig& config, const RunOptions& options) {
    const auto& sm = config.singmap;
    std::vector<DhChain> chains;
    if (sm.include_cartman) chains.push_back(cartman_chain(config.workspace));
    for (const auto& path : sm.chains) {
        try {
            chains.push_back(chain_from_file(path.string()));
        } catch (const Error& e) {
            throw ConfigError("$.singmap.chains", e.what());
        }
        if (chains.back().name.empty()) chains.back().name = path.stem().string();
    }

    ScenarioResult result;
    result.scenario = "singmap";
    result.summary["schema_version"] = kSchemaVersion;
    result.summary["scenario"] = result.scenario;
    result.summary["maps"] = ordered_json::array();
    for (const auto& chain : chains) {
        MapOptions mo;
        mo.threshold = sm.threshold;
        mo.relative_threshold = sm.relative_threshold;
        mo.task_rows = sm.task_rows;
        mo.ik.task_rows = sm.task_rows;
        mo.seeds = default_seeds(chain, sm.seed_count);
        mo.threads = options.threads;
        auto map = build_map(chain, sm.grid, mo);

        std::size_t reachable = 0;
        for (const auto& c : map.cells) reachable += c.reachable ? 1 : 0;
        const std::size_t interior = interior_boundary_count(map);

        ordered_json sidecar;
        sidecar["schema_version"] = kSchemaVersion;
        sidecar["chain"] = chain_to_json(chain);
        sidecar["grid"] = {{"lower", {sm.grid.lower.x(), sm.grid.lower.y(), sm.grid.lower.z()}},
                           {"upper", {sm.grid.upper.x(), sm.grid.upper.y(), sm.grid.upper.z()}},
                           {"cells", sm.grid.cells}};
        sidecar["threshold"] = map.threshold;
        sidecar["threshold_rule"] = sm.threshold ? "absolute" : fmt::format("{} x median", sm.relative_threshold);
        sidecar["task_rows"] = sm.task_rows;
        ordered_json seeds = ordered_json::array();
        for (const auto& q : mo.seeds) seeds.push_back(std::vector<double>(q.data(), q.data() + q.size()));
        sidecar["seeds"] = {{"kind", "joint-limit midpoint then Halton"}, {"values", seeds}};
        sidecar["ik_selection"] = "highest manipulability among converged seeds";
        sidecar["cells"] = map.cells.size();
        sidecar["reachable_cells"] = reachable;
        sidecar["boundary_cells"] = map.boundary.size();
        sidecar["interior_boundary_cells"] = interior;

        result.summary["maps"].push_back({{"chain", chain.name},
                                          {"reachable_cells", reachable},
                                          {"boundary_cells", map.boundary.size()},
                                          {"interior_boundary_cells", interior},
                                          {"threshold", map.threshold}});
        result.files.push_back({"singmap/" + chain.name + ".csv", map_csv(map)});
        result.files.push_back({"singmap/" + chain.name + ".json", sidecar.dump(2) + "\n"});
        result.maps.emplace_back(chain.name, std::move(map));
    }
    result.files.push_back({"singmap/summary.json", result.summary.dump(2) + "\n"});
    return result;
}

Series read_mocap_csv(const std::filesystem::path& path, const MocapConfig& mocap) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, path.string() + ": cannot open");
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            out.push_back(cell);
        }
        return out;
    };
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::TooShort, path.string() + ": empty file");
    const auto header = split(line);
    std::array<std::size_t, 4> col{};
    const std::array<const char*, 4> keys{"t", "x", "y", "z"};
    for (int k = 0; k < 4; ++k) {
        const auto& name = mocap.columns.at(keys[k]);
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("$.mocap.columns." + std::string(keys[k]), "no column '" + name + "'");
        col[k] = static_cast<std::size_t>(it - header.begin());
    }
    std::vector<double> t;
    std::vector<Eigen::Vector3d> p;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        try {
            t.push_back(std::stod(cells.at(col[0])) + mocap.time_offset);
            p.emplace_back(std::stod(cells.at(col[1])), std::stod(cells.at(col[2])), std::stod(cells.at(col[3])));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Io, fmt::format("{}:{}: malformed row", path.string(), line_no));
        }
    }
    Series s;
    s.t = t;
    s.values.resize(static_cast<Eigen::Index>(p.size()), 3);
    for (std::size_t i = 0; i < p.size(); ++i) s.values.row(static_cast<Eigen::Index>(i)) = mocap.scale * p[i].transpose();
    return s;
}

ScenarioResult run_report(const ScenarioConfig& config, const std::vector<std::filesystem::path>& traces,
                          const std::optional<std::filesystem::path>& mocap,
                          const std::optional<std::filesystem::path>& desired_trace) {
    for (const auto& p : traces)
        if (!std::filesystem::exists(p)) throw Error(ErrorCode::Io, p.string() + ": no such file");
    if (mocap && !desired_trace)
        throw Error(ErrorCode::InvalidArgument, "a mocap file needs the desired trace it is compared against");

    std::vector<RunInput> inputs;
    for (const auto& p : traces) {
        const std::string name = p.stem().string();
        const auto axis = axis_from_name(name);
        inputs.push_back({name, read_trace_csv(p.string()), axis ? ErrorMetric::axis(*axis) : ErrorMetric::position3d()});
    }
    ScenarioResult result;
    result.scenario = "report";
    result.report = summarize(inputs);

    if (mocap) {
        const auto desired = read_trace_csv(desired_trace->string());
        Series des = desired_series(desired);
        des.values = des.values.leftCols(3).eval();
        const auto paired = align(des, read_mocap_csv(*mocap, config.mocap));
        result.report.rows.push_back({"mocap:" + mocap->stem().string(), "mm",
                                      error_stats(paired, infer_motion_end(desired), ErrorMetric::position3d())});
    }
    result.summary = summary_doc(result.scenario, result.report);
    add_summary_files(result);
    return result;
}

void write_outputs(const ScenarioResult& result, const std::filesystem::path& out_dir) {
    for (const auto& f : result.files) {
        const auto path = out_dir / f.relative_path;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << f.content;
        if (!out) throw Error(ErrorCode::Io, path.string() + ": write failed");
    }
}

}  // namespace gantry
