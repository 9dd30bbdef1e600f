#pragma once

#include "gantry/dynamics.hpp"
#include "gantry/eval.hpp"
#include "gantry/motion.hpp"
#include "gantry/singmap.hpp"
#include "gantry/transmission.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gantry {

inline constexpr int kSchemaVersion = 1;

struct LemniscateConfig {
    Eigen::Vector2d center{0.6, 0.6};
    double scale = 0.4;
    std::vector<double> heights{0.2, 0.5, 0.8};
    double multi_plane_height = 0.5;
    double z_amplitude = 0.2;
    double fast_speed = 0.5;   // mean path speed, m/s
    double slow_speed = 0.05;
    double ramp_fraction = 0.1;
};

struct PickRunConfig {
    JointStated start{0.2, 0.2, 0.9, 0.0, 0.0, 0.0};
    JointStated pick{0.9, 0.4, 0.3, 0.0, 0.0, 0.0};
    JointStated place{0.5, 1.0, 0.4, 0.0, 0.0, 0.0};
    double retract_height = 0.95;
    double payload = 1.0;
    double dwell = 0.5;
    bool fast = true;
};

struct SpeedVerifyConfig {
    std::optional<double> accel_cap = 0.27;
    double wrist_travel = 3.0;  // rad
};

struct SingmapConfig {
    WorkspaceGrid grid{Eigen::Vector3d::Zero(), Eigen::Vector3d(1.2, 1.2, 1.0), {20, 20, 10}};
    bool include_cartman = true;
    std::vector<std::filesystem::path> chains;  // resolved against the config directory
    std::optional<double> threshold;
    double relative_threshold = 0.01;
    std::vector<int> task_rows{0, 1, 2};
    std::size_t seed_count = 8;
};

struct MocapConfig {
    std::map<std::string, std::string> columns{{"t", "t"}, {"x", "x"}, {"y", "y"}, {"z", "z"}};
    double scale = 1.0;  // multiplies positions into meters
    double time_offset = 0.0;
};

/// Everything a scenario run needs, in SI units. Defaults reproduce the
/// shipped config/default.json.
struct ScenarioConfig {
    WorkspaceLimits workspace;
    BeltParams belt;
    double desync_delay = 0.0005;
    PlantParams plant;
    double linear_amax = 2.0;
    double angular_amax = 5.0;
    std::array<double, 6> fast{0.604, 0.531, 0.512, 1.547, 1.536, 1.593};
    std::array<double, 6> slow{0.05, 0.05, 0.05, 0.2, 0.2, 0.2};
    double sample_rate = 250.0;
    double hold_time = 60.0;
    double max_internal_dt = 1e-4;
    double axis_margin = 0.05;
    std::array<double, 2> wrist_range{-1.5, 1.5};
    LemniscateConfig lemniscate;
    PickRunConfig pick_run;
    SpeedVerifyConfig speed_verify;
    SingmapConfig singmap;
    MocapConfig mocap;

    AxisLimitSet limits(bool fast_set) const;
    SimOptions sim_options() const;
};

/// Schema validation, then semantic checks. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    unsigned threads = 1;
    bool seedless = false;
};

/// Threads requested by GANTRY_SIM_THREADS, default 1.
unsigned threads_from_env();

struct OutputFile {
    std::string relative_path;  // relative to the output directory
    std::string content;
};

/// In-memory result of one CLI verb; nothing touches the filesystem until
/// write_outputs().
struct ScenarioResult {
    std::string scenario;
    Report report;
    nlohmann::ordered_json summary;
    std::vector<std::pair<std::string, SimTrace>> traces;
    std::vector<std::pair<std::string, DisconMap>> maps;
    std::vector<OutputFile> files;
};

ScenarioResult run_axis_test(const ScenarioConfig& config, const RunOptions& options = {});
ScenarioResult run_lemniscate(const ScenarioConfig& config, const RunOptions& options = {});
ScenarioResult run_pick_run(const ScenarioConfig& config, const RunOptions& options = {});
ScenarioResult run_speed_verify(const ScenarioConfig& config, const RunOptions& options = {});
ScenarioResult run_singmap(const ScenarioConfig& config, const RunOptions& options = {});

/// Re-summarizes trace CSVs. Run names come from file stems; names starting
/// with an axis ("x-", "roll-", ...) get per-axis stats, everything else 3D.
/// Mocap files are compared against `desired_trace` using config.mocap.
ScenarioResult run_report(const ScenarioConfig& config, const std::vector<std::filesystem::path>& traces,
                          const std::optional<std::filesystem::path>& mocap = std::nullopt,
                          const std::optional<std::filesystem::path>& desired_trace = std::nullopt);

/// Reads an external motion-capture CSV (header row, comma separated) into a
/// 3-channel position series using the configured column mapping.
Series read_mocap_csv(const std::filesystem::path& path, const MocapConfig& mocap);

void write_outputs(const ScenarioResult& result, const std::filesystem::path& out_dir);

/// Map CSV: x,y,z,manipulability,condition_number,reachable,boundary.
std::string map_csv(const DisconMap& map);

}  // namespace gantry
