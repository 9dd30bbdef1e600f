#include "gantry/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gantry;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = fs::path(GANTRY_SOURCE_DIR) / "config";

nlohmann::json default_doc() {
    std::ifstream in(kConfigDir / "default.json");
    return nlohmann::json::parse(in);
}

std::string config_error_path(const nlohmann::json& doc) {
    try {
        parse_config(doc, kConfigDir);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<accepted>";
}

const ErrorRow& row(const ScenarioResult& r, const std::string& name) {
    for (const auto& row : r.report.rows)
        if (row.name == name) return row;
    FAIL("no row named " << name);
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("the shipped configs load") {
    const auto def = load_config(kConfigDir / "default.json");
    CHECK(def.fast[X] == 0.604);
    CHECK(def.singmap.chains.size() == 2);
    CHECK(fs::exists(def.singmap.chains[0]));
    const auto rigid = load_config(kConfigDir / "rigid.json");
    CHECK(rigid.plant.rigid());
    CHECK(rigid.desync_delay == 0.0);
}

TEST_CASE("config errors carry the offending path") {
    auto doc = default_doc();
    CHECK(config_error_path(doc) == "<accepted>");

    doc = default_doc();
    doc["schema_version"] = 2;
    CHECK(config_error_path(doc) == "$.schema_version");

    doc = default_doc();
    doc["transmission"]["pulley_radius"] = -0.1;
    CHECK(config_error_path(doc) == "$.transmission.pulley_radius");

    doc = default_doc();
    doc["limits"]["fast"]["x"] = "quick";
    CHECK(config_error_path(doc) == "$.limits.fast.x");

    // An oversized curve keeps its own error code.
    doc = default_doc();
    doc["lemniscate"]["scale"] = 0.9;
    try {
        parse_config(doc, kConfigDir);
        FAIL("oversized lemniscate accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CurveExceedsWorkspace);
    }

    doc = default_doc();
    doc["unknown_section"] = 1;
    CHECK(config_error_path(doc) == "$.unknown_section");

    doc = default_doc();
    doc["workspace"]["upper"] = {1.2, 1.2};
    CHECK(config_error_path(doc).rfind("$.workspace.upper", 0) == 0);

    doc = default_doc();
    doc["singmap"]["chains"] = {"chains/missing.json"};
    CHECK(config_error_path(doc).rfind("$.singmap.chains", 0) == 0);

    CHECK_THROWS_AS(load_config(kConfigDir / "no-such-file.json"), ConfigError);
}

TEST_CASE("rigid axis test tracks exactly") {
    const auto config = load_config(kConfigDir / "rigid.json");
    const auto r = run_axis_test(config);
    REQUIRE(r.report.rows.size() == 18);
    CHECK(r.files.size() == 20);
    for (const auto& row : r.report.rows) {
        CHECK(row.stats.mean_error < 1e-6);
        CHECK(row.stats.static_error < 1e-6);
    }
}

TEST_CASE("axis test: 18 runs, slow low-height y oscillates more than fast high-height y") {
    const auto config = load_config(kConfigDir / "default.json");
    const auto r = run_axis_test(config);
    REQUIRE(r.report.rows.size() == 18);
    CHECK(r.files.size() == 20);
    CHECK(row(r, "y-low-slow").stats.mean_error > row(r, "y-high-fast").stats.mean_error);
    for (const auto& row : r.report.rows) {
        const double tol = row.unit == "mm" ? config.plant.settle_tolerance * 1000.0 : 1e-3;
        CHECK_MESSAGE(row.stats.static_error <= tol, row.name);
    }
    const auto doc = nlohmann::json::parse(r.files[r.files.size() - 2].content);
    CHECK(doc["schema_version"] == kSchemaVersion);
    CHECK(doc["errors"].size() == 18);
}

TEST_CASE("lemniscate: 8 closed runs plus a pooled row, all settled") {
    const auto config = load_config(kConfigDir / "default.json");
    const auto r = run_lemniscate(config, {2, false});
    REQUIRE(r.traces.size() == 8);
    CHECK(r.report.rows.size() == 9);
    CHECK(r.report.rows.back().name == "xyz");
    for (const auto& [name, trace] : r.traces) {
        const auto& first = trace.records.front().desired;
        const auto& last = trace.records.back().desired;
        CHECK_MESSAGE((first.position() - last.position()).norm() < 1e-9, name);
    }
    for (const auto& row : r.report.rows) CHECK_MESSAGE(row.stats.static_error <= 1.0, row.name);
}

TEST_CASE("pick run: one row, returns home, payload lowers the mode") {
    const auto config = load_config(kConfigDir / "default.json");
    const auto r = run_pick_run(config);
    REQUIRE(r.report.rows.size() == 1);
    CHECK(r.report.rows[0].name == "pick-run");
    CHECK(r.summary["return_error_mm"].get<double>() <= 1.0);
    const auto& f = r.summary["natural_frequency_hz"];
    const double ratio = f["after_pick"].get<double>() / f["before_pick"].get<double>();
    const double m = config.plant.tip_mass;
    CHECK(ratio == doctest::Approx(std::sqrt(m / (m + config.pick_run.payload))).epsilon(1e-12));

    const auto rigid = run_pick_run(load_config(kConfigDir / "rigid.json"));
    CHECK_FALSE(rigid.summary.contains("natural_frequency_hz"));
    CHECK(rigid.summary["return_error_mm"].get<double>() < 1e-9);
}

TEST_CASE("speed verify: slip cap limits x to 0.57 m/s, uncapped reaches the command") {
    auto config = load_config(kConfigDir / "default.json");
    const auto capped = run_speed_verify(config);
    REQUIRE(capped.report.speeds.size() == 6);
    CHECK(capped.report.speeds[X].achieved == doctest::Approx(0.57).epsilon(0.01 / 0.57));

    // Without the cap the ideal plant reaches every commanded speed.
    auto rigid = load_config(kConfigDir / "rigid.json");
    rigid.speed_verify.accel_cap.reset();
    const auto free = run_speed_verify(rigid);
    for (const auto& s : free.report.speeds)
        CHECK_MESSAGE(std::abs(s.achieved - s.commanded) <= 0.01 * s.commanded, s.axis);

    // The flexible rails ring after each ramp and the tip briefly outruns the
    // carriage, so the measured peak sits a little above the command.
    config.speed_verify.accel_cap.reset();
    const auto ringing = run_speed_verify(config);
    for (const auto& s : ringing.report.speeds) {
        CHECK_MESSAGE(s.achieved >= s.commanded * 0.99, s.axis);
        CHECK_MESSAGE(s.achieved <= s.commanded * 1.03, s.axis);
    }
}

TEST_CASE("singmap scenario writes one csv and sidecar per chain") {
    auto config = load_config(kConfigDir / "default.json");
    config.singmap.grid.cells = {6, 6, 4};
    const auto r = run_singmap(config);
    REQUIRE(r.maps.size() == 3);
    CHECK(r.files.size() == 7);
    CHECK(r.maps[0].first == "cartman");
    CHECK(r.maps[0].second.boundary.empty());
    const auto sidecar = nlohmann::json::parse(r.files[1].content);
    CHECK(sidecar["cells"] == 144);
    CHECK(sidecar.contains("threshold_rule"));
}

TEST_CASE("report re-summarizes written traces") {
    const auto config = load_config(kConfigDir / "default.json");
    const auto run = run_pick_run(config);
    const fs::path dir = fs::temp_directory_path() / "gantry_report_test";
    fs::remove_all(dir);
    write_outputs(run, dir);
    const auto again = run_report(config, {dir / "pick-run" / "pick-run.csv"});
    REQUIRE(again.report.rows.size() == 1);
    // The CSV carries no motion end; it is re-inferred from the desired trace,
    // which moves the window edge by a sample or two.
    CHECK(again.report.rows[0].stats.mean_error ==
          doctest::Approx(run.report.rows[0].stats.mean_error).epsilon(1e-3));

    // A mocap export of the actual trajectory in millimetres, shifted in time.
    std::ostringstream csv;
    csv << "frame,time_s,px,py,pz\n";
    int frame = 0;
    for (const auto& rec : run.traces[0].second.records) {
        csv << frame++ << ',' << rec.t + 2.0 << ',' << rec.actual.position.x() * 1000 << ','
            << rec.actual.position.y() * 1000 << ',' << rec.actual.position.z() * 1000 << '\n';
    }
    std::ofstream(dir / "mocap.csv") << csv.str();
    auto mc = config;
    mc.mocap.columns = {{"t", "time_s"}, {"x", "px"}, {"y", "py"}, {"z", "pz"}};
    mc.mocap.scale = 0.001;
    mc.mocap.time_offset = -2.0;
    const auto cmp = run_report(mc, {}, dir / "mocap.csv", dir / "pick-run" / "pick-run.csv");
    REQUIRE(cmp.report.rows.size() == 1);
    CHECK(cmp.report.rows[0].stats.mean_error ==
          doctest::Approx(run.report.rows[0].stats.mean_error).epsilon(1e-3));
    fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
    auto config = load_config(kConfigDir / "default.json");
    config.singmap.grid.cells = {8, 8, 4};
    using Runner = ScenarioResult (*)(const ScenarioConfig&, const RunOptions&);
    for (Runner run : {Runner{run_axis_test}, Runner{run_pick_run}, Runner{run_speed_verify}, Runner{run_singmap}}) {
        const auto a = run(config, {1, false});
        const auto b = run(config, {1, false});
        const auto c = run(config, {4, true});
        REQUIRE(a.files.size() == c.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i) {
            CHECK(a.files[i].relative_path == c.files[i].relative_path);
            CHECK_MESSAGE(a.files[i].content == b.files[i].content, a.files[i].relative_path);
            CHECK_MESSAGE(a.files[i].content == c.files[i].content, a.files[i].relative_path);
        }
    }
}

}  // TEST_SUITE
