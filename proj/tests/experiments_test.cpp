#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "bridgesim/experiments.hpp"
#include "bridgesim/io.hpp"

using namespace bridgesim;
namespace fs = std::filesystem;

namespace {

ExperimentSpec make_spec(const std::string& name, uint64_t seed, const std::string& dir) {
    ExperimentSpec spec;
    spec.name = name;
    spec.seed = seed;
    spec.config.seed = seed;
    spec.out_dir = dir;
    return spec;
}

void expect_identical_dirs(const fs::path& a, const fs::path& b) {
    size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        CAPTURE(name.string());
        REQUIRE(fs::exists(b / name));
        CHECK(read_text_file((a / name).string()) == read_text_file((b / name).string()));
        ++files;
    }
    CHECK(files > 0);
}

}  // namespace

TEST_CASE("every experiment is byte-deterministic for a fixed config and seed") {
    const fs::path base = fs::temp_directory_path() / "bridgesim_det";
    fs::remove_all(base);
    for (const auto& name : experiment_names()) {
        CAPTURE(name);
        const auto dir_a = base / (name + "_a");
        const auto dir_b = base / (name + "_b");
        run_experiment(make_spec(name, 42, dir_a.string()));
        run_experiment(make_spec(name, 42, dir_b.string()));
        expect_identical_dirs(dir_a, dir_b);
    }
}

TEST_CASE("different seeds change the outputs") {
    const fs::path base = fs::temp_directory_path() / "bridgesim_seeded";
    fs::remove_all(base);
    run_experiment(make_spec("transport", 1, (base / "s1").string()));
    run_experiment(make_spec("transport", 2, (base / "s2").string()));
    CHECK(read_text_file((base / "s1" / "transit_ms.csv").string()) !=
          read_text_file((base / "s2" / "transit_ms.csv").string()));
}

TEST_CASE("unknown experiment is rejected") {
    CHECK_THROWS_AS(run_experiment(make_spec("warp_drive", 1, "/tmp/x")),
                    std::invalid_argument);
}

TEST_CASE("wall clock is rejected outside the tracking demo") {
    auto spec = make_spec("transport", 1, "/tmp/x");
    spec.config.clock = "wall";
    CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
}

TEST_CASE("reports are self-describing") {
    const fs::path dir = fs::temp_directory_path() / "bridgesim_selfdesc";
    fs::remove_all(dir);
    auto res = run_experiment(make_spec("latency_modes", 99, dir.string()));
    CHECK(res.summary.find("seed: 99") != std::string::npos);
    CHECK(res.summary.find("\"base_ms\": 22.0") != std::string::npos);
    CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("tracking experiment satisfies the headline ordering") {
    const fs::path dir = fs::temp_directory_path() / "bridgesim_tracking";
    fs::remove_all(dir);
    const auto traj = tracking_test_trajectory();
    SimConfig cfg;
    cfg.seed = 5;
    const auto raw = run_tracking_mode(cfg, "10hz_raw", traj);
    const auto interp = run_tracking_mode(cfg, "200hz_interp", traj);
    const auto single = run_tracking_mode(cfg, "single_request", traj);
    CHECK(raw.report.worst_std() >= 10.0 * interp.report.worst_std());
    CHECK(raw.report.worst_std() >= 10.0 * single.report.worst_std());
    CHECK(interp.report.worst_std() < 0.2);
    CHECK(single.report.worst_std() < 0.2);
}
