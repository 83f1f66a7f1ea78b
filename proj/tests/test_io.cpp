#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "echo/errors.hpp"
#include "echo/io/config.hpp"
#include "echo/io/dataset.hpp"
#include "echo/io/manifest.hpp"
#include "echo/io/svg.hpp"
#include "echo/rng.hpp"

using namespace echo;
namespace fs = std::filesystem;

namespace {

SweepCurve sample_curve() {
    SweepCurve c;
    c.abscissa = {5e-7, 1e-6, 2e-6};
    c.ordinate = {1.25, 0.5, 0.125};
    c.sigma = {0.01, 0.01, 0.01};
    c.abscissa_unit = "s";
    c.ordinate_unit = "arb";
    c.abscissa_name = "tau";
    c.ordinate_name = "echo_intensity";
    c.label = "sample";
    return c;
}

const std::string kRunConfig = R"(# two-pulse decay run
[ensemble]
line_fwhm = 36 GHz
t1_optical = 2.8 ms
t2_optical = 64.1 us
spin_t1_short = 9.4 ms
spin_t1_long = 0.53 s
stark_k = 5.8 kHz/(V/cm)
dipole_kernel = isotropic

[sim]
n_ions = 2048
seed = 7

[experiment]
type = two_pulse_decay
tau_start = 1 us
tau_stop = 40 us
tau_points = 6

[output]
prefix = decay
)";

}  // namespace

TEST_CASE("curve serialization round-trips bit-exactly") {
    CounterRng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        SweepCurve c;
        const int n = 3 + static_cast<int>(rng.uniform(0, 20));
        for (int i = 0; i < n; ++i) {
            c.abscissa.push_back(rng.uniform(-1e6, 1e6) *
                                 std::pow(10.0, rng.uniform(-12, 3)));
            c.ordinate.push_back(rng.uniform(-1, 1) *
                                 std::pow(10.0, rng.uniform(-12, 6)));
        }
        const bool with_sigma = trial % 2;
        if (with_sigma)
            for (int i = 0; i < n; ++i) c.sigma.push_back(rng.uniform(0.1, 2.0));
        c.abscissa_unit = "us";
        c.ordinate_unit = "counts";
        c.label = "trial";
        const std::string text = io::curve_to_string(c);
        const SweepCurve back = io::read_curve_string(text);
        REQUIRE(back.size() == c.size());
        for (int i = 0; i < n; ++i) {
            CHECK(back.abscissa[i] == c.abscissa[i]);
            CHECK(back.ordinate[i] == c.ordinate[i]);
            if (with_sigma) CHECK(back.sigma[i] == c.sigma[i]);
        }
        CHECK(back.abscissa_unit == "us");
        CHECK(back.label == "trial");
        // serialization is deterministic
        CHECK(io::curve_to_string(back) == text);
    }
}

TEST_CASE("dataset parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(io::read_curve_string("tau, echo(arb)\n1, 2\n", "f"),
                         doctest::Contains("f:1"), IoError);
    CHECK_THROWS_WITH_AS(
        io::read_curve_string("tau(s), echo(arb)\n1, banana\n", "f"),
        doctest::Contains("f:2"), IoError);
    CHECK_THROWS_WITH_AS(
        io::read_curve_string("tau(s), echo(arb)\n1, 2, 3\n", "f"),
        doctest::Contains("expected 2 values"), IoError);
    CHECK_THROWS_WITH_AS(io::read_curve_string("# only comments\n", "f"),
                         doctest::Contains("no header"), IoError);
    CHECK_THROWS_WITH_AS(
        io::read_curve_string("tau(fortnights), echo(arb)\n1, 2\n", "f"),
        doctest::Contains("unknown unit"), IoError);
}

TEST_CASE("trace serialization keeps markers as comments") {
    sim::EchoTrace trace;
    trace.times = {1e-7, 2e-7, 3e-7};
    trace.intensity = {0.0, 5.0, 1.0};
    trace.markers = {{"primary_echo", 2e-7}};
    const std::string text = io::trace_to_string(trace);
    CHECK(text.find("# marker: primary_echo") != std::string::npos);
    const SweepCurve curve = io::read_curve_string(text);
    CHECK(curve.size() == 3);
    CHECK(curve.ordinate[1] == 5.0);
}

TEST_CASE("config parsing: sections, units, comments") {
    const auto cfg = io::parse_config_string(kRunConfig, "run.cfg");
    CHECK(cfg.require("ensemble", "line_fwhm") == "36 GHz");
    CHECK(cfg.require_si("ensemble", "t2_optical") ==
          doctest::Approx(64.1e-6));
    const auto run = io::parse_run_config(cfg);
    CHECK(run.ensemble.t2_optical_s == doctest::Approx(64.1e-6));
    CHECK(run.sim.n_ions == 2048);
    CHECK(run.experiment.tau_grid.size() == 6);
    CHECK(run.experiment.tau_grid.front() == doctest::Approx(1e-6));
    CHECK(run.experiment.tau_grid.back() == doctest::Approx(40e-6));
    CHECK(run.output_prefix == "decay");
}

TEST_CASE("config errors are located and named") {
    CHECK_THROWS_WITH_AS(io::parse_config_string("key = 1\n", "f"),
                         doctest::Contains("outside any [section]"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(
        io::parse_config_string("[a]\nx = 1\nx = 2\n", "f"),
        doctest::Contains("duplicate key"), ValidationError);
    CHECK_THROWS_WITH_AS(io::parse_config_string("[a\nx = 1\n", "f"),
                         doctest::Contains("f:1"), ValidationError);

    // unknown keys are rejected with their location
    std::string bad = kRunConfig;
    bad += "\n[sim]\n";  // duplicate section continues the map
    bad.replace(bad.find("n_ions"), 6, "n_oins");
    const auto cfg = io::parse_config_string(bad, "run.cfg");
    CHECK_THROWS_WITH_AS(io::parse_run_config(cfg),
                         doctest::Contains("n_oins"), ValidationError);

    // bad unit names the key and the line
    std::string badunit = kRunConfig;
    badunit.replace(badunit.find("36 GHz"), 6, "36 parsecs");
    CHECK_THROWS_WITH_AS(
        io::parse_run_config(io::parse_config_string(badunit, "run.cfg")),
        doctest::Contains("line_fwhm"), ValidationError);

    // unknown fit model id is named
    std::string badmodel = kRunConfig;
    badmodel += "\n[fit]\nmodel = echo_decat\n";
    CHECK_THROWS_WITH_AS(
        io::parse_run_config(io::parse_config_string(badmodel, "run.cfg")),
        doctest::Contains("echo_decat"), ValidationError);
}

TEST_CASE("experiment grids: explicit lists and log spacing") {
    std::string text = kRunConfig;
    text.replace(text.find("tau_start = 1 us\ntau_stop = 40 us\ntau_points = 6"),
                 std::string("tau_start = 1 us\ntau_stop = 40 us\ntau_points = 6")
                     .size(),
                 "tau_grid = 1 us, 2 us, 5 us");
    const auto run =
        io::parse_run_config(io::parse_config_string(text, "run.cfg"));
    REQUIRE(run.experiment.tau_grid.size() == 3);
    CHECK(run.experiment.tau_grid[2] == doctest::Approx(5e-6));

    std::string logged = kRunConfig;
    logged.replace(logged.find("tau_points = 6"),
                   std::string("tau_points = 6").size(),
                   "tau_points = 5\ntau_spacing = log");
    const auto run2 =
        io::parse_run_config(io::parse_config_string(logged, "run.cfg"));
    CHECK(run2.experiment.tau_grid[1] / run2.experiment.tau_grid[0] ==
          doctest::Approx(std::pow(40.0, 0.25)).epsilon(1e-9));
}

TEST_CASE("manifest hash covers config text and seed") {
    const std::string h1 = io::config_hash(kRunConfig, 7);
    CHECK(h1 == io::config_hash(kRunConfig, 7));
    CHECK(h1 != io::config_hash(kRunConfig, 8));
    std::string other = kRunConfig;
    other.replace(other.find("64.1 us"), 7, "64.2 us");
    CHECK(h1 != io::config_hash(other, 7));

    io::Manifest m;
    m.config_hash = h1;
    m.seed = 7;
    m.outputs = {"decay.csv"};
    const std::string j = io::manifest_to_json(m);
    CHECK(j.find("fnv1a64:") != std::string::npos);
    CHECK(j.find("decay.csv") != std::string::npos);
    CHECK(io::manifest_to_json(m) == j);
}

TEST_CASE("svg rendering") {
    io::PlotSeries series;
    series.data = sample_curve();
    series.overlay_x = {5e-7, 1e-6, 2e-6};
    series.overlay_y = {1.2, 0.55, 0.12};
    io::PlotOptions options;
    options.title = "decay";
    options.provenance = "manifest_hash: fnv1a64:deadbeef";
    const std::string svg = io::render_svg({series}, options);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("deadbeef") != std::string::npos);
    CHECK(svg.find("tau (s)") != std::string::npos);
    // deterministic bytes
    CHECK(io::render_svg({series}, options) == svg);

    io::PlotOptions log_options;
    log_options.log_x = true;
    const std::string svg_log = io::render_svg({series}, log_options);
    CHECK(svg_log.find("[log]") != std::string::npos);
}

TEST_CASE("svg rejects empty and mixed-unit inputs without writing") {
    io::PlotSeries empty;
    empty.data.abscissa_unit = "s";
    empty.data.ordinate_unit = "arb";
    CHECK_THROWS_AS(io::render_svg({empty}, {}), ValidationError);

    io::PlotSeries a, b;
    a.data = sample_curve();
    b.data = sample_curve();
    b.data.abscissa_unit = "K";  // time vs temperature on one axis
    CHECK_THROWS_AS(io::render_svg({a, b}, {}), UnitError);

    const fs::path path = fs::temp_directory_path() / "echo_empty_plot.svg";
    std::error_code ec;
    fs::remove(path, ec);
    CHECK_THROWS_AS(io::write_svg(path, {empty}, {}), ValidationError);
    CHECK_FALSE(fs::exists(path));
}

TEST_CASE("file round trip through the filesystem") {
    const fs::path dir = fs::temp_directory_path() / "echo_io_test";
    fs::create_directories(dir);
    const fs::path path = dir / "curve.csv";
    const SweepCurve c = sample_curve();
    io::write_curve(path, c, {"manifest_hash: fnv1a64:123"});
    const SweepCurve back = io::read_curve(path);
    CHECK(back.size() == c.size());
    CHECK(back.ordinate[0] == c.ordinate[0]);
    CHECK_THROWS_AS(io::read_curve(dir / "missing.csv"), IoError);
}
