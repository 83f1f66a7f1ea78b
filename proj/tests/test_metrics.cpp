#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "echo/errors.hpp"
#include "echo/metrics.hpp"
#include "echo/units.hpp"

using namespace echo;
using namespace echo::metrics;

namespace {

DeviceGeometry measured_geometry() {
    DeviceGeometry g;
    g.doped_thickness_m = units::parse_si("50 nm");
    g.er_density_ppm = 50.0;
    g.waveguide_length_m = units::parse_si("0.486 cm");
    g.electrode_gap_m = units::parse_si("2.5 mm");
    g.applied_voltage_v = 10.0;
    return g;
}

EnsembleSpec chip_spec() {
    EnsembleSpec spec;
    spec.line = {0.0, 36e9, LineShape::Lorentzian};
    spec.t1_optical_s = 2.8e-3;
    spec.t2_optical_s = 64.1e-6;
    spec.spin_t1_short_s = 9.4e-3;
    spec.spin_t1_long_s = 1.63;
    spec.stark_k = units::parse_si("5.8 kHz/(V/cm)");
    spec.dipole_kernel = DipoleKernel::Sin4;
    return spec;
}

}  // namespace

TEST_CASE("od scaling reaches unity at the projected geometry") {
    const DeviceGeometry base = measured_geometry();
    DeviceGeometry target = base;
    target.er_density_ppm = 150.0;                       // x3 density
    target.doped_thickness_m = units::parse_si("120 nm");  // thicker layer
    target.waveguide_length_m = units::parse_si("5 cm");    // longer guide

    CHECK(scale_od(0.0155, base, base) == doctest::Approx(0.0155));
    const double od = scale_od(0.0155, base, target);
    CHECK(od == doctest::Approx(1.148).epsilon(0.01));
    CHECK(od >= 1.0);

    DeviceGeometry half = base;
    half.waveguide_length_m *= 0.5;
    CHECK(scale_od(0.0155, base, half) ==
          doctest::Approx(0.5 * 0.0155).epsilon(1e-12));
}

TEST_CASE("od scaling is multiplicative under composition") {
    const DeviceGeometry base = measured_geometry();
    DeviceGeometry mid = base;
    mid.er_density_ppm *= 2.0;
    DeviceGeometry far = mid;
    far.doped_thickness_m *= 1.7;
    far.waveguide_length_m *= 3.0;
    const double direct = scale_od(0.0155, base, far);
    const double staged = scale_od(scale_od(0.0155, base, mid), mid, far);
    CHECK(direct == doctest::Approx(staged).epsilon(1e-12));
}

TEST_CASE("semm feasibility at the measured electrode geometry") {
    // 10 V across 2.5 mm plates: 40 V/cm; 90% extinction takes ~3 us
    const auto spec = chip_spec();
    const auto rep = semm_feasibility(
        spec, measured_geometry(), model::make_stark_kernel(model::KernelForm::Sin4),
        0.9);
    CHECK(rep.field_v_per_m == doctest::Approx(4000.0));
    CHECK(std::abs(rep.extinction_time_s - 3e-6) / 3e-6 < 0.20);
}

TEST_CASE("semm feasibility for on-chip electrodes") {
    // 40 V across a 0.2 mm gap embedded in oxide: the effective field is
    // screened to ~500 V/cm, giving complete extinction in ~95 ns and
    // hundreds of recall slots inside the 64 us coherence window
    auto spec = chip_spec();
    spec.dipole_kernel = DipoleKernel::Cos4;
    DeviceGeometry chip = measured_geometry();
    chip.electrode_gap_m = units::parse_si("0.2 mm");
    chip.applied_voltage_v = 40.0;
    chip.field_scale = 0.25;
    const auto rep = semm_feasibility(
        spec, chip, model::make_stark_kernel(model::KernelForm::Cos4), 1.0);
    CHECK(rep.field_v_per_m == doctest::Approx(units::parse_si("500 V/cm")));
    CHECK(std::abs(rep.extinction_time_s - 95e-9) / 95e-9 < 0.20);
    CHECK(rep.recalls_within_t2 > 100);
}

TEST_CASE("extinction time doubles when the gap doubles") {
    const auto spec = chip_spec();
    DeviceGeometry g = measured_geometry();
    const auto kernel = model::make_stark_kernel(model::KernelForm::Sin4);
    const auto r1 = semm_feasibility(spec, g, kernel, 0.9);
    g.electrode_gap_m *= 2.0;
    const auto r2 = semm_feasibility(spec, g, kernel, 0.9);
    CHECK(r2.extinction_time_s ==
          doctest::Approx(2.0 * r1.extinction_time_s).epsilon(2e-3));
}

TEST_CASE("capability report mirrors the published capability table") {
    const auto spec = chip_spec();
    const auto rep = capability_report(spec, 0.0155, 1.0, measured_geometry());
    CHECK(rep.metrics.storage_time_s == doctest::Approx(64.1e-6));
    CHECK(rep.metrics.bandwidth_ensemble_hz == doctest::Approx(36e9));
    CHECK(rep.metrics.efficiency_paper == doctest::Approx(1.5e-5).epsilon(0.01));
    REQUIRE(rep.semm.has_value());
    const std::string text = to_text(rep);
    CHECK(text.find("storage time") != std::string::npos);
    CHECK(text.find("36 GHz") != std::string::npos);
}

TEST_CASE("zeroed spec yields an empty-but-valid report") {
    EnsembleSpec zero;
    const auto rep = capability_report(zero, 0.0);
    CHECK(rep.metrics.od == 0.0);
    CHECK(rep.metrics.efficiency_paper == 0.0);
    CHECK(rep.metrics.inverse_t1_hz == 0.0);
    CHECK_FALSE(rep.semm.has_value());
    CHECK_NOTHROW(to_text(rep));
}

TEST_CASE("geometry validation") {
    DeviceGeometry g;  // all zero
    CHECK_FALSE(metrics::validate(g).ok());
    CHECK(metrics::validate(measured_geometry()).ok());
    CHECK_THROWS_AS(scale_od(0.01, g, measured_geometry()), ValidationError);
}
