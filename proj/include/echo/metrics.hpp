// metrics.hpp - design-study calculators: optical-depth scaling, echo
// silencing feasibility, and capability reports
#pragma once

#include <optional>
#include <string>

#include "echo/analytic.hpp"
#include "echo/types.hpp"

namespace echo::metrics {

struct DeviceGeometry {
    double doped_thickness_m = 0.0;
    double er_density_ppm = 0.0;
    double waveguide_length_m = 0.0;
    double electrode_gap_m = 0.0;
    double applied_voltage_v = 0.0;
    // effective-field factor (dielectric screening of embedded electrodes);
    // 1 for external plates
    double field_scale = 1.0;
};

ValidationReport validate(const DeviceGeometry& geom);

/// Linear optical-depth scaling in density, doped-layer thickness and
/// waveguide length. The thickness term treats mode overlap as linear,
/// which slightly overestimates thick layers.
double scale_od(double base_od, const DeviceGeometry& base,
                const DeviceGeometry& target);

struct SemmReport {
    double field_v_per_m = 0.0;
    double extinction_time_s = 0.0;
    int recalls_within_t2 = 0;   // floor(T2 / (2 * extinction_time))
    double target = 1.0;
};

/// Echo-silencing feasibility: field from the electrode geometry, extinction
/// time from the orientation-integral model, and a coarse bound on how many
/// silence/recall cycles fit into the optical T2.
SemmReport semm_feasibility(const EnsembleSpec& spec,
                            const DeviceGeometry& geom,
                            const model::StarkKernel& kernel,
                            double target = 1.0);

struct CapabilityReport {
    model::MemoryMetrics metrics;
    std::optional<SemmReport> semm;
    std::optional<double> scaled_od;        // when a target geometry is given
    std::optional<double> spin_t2_projection_s;
    std::string flags;                      // approximation notes
};

/// Table-style capability record for an ensemble spec and a measured or
/// projected optical depth.
CapabilityReport capability_report(
    const EnsembleSpec& spec, double od, double purcell_factor = 1.0,
    const std::optional<DeviceGeometry>& geom = std::nullopt,
    const std::optional<DeviceGeometry>& target_geom = std::nullopt,
    const std::optional<double>& spin_t2_projection_s = std::nullopt);

/// Fixed-width text rendering of the report.
std::string to_text(const CapabilityReport& report);

}  // namespace echo::metrics
