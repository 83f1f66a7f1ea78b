#include "echo/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "echo/errors.hpp"

namespace echo::metrics {

ValidationReport validate(const DeviceGeometry& geom) {
    ValidationReport r;
    auto add = [&r](const std::string& m) { r.violations.push_back(m); };
    if (!(geom.doped_thickness_m > 0)) add("doped_thickness must be > 0");
    if (!(geom.er_density_ppm > 0)) add("er_density_ppm must be > 0");
    if (!(geom.waveguide_length_m > 0)) add("waveguide_length must be > 0");
    if (!(geom.electrode_gap_m > 0)) add("electrode_gap must be > 0");
    if (!(geom.applied_voltage_v > 0)) add("applied_voltage must be > 0");
    if (!(geom.field_scale > 0)) add("field_scale must be > 0");
    return r;
}

double scale_od(double base_od, const DeviceGeometry& base,
                const DeviceGeometry& target) {
    require_valid(validate(base), "scale_od: base geometry");
    require_valid(validate(target), "scale_od: target geometry");
    return base_od * (target.er_density_ppm / base.er_density_ppm) *
           (target.doped_thickness_m / base.doped_thickness_m) *
           (target.waveguide_length_m / base.waveguide_length_m);
}

SemmReport semm_feasibility(const EnsembleSpec& spec,
                            const DeviceGeometry& geom,
                            const model::StarkKernel& kernel, double target) {
    require_valid(echo::validate(spec), "semm_feasibility: spec");
    require_valid(validate(geom), "semm_feasibility: geometry");
    SemmReport rep;
    rep.target = target;
    rep.field_v_per_m =
        geom.applied_voltage_v / geom.electrode_gap_m * geom.field_scale;
    rep.extinction_time_s = model::stark_extinction_time(
        rep.field_v_per_m, spec.stark_k, kernel, target);
    rep.recalls_within_t2 = static_cast<int>(
        std::floor(spec.t2_optical_s / (2.0 * rep.extinction_time_s)));
    return rep;
}

CapabilityReport capability_report(
    const EnsembleSpec& spec, double od, double purcell_factor,
    const std::optional<DeviceGeometry>& geom,
    const std::optional<DeviceGeometry>& target_geom,
    const std::optional<double>& spin_t2_projection_s) {
    CapabilityReport rep;
    rep.metrics = model::memory_metrics(spec, od, purcell_factor);
    rep.spin_t2_projection_s = spin_t2_projection_s;
    if (geom && validate(*geom).ok()) {
        if (spec.stark_k > 0 && spec.dipole_kernel != DipoleKernel::Isotropic) {
            rep.semm = semm_feasibility(spec, *geom,
                                        model::stark_kernel_for(spec.dipole_kernel));
        }
        if (target_geom) {
            rep.scaled_od = scale_od(od, *geom, *target_geom);
            rep.flags = "od scaling treats mode overlap as linear in the "
                        "doped-layer thickness (overestimates thick layers)";
        }
    }
    return rep;
}

namespace {

std::string format_si(double value, const char* unit) {
    std::ostringstream os;
    os << std::setprecision(3) << value << " " << unit;
    return os.str();
}

}  // namespace

std::string to_text(const CapabilityReport& report) {
    std::ostringstream os;
    const auto& m = report.metrics;
    os << "capability report\n";
    os << "  storage time (optical T2)   : "
       << format_si(m.storage_time_s * 1e6, "us") << "\n";
    os << "  ensemble bandwidth (Ginh)   : "
       << format_si(m.bandwidth_ensemble_hz / 1e9, "GHz") << "\n";
    os << "  single-ion 1/T1             : "
       << format_si(m.inverse_t1_hz, "Hz") << "\n";
    os << "  single-ion bandwidth        : "
       << format_si(m.single_ion_bandwidth_hz, "Hz") << " (purcell factor "
       << m.purcell_factor << ")\n";
    os << "  optical depth               : " << m.od << "\n";
    os << "  echo efficiency (od/4)^2    : " << m.efficiency_paper << "\n";
    os << "  echo efficiency exact       : " << m.efficiency_exact << "\n";
    if (report.spin_t2_projection_s) {
        os << "  spin T2 (projected)         : "
           << format_si(*report.spin_t2_projection_s * 1e3, "ms")
           << " [projection, user-supplied]\n";
    }
    if (report.semm) {
        os << "  semm field                  : "
           << format_si(report.semm->field_v_per_m / 100.0, "V/cm") << "\n";
        os << "  semm extinction time        : "
           << format_si(report.semm->extinction_time_s * 1e9, "ns")
           << " (target " << report.semm->target << ")\n";
        os << "  semm recalls within T2      : " << report.semm->recalls_within_t2
           << "\n";
    }
    if (report.scaled_od) {
        os << "  scaled optical depth        : " << *report.scaled_od << "\n";
    }
    if (!report.flags.empty()) os << "  note: " << report.flags << "\n";
    return os.str();
}

}  // namespace echo::metrics
