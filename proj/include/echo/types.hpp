// types.hpp - shared domain vocabulary
//
// All values are SI base units: seconds, hertz (ordinary frequency; every
// linewidth is a FWHM), tesla, volts per meter, kelvin. Types are immutable
// value types in practice: construct, validate, share freely across threads.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "echo/rng.hpp"

namespace echo {

// ---------------------------------------------------------------------------
// Inhomogeneous line
// ---------------------------------------------------------------------------

enum class LineShape { Lorentzian, Gaussian };

struct InhomogeneousLine {
    double center_hz = 0.0;
    double fwhm_hz = 0.0;     // FWHM, ordinary frequency
    LineShape shape = LineShape::Lorentzian;

    // Lorentzian sampling is truncated to bound Monte Carlo variance (the
    // Cauchy distribution has no moments); the physics only needs the core.
    double truncation_fwhm = 50.0;

    /// One detuning sample (absolute frequency, Hz).
    double sample(CounterRng& rng) const;

    /// Sample conditioned on the band [lo, hi] (absolute frequency, Hz).
    double sample_within(CounterRng& rng, double lo, double hi) const;
};

// ---------------------------------------------------------------------------
// Dephasing / bath parameter records
// ---------------------------------------------------------------------------

/// Sudden-jump spin-bath: the ion detuning is redrawn at Poisson times.
/// gamma_sd_hz is the FWHM of the Lorentzian distribution of frequency jumps
/// (the difference between two successive detuning values), which makes the
/// saturated linewidth contribution gamma_sd/2.
struct SuddenJumpBath {
    double flip_rate_hz = 0.0;   // R
    double gamma_sd_hz = 0.0;    // FWHM of the jump distribution
    double tls_rate_hz = 0.0;    // gamma_TLS (analytic layer only)
    double tls_t0_s = 1e-4;      // minimum measurement timescale t0
};

/// Effective-linewidth model parameters: gamma0 + (gamma_sd/2)(1-e^{-R Tw})
/// + gamma_tls * ln(Tw/t0). All ordinary-frequency FWHM values.
struct DephasingParams {
    double gamma0_hz = 0.0;
    double gamma_sd_hz = 0.0;
    double rate_r_hz = 0.0;
    double gamma_tls_hz = 0.0;
    double t0_s = 1e-4;
};

enum class DipoleKernel { Sin4, Cos4, Isotropic };

struct ShfModulation {
    double depth = 0.0;        // m in [0, 1]
    double frequency_hz = 0.0;
};

struct EnsembleSpec {
    InhomogeneousLine line;
    double t1_optical_s = 0.0;
    double t2_optical_s = 0.0;
    double stretch_x = 1.0;          // >= 1; 1 reproduces single-exponential decay
    double spin_t1_short_s = 0.0;
    double spin_t1_long_s = 0.0;
    double short_fraction = 0.5;     // in [0, 1]
    double stark_k = 0.0;            // Hz per (V/m)
    DipoleKernel dipole_kernel = DipoleKernel::Isotropic;
    std::optional<ShfModulation> shf_modulation;
    std::optional<SuddenJumpBath> bath;
};

// ---------------------------------------------------------------------------
// Pulse sequences
// ---------------------------------------------------------------------------

enum class PulseArea { HalfPi, Pi, Saturation };

struct OpticalPulse {
    double start_s = 0.0;
    double duration_s = 0.0;
    PulseArea area = PulseArea::HalfPi;
    double power_scale = 1.0;   // rotation angle scales with sqrt(power)
    double center() const { return start_s + 0.5 * duration_s; }
    double end() const { return start_s + duration_s; }
};

struct StarkGate {
    double start_s = 0.0;
    double duration_s = 0.0;
    double field_v_per_m = 0.0;
    double end() const { return start_s + duration_s; }
};

struct Detect {
    double start_s = 0.0;
    double duration_s = 0.0;
    double end() const { return start_s + duration_s; }
};

using SequenceEvent = std::variant<OpticalPulse, StarkGate, Detect>;

struct PulseSequence {
    std::vector<SequenceEvent> events;   // sorted by start time

    std::vector<OpticalPulse> optical_pulses() const;
    std::vector<StarkGate> stark_gates() const;
    std::vector<Detect> detect_windows() const;
    double end_time() const;

    /// pi/2 - tau - pi with a detection window around the primary echo.
    /// Pulse timing is center-to-center; t0 is the first pulse center.
    static PulseSequence two_pulse_echo(double tau_s, double pulse_duration_s,
                                        double t0_s, double detect_halfwidth_s);

    /// pi/2 - tau - pi/2 - t_wait - pi/2, detection around the stimulated
    /// echo at t0 + 2 tau + t_wait.
    static PulseSequence three_pulse_echo(double tau_s, double t_wait_s,
                                          double pulse_duration_s, double t0_s,
                                          double detect_halfwidth_s);

    /// Two-pulse echo with a Stark gate of the given length between the
    /// pi/2 and pi pulses.
    static PulseSequence stark_gated_echo(double tau_s, double gate_length_s,
                                          double field_v_per_m,
                                          double pulse_duration_s, double t0_s,
                                          double detect_halfwidth_s);
};

// ---------------------------------------------------------------------------
// Data containers
// ---------------------------------------------------------------------------

/// One-dimensional sweep dataset; the common currency between simulator,
/// fitter and CLI. Values are stored in the units named by the tags.
struct SweepCurve {
    std::vector<double> abscissa;
    std::vector<double> ordinate;
    std::vector<double> sigma;       // empty, or same length as ordinate
    std::string abscissa_unit;       // e.g. "s", "us", "Hz", "nm"
    std::string ordinate_unit;       // e.g. "arb", "Hz"
    std::string abscissa_name = "x";
    std::string ordinate_name = "y";
    std::string label;

    std::size_t size() const { return abscissa.size(); }
    bool has_sigma() const { return !sigma.empty(); }

    std::vector<double> abscissa_si() const;
    std::vector<double> ordinate_si() const;
    std::vector<double> sigma_si() const;
};

struct FitResult {
    std::string model_id;
    std::vector<std::string> param_names;
    std::vector<double> params;       // same order as param_names
    std::vector<double> covariance;   // k x k, row-major
    double residual_norm = 0.0;       // sqrt(sum of squared residuals)
    int n_points = 0;
    bool converged = false;
    std::string message;
    std::map<std::string, std::string> metadata;  // conventions, frozen params

    std::size_t n_params() const { return params.size(); }
    double param(const std::string& name) const;
    /// 1-sigma uncertainty from the covariance diagonal.
    double sigma(const std::string& name) const;
    double cov(std::size_t i, std::size_t j) const;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string joined() const;
};

ValidationReport validate(const EnsembleSpec& spec);
ValidationReport validate(const PulseSequence& seq);
ValidationReport validate(const DephasingParams& params);
ValidationReport validate(const SweepCurve& curve);

/// Throw ValidationError when the report is non-empty.
void require_valid(const ValidationReport& report, const std::string& what);

}  // namespace echo
