// simulator.hpp - seeded Monte Carlo photon-echo simulator
//
// Two-level emitters with static detunings drawn from the inhomogeneous
// line, evolved through a PulseSequence:
//   - optical pulses are ideal instantaneous rotations (about a fixed axis,
//     applied at the pulse center) acting on ions whose static detuning lies
//     inside the rectangular excitation window pulse_bandwidth,
//   - between events each ion accumulates phase from its static detuning,
//     the sudden-jump bath trajectory and any active Stark gate
//     (k * E * cos(theta)); segments are integrated exactly, event to event,
//   - homogeneous T2 enters as white-frequency-noise phase diffusion
//     calibrated so two-pulse echo intensity decays as exp(-4 tau / T2)
//     (the x = 1 law; a stretch exponent is an analytic-layer concept),
//   - the sudden-jump bath redraws the ion detuning at Poisson rate R from
//     a Lorentzian whose jump distribution has FWHM gamma_sd, reproducing
//     the saturating effective-linewidth term gamma_sd/2 (1 - e^{-R Tw}),
//   - TLS logarithmic broadening is not Monte Carlo simulated.
//
// Determinism: every random draw comes from a counter-based stream keyed by
// (seed, ion index), so results are bit-identical for a fixed seed
// regardless of the worker count; chunk partial sums are reduced in index
// order.
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "echo/types.hpp"

namespace echo::sim {

struct SimConfig {
    int n_ions = 10000;                 // >= 100
    std::uint64_t seed = 1;
    double time_step_s = 8e-9;          // must be <= min pulse duration / 4
    double pulse_bandwidth_hz = 0.0;    // 0 = auto: 1 / min pulse duration
    double detection_bin_s = 8e-9;
    std::uint64_t memory_budget_bytes = 256ull << 20;
    int n_threads = 0;                  // 0 = hardware concurrency
};

/// One emitter of the ensemble (exposed for tests; the simulator streams
/// these, it does not keep the whole ensemble in memory).
struct IonState {
    double static_detuning_hz = 0.0;   // relative to the line center
    double bath_detuning_hz = 0.0;     // piecewise-constant trajectory value
    double dipole_angle_rad = 0.0;
    double amplitude_weight = 1.0;
    double accumulated_phase_rad = 0.0;
    double u = 0.0, v = 0.0, w = -1.0;
};

struct EchoMarker {
    std::string label;
    double time_s = 0.0;
};

struct EchoTrace {
    std::vector<double> times;        // detection bin centers
    std::vector<double> intensity;    // |sum_i w_i (u_i + i v_i)|^2 per bin
    std::vector<EchoMarker> markers;  // expected echo positions within span
};

struct SimStats {
    double max_bloch_norm_drift = 0.0;
    double sum_weights = 0.0;
    double sum_weights_sq = 0.0;
    int n_chunks = 0;
    int n_bins = 0;
    // per-chunk complex bin sums (n_chunks x n_bins, row-major); the basis
    // for deterministic jackknife error estimates
    std::vector<std::complex<double>> chunk_bin_sums;
};

ValidationReport validate(const SimConfig& cfg);

/// Evolve the ensemble through the sequence and histogram the coherent
/// emission into detection bins. Deterministic for a fixed seed. Throws
/// ValidationError on invalid inputs or when the accumulator memory exceeds
/// the configured budget (the message reports required vs allowed bytes).
EchoTrace simulate(const EnsembleSpec& spec, const PulseSequence& seq,
                   const SimConfig& cfg, SimStats* stats = nullptr);

/// Integrated two-pulse echo intensity vs pulse separation tau. The sigma
/// column is a delete-one-chunk jackknife estimate. When the spec carries a
/// superhyperfine modulation, its envelope is applied to the curve.
SweepCurve two_pulse_decay(const EnsembleSpec& spec, const SimConfig& cfg,
                           const std::vector<double>& tau_grid);

struct ThreePulsePoint {
    double t_wait_s = 0.0;
    SweepCurve curve;                 // integrated intensity vs tau
    double gamma_eff_hz = 0.0;        // from the exponential fit of the decay
    double gamma_eff_sigma_hz = 0.0;
};

/// Stimulated-echo sweep: for each waiting time, sweep tau, fit the
/// exponential decay and report the effective linewidth
/// (intensity ~ exp(-4 pi gamma_eff tau)).
std::vector<ThreePulsePoint> three_pulse_sweep(
    const EnsembleSpec& spec, const SimConfig& cfg,
    const std::vector<double>& tau_grid, const std::vector<double>& t_wait_list);

/// Collect the effective linewidths of a sweep into a fittable curve.
SweepCurve gamma_eff_curve(const std::vector<ThreePulsePoint>& points);

struct RecoveryOptions {
    double saturation_duration_s = 1e-3;
    double pump_rate_hz = 2000.0;   // ground -> excited pump rate at unit power
    double power_scale = 1.0;
};

/// Saturation-then-probe population recovery through a three-level rate
/// model (excited state, two ground spin sublevels). The probe echo
/// amplitude is proportional to the addressable ground population, so the
/// output recovers along the double-exponential law with the spec's spin
/// time constants.
SweepCurve saturation_recovery(const EnsembleSpec& spec, const SimConfig& cfg,
                               const std::vector<double>& t_wait_grid,
                               const RecoveryOptions& options = {});

/// Stark-gated echo amplitude vs pulse area (field * length), normalized to
/// the zero-length gate. Ion orientations are weighted by the spec's dipole
/// kernel; the result matches the orientation-integral model within Monte
/// Carlo error.
SweepCurve stark_gated_echo(const EnsembleSpec& spec, const SimConfig& cfg,
                            const std::vector<double>& pulse_lengths,
                            double field_v_per_m);

/// Multiply echo-vs-tau data by 1 - m sin^2(pi f tau).
SweepCurve apply_shf_modulation(const SweepCurve& curve, double depth,
                                double frequency_hz);
EchoTrace apply_shf_modulation(const EchoTrace& trace, double depth,
                               double frequency_hz);

}  // namespace echo::sim
