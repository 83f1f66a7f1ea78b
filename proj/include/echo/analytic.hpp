// analytic.hpp - closed-form models: decay laws, linewidth relations,
// orientation-averaged Stark response, recovery curves, efficiency relations.
//
// All functions are pure; frequencies are ordinary (not angular) and
// linewidths are FWHM.
#pragma once

#include "echo/types.hpp"

namespace echo::model {

// ---------------------------------------------------------------------------
// Linewidths and decay laws
// ---------------------------------------------------------------------------

/// gamma_h = 1 / (pi T2). Throws std::domain_error for t2 <= 0.
double homogeneous_linewidth(double t2_s);

/// I = I0 * exp(-((4 tau)/T2)^x). The stretch exponent applies to the whole
/// ratio (Mims convention); for x = 1 both readings of the printed form
/// coincide. Preconditions: t2 > 0, x >= 1, tau >= 0.
double echo_decay(double tau_s, double i0, double t2_s, double x);

/// Linear TLS broadening gamma_h = gamma0' + alpha * T.
double temperature_broadening(double temp_k, double gamma0p_hz,
                              double alpha_hz_per_k);

/// Effective linewidth after a waiting time:
///   gamma = gamma0 + (gamma_sd/2)(1 - exp(-R Tw)) + gamma_tls * ln(Tw/t0).
/// The log is the natural logarithm (see kLogConvention). Requires
/// t_wait >= t0.
double effective_linewidth(const DephasingParams& params, double t_wait_s);

/// Saturation value of the paramagnetic term: gamma0 + gamma_sd / 2.
double paramagnetic_asymptote(const DephasingParams& params);

/// Logarithm convention used by effective_linewidth, recorded in fit
/// metadata so results are reproducible under either convention.
inline constexpr const char* kLogConvention = "ln";

/// a_inf - a_short * exp(-t/T1_short) - a_long * exp(-t/T1_long).
double double_exp_recovery(double t_wait_s, double a_inf, double a_short,
                           double t1_short_s, double a_long, double t1_long_s);

/// offset + amplitude * (fwhm/2)^2 / ((x-center)^2 + (fwhm/2)^2).
double lorentzian(double x, double center, double fwhm, double amplitude,
                  double offset);

// ---------------------------------------------------------------------------
// Stark orientation integrals
// ---------------------------------------------------------------------------

enum class KernelForm { Sin4, Cos4 };

struct StarkKernel {
    KernelForm form = KernelForm::Sin4;
    double normalization = 0.0;   // integral of the weight over [0, pi/2]
};

/// Kernel with its analytic normalization (3 pi / 16 for both forms).
StarkKernel make_stark_kernel(KernelForm form);

/// Map an ensemble dipole kernel onto a Stark kernel; Isotropic has no
/// orientation-integral counterpart and throws.
StarkKernel stark_kernel_for(DipoleKernel kernel);

/// Normalized amplitude as a function of the dephasing angle z = 2 pi k E t:
///   A(z) = (16 / 3 pi) * Int_0^{pi/2} cos(z cos th) w(th) dth,
/// with w = sin^4 or cos^4. Even in z, A(0) = 1, |A| <= 1. Evaluated by
/// Gauss-Legendre quadrature with order escalation to 1e-9 absolute error.
double stark_amplitude_z(double z, KernelForm form);

/// Derivative dA/dz, by the same quadrature (used for fit Jacobians).
double stark_amplitude_z_derivative(double z, KernelForm form);

/// Normalized echo amplitude for a Stark pulse area (field * time, (V/m)*s)
/// and coefficient k (Hz per (V/m)). Requires pulse_area >= 0.
double stark_echo_amplitude(double pulse_area, double stark_k,
                            const StarkKernel& kernel);

/// Smallest pulse length t such that |A(field * t)| <= 1 - target, found by
/// grid bracketing (256 points per oscillation period) plus bisection.
/// target = 1 asks for complete extinction (the first zero of A).
/// max_pulse_area limits the search; 0 selects an automatic bound. Throws
/// std::runtime_error reporting the achieved minimum when unreachable.
double stark_extinction_time(double field_v_per_m, double stark_k,
                             const StarkKernel& kernel, double target,
                             double max_pulse_area = 0.0);

// ---------------------------------------------------------------------------
// Optical depth and memory metrics
// ---------------------------------------------------------------------------

enum class EfficiencyForm { PaperApprox, Exact };

struct EchoEfficiency {
    double paper_approx = 0.0;   // (OD/4)^2, matches the printed OD estimate
    double exact = 0.0;          // (2 sinh(OD/2))^2
    double value(EfficiencyForm form) const {
        return form == EfficiencyForm::PaperApprox ? paper_approx : exact;
    }
};

/// Both efficiency forms for a given optical depth (od >= 0). The two
/// disagree by a factor 16 at small OD; both are reported so the
/// discrepancy stays visible.
EchoEfficiency echo_efficiency_from_od(double od);

/// Inverse of the selected form. PaperApprox: OD = 4 sqrt(eta).
double od_from_efficiency(double eta, EfficiencyForm form);

struct MemoryMetrics {
    double storage_time_s = 0.0;          // ensemble bound: optical T2
    double bandwidth_ensemble_hz = 0.0;   // inhomogeneous linewidth
    double inverse_t1_hz = 0.0;           // raw 1 / T1,opt
    double purcell_factor = 1.0;
    double single_ion_bandwidth_hz = 0.0; // purcell_factor / T1,opt
    double od = 0.0;
    double efficiency_paper = 0.0;
    double efficiency_exact = 0.0;
};

/// Capability numbers from an ensemble spec and an optical depth. The
/// single-ion bandwidth follows the 1/T1 convention; a Purcell factor can
/// be applied but none is assumed by default.
MemoryMetrics memory_metrics(const EnsembleSpec& spec, double od,
                             double purcell_factor = 1.0);

}  // namespace echo::model
