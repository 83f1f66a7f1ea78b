#include "echo/analytic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "echo/quadrature.hpp"

namespace echo::model {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kQuadTol = 1e-9;        // absolute error on the normalized A
constexpr double kKernelNorm = 3.0 * std::numbers::pi / 16.0;

double kernel_weight(double theta, KernelForm form) {
    const double c = (form == KernelForm::Sin4) ? std::sin(theta)
                                                : std::cos(theta);
    const double c2 = c * c;
    return c2 * c2;
}

int start_order_for(double z) {
    // The integrand oscillates ~ z/(2 pi) times over [0, pi/2]; Gauss-Legendre
    // needs a handful of points per oscillation.
    const double est = std::abs(z) * 0.75 + 32.0;
    int order = 32;
    while (order < est && order < 8192) order *= 2;
    return order;
}

}  // namespace

double homogeneous_linewidth(double t2_s) {
    if (!(t2_s > 0)) throw std::domain_error("homogeneous_linewidth: t2 must be > 0");
    return 1.0 / (kPi * t2_s);
}

double echo_decay(double tau_s, double i0, double t2_s, double x) {
    if (!(t2_s > 0)) throw std::domain_error("echo_decay: t2 must be > 0");
    if (!(x >= 1.0)) throw std::domain_error("echo_decay: x must be >= 1");
    if (!(tau_s >= 0)) throw std::domain_error("echo_decay: tau must be >= 0");
    return i0 * std::exp(-std::pow(4.0 * tau_s / t2_s, x));
}

double temperature_broadening(double temp_k, double gamma0p_hz,
                              double alpha_hz_per_k) {
    if (!(temp_k >= 0)) throw std::domain_error("temperature_broadening: T must be >= 0");
    if (!(alpha_hz_per_k >= 0))
        throw std::domain_error("temperature_broadening: alpha must be >= 0");
    return gamma0p_hz + alpha_hz_per_k * temp_k;
}

double effective_linewidth(const DephasingParams& params, double t_wait_s) {
    require_valid(validate(params), "effective_linewidth");
    if (!(t_wait_s >= params.t0_s)) {
        std::ostringstream os;
        os << "effective_linewidth: t_wait (" << t_wait_s
           << " s) must be >= t0 (" << params.t0_s << " s)";
        throw std::domain_error(os.str());
    }
    const double bath = 0.5 * params.gamma_sd_hz *
                        (1.0 - std::exp(-params.rate_r_hz * t_wait_s));
    const double tls = params.gamma_tls_hz * std::log(t_wait_s / params.t0_s);
    return params.gamma0_hz + bath + tls;
}

double paramagnetic_asymptote(const DephasingParams& params) {
    return params.gamma0_hz + 0.5 * params.gamma_sd_hz;
}

double double_exp_recovery(double t_wait_s, double a_inf, double a_short,
                           double t1_short_s, double a_long, double t1_long_s) {
    if (!(t1_short_s > 0) || !(t1_long_s > 0))
        throw std::domain_error("double_exp_recovery: time constants must be > 0");
    return a_inf - a_short * std::exp(-t_wait_s / t1_short_s) -
           a_long * std::exp(-t_wait_s / t1_long_s);
}

double lorentzian(double x, double center, double fwhm, double amplitude,
                  double offset) {
    if (!(fwhm > 0)) throw std::domain_error("lorentzian: fwhm must be > 0");
    const double hw = 0.5 * fwhm;
    const double dx = x - center;
    return offset + amplitude * hw * hw / (dx * dx + hw * hw);
}

// ---------------------------------------------------------------------------
// Stark orientation integrals
// ---------------------------------------------------------------------------

StarkKernel make_stark_kernel(KernelForm form) {
    return StarkKernel{form, kKernelNorm};
}

StarkKernel stark_kernel_for(DipoleKernel kernel) {
    switch (kernel) {
        case DipoleKernel::Sin4: return make_stark_kernel(KernelForm::Sin4);
        case DipoleKernel::Cos4: return make_stark_kernel(KernelForm::Cos4);
        case DipoleKernel::Isotropic:
            throw std::domain_error(
                "isotropic dipole kernel has no Stark orientation integral");
    }
    throw std::domain_error("unknown dipole kernel");
}

double stark_amplitude_z(double z, KernelForm form) {
    auto f = [z, form](double theta) {
        return std::cos(z * std::cos(theta)) * kernel_weight(theta, form);
    };
    const auto res = quad::integrate_adaptive(f, 0.0, 0.5 * kPi,
                                              kQuadTol * kKernelNorm * 0.5,
                                              start_order_for(z));
    return res.value / kKernelNorm;
}

double stark_amplitude_z_derivative(double z, KernelForm form) {
    auto f = [z, form](double theta) {
        const double c = std::cos(theta);
        return -c * std::sin(z * c) * kernel_weight(theta, form);
    };
    const auto res = quad::integrate_adaptive(f, 0.0, 0.5 * kPi,
                                              kQuadTol * kKernelNorm * 0.5,
                                              start_order_for(z));
    return res.value / kKernelNorm;
}

double stark_echo_amplitude(double pulse_area, double stark_k,
                            const StarkKernel& kernel) {
    if (!(pulse_area >= 0))
        throw std::domain_error("stark_echo_amplitude: pulse_area must be >= 0");
    if (!(stark_k >= 0))
        throw std::domain_error("stark_echo_amplitude: stark_k must be >= 0");
    return stark_amplitude_z(kTwoPi * stark_k * pulse_area, kernel.form);
}

double stark_extinction_time(double field_v_per_m, double stark_k,
                             const StarkKernel& kernel, double target,
                             double max_pulse_area) {
    if (!(field_v_per_m > 0))
        throw std::domain_error("stark_extinction_time: field must be > 0");
    if (!(stark_k > 0))
        throw std::domain_error("stark_extinction_time: stark_k must be > 0");
    if (!(target > 0.0 && target <= 1.0))
        throw std::domain_error("stark_extinction_time: target must be in (0, 1]");

    if (max_pulse_area <= 0.0) {
        max_pulse_area = 4000.0 / (kTwoPi * stark_k);  // z up to 4000 rad
    }
    const double level = 1.0 - target;
    const double t_max = max_pulse_area / field_v_per_m;
    // A(0) = 1 > level; march until A crosses the level from above. A is
    // continuous and starts at 1, so the first crossing of A itself is also
    // the first time |A| <= level.
    const double period = 1.0 / (stark_k * field_v_per_m);
    const double step = period / 256.0;
    auto amp = [&](double t) {
        return stark_amplitude_z(kTwoPi * stark_k * field_v_per_m * t,
                                 kernel.form);
    };
    double t_prev = 0.0;
    double a_prev = 1.0;
    double min_abs = 1.0;
    for (double t = step; t_prev < t_max; t += step) {
        if (t > t_max) t = t_max;
        const double a = amp(t);
        min_abs = std::min(min_abs, std::abs(a));
        if (a <= level) {
            // bisect A(t) - level on [t_prev, t]
            double lo = t_prev, hi = t;
            while ((hi - lo) > 1e-4 * hi) {
                const double mid = 0.5 * (lo + hi);
                (amp(mid) > level ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        if (t >= t_max) break;
        t_prev = t;
        a_prev = a;
    }
    (void)a_prev;
    std::ostringstream os;
    os << "stark_extinction_time: target " << target
       << " unreachable within max pulse area " << max_pulse_area
       << " (V/m)*s; achieved min |A| = " << min_abs;
    throw std::runtime_error(os.str());
}

// ---------------------------------------------------------------------------
// Optical depth and memory metrics
// ---------------------------------------------------------------------------

EchoEfficiency echo_efficiency_from_od(double od) {
    if (!(od >= 0)) throw std::domain_error("echo_efficiency_from_od: od must be >= 0");
    EchoEfficiency out;
    out.paper_approx = (od / 4.0) * (od / 4.0);
    const double s = 2.0 * std::sinh(0.5 * od);
    out.exact = s * s;
    return out;
}

double od_from_efficiency(double eta, EfficiencyForm form) {
    if (!(eta >= 0.0 && eta < 1.0))
        throw std::domain_error("od_from_efficiency: eta must be in [0, 1)");
    if (form == EfficiencyForm::PaperApprox) {
        return 4.0 * std::sqrt(eta);
    }
    return 2.0 * std::asinh(0.5 * std::sqrt(eta));
}

MemoryMetrics memory_metrics(const EnsembleSpec& spec, double od,
                             double purcell_factor) {
    MemoryMetrics m;
    m.storage_time_s = spec.t2_optical_s;
    m.bandwidth_ensemble_hz = spec.line.fwhm_hz;
    m.inverse_t1_hz = spec.t1_optical_s > 0 ? 1.0 / spec.t1_optical_s : 0.0;
    m.purcell_factor = purcell_factor;
    m.single_ion_bandwidth_hz = purcell_factor * m.inverse_t1_hz;
    m.od = od;
    const EchoEfficiency eff = echo_efficiency_from_od(od);
    m.efficiency_paper = eff.paper_approx;
    m.efficiency_exact = eff.exact;
    return m;
}

}  // namespace echo::model
